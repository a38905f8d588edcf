// Command-line front end: Monte Carlo sweeps, the curvature probe, one-shot
// covariance completion, and switching-schedule inspection.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rr2d/covariance_completion.hpp"
#include "rr2d/harness.hpp"
#include "rr2d/hybrid_architecture.hpp"
#include "rr2d/io.hpp"

namespace {

namespace fs = std::filesystem;

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::invalid_argument("cannot create output directory " + dir + ": " + ec.message());
}

int run_sweep_command(const std::string& config_path, const std::string& out_dir, int threads) {
  const rr2d::ExperimentConfig config = rr2d::load_experiment_config(config_path);
  ensure_directory(out_dir);

  rr2d::SweepStats stats;
  const std::vector<rr2d::ResultRecord> records = rr2d::run_sweep(config, threads, &stats);

  const std::string csv = (fs::path(out_dir) / "sweep.csv").string();
  const std::string svg = (fs::path(out_dir) / "sweep.svg").string();
  const std::string table = (fs::path(out_dir) / "sweep.txt").string();
  rr2d::write_sweep_csv(records, csv);
  rr2d::emit_plot_data(records, svg, table);

  std::cout << "sweep: " << records.size() << " records, " << stats.angle_redraws
            << " angle redraws\n"
            << "wrote " << csv << "\n"
            << "wrote " << svg << "\n"
            << "wrote " << table << "\n";
  return 0;
}

int run_hessian_command(const std::string& config_path, const std::string& out_dir, int points,
                        int realizations, double fd_step, const std::string& objective_name) {
  const rr2d::ExperimentConfig config = rr2d::load_experiment_config(config_path);
  rr2d::HessianObjective objective;
  if (objective_name == "eliminated")
    objective = rr2d::HessianObjective::eliminated_digital;
  else if (objective_name == "quadratic")
    objective = rr2d::HessianObjective::quadratic_form;
  else
    throw std::invalid_argument("--objective must be 'eliminated' or 'quadratic'");
  ensure_directory(out_dir);

  const rr2d::HessianExperimentResult result =
      rr2d::run_hessian_experiment(config, points, realizations, fd_step, objective);

  const std::string eig = (fs::path(out_dir) / "hessian_eigenvalues.csv").string();
  const std::string hist = (fs::path(out_dir) / "hessian_histogram.csv").string();
  const std::string summary = (fs::path(out_dir) / "hessian_summary.txt").string();
  rr2d::write_hessian_files(result, eig, hist, summary);

  std::printf("hessian: %ld eigenvalues, fraction_negative %.4f, fraction_positive %.4f, %d points skipped\n",
              result.total(), result.fraction_negative(), result.fraction_positive(),
              result.n_skipped);
  std::cout << "wrote " << eig << "\n"
            << "wrote " << hist << "\n"
            << "wrote " << summary << "\n";
  return 0;
}

int run_complete_command(const std::string& in_path, const std::string& out_path) {
  const rr2d::MaskedCovariance incomplete = rr2d::load_masked_matrix(in_path);
  const rr2d::CompletionConfig config;  // defaults
  const auto [completed, report] = rr2d::dykstra_complete(incomplete, config);
  rr2d::save_completed_matrix(completed, report, out_path);
  std::printf("complete: %ld iterations, converged %d, final change %.3e\n",
              static_cast<long>(report.iterations_run), report.converged ? 1 : 0,
              report.final_relative_change);
  std::printf("residuals: min eigenvalue %.3e, toeplitz %.3e, observed %.3e\n",
              report.constraint_residuals.psd_min_eig,
              report.constraint_residuals.toeplitz_frobenius_rel,
              report.constraint_residuals.observed_frobenius_rel);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int run_schedule_command(int nd, int ns, int ks) {
  const rr2d::SubArrayPartition partition{nd, ns};
  const rr2d::SwitchSchedule schedule = rr2d::hierarchical_schedule(partition, ks);
  for (const rr2d::SwitchConfiguration& config : schedule.configs) {
    for (std::size_t d = 0; d < config.active.size(); ++d) {
      if (d) std::cout << ",";
      std::cout << config.active[d];
    }
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sub-array hybrid beamforming experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir, in_path, out_path;
  int threads = 0;
  int points = 100, realizations = 1000;
  double fd_step = 1e-4;
  std::string objective_name = "eliminated";
  int nd = 2, ns = 16, ks = 4;

  CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo SNR sweep over the configured methods");
  sweep->add_option("--config", config_path, "experiment config JSON")->required();
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_option("--threads", threads, "worker threads (0 = auto, capped by RR2D_THREADS)");

  CLI::App* hessian = app.add_subcommand("hessian", "curvature spectrum of the analog-phase objective");
  hessian->add_option("--config", config_path, "experiment config JSON")->required();
  hessian->add_option("--points", points, "random phase points per realization");
  hessian->add_option("--realizations", realizations, "random scenarios");
  hessian->add_option("--fd-step", fd_step, "finite-difference step");
  hessian->add_option("--objective", objective_name, "'eliminated' or 'quadratic'");
  hessian->add_option("--out", out_dir, "output directory")->required();

  CLI::App* complete = app.add_subcommand("complete", "complete a partially observed covariance");
  complete->add_option("--in", in_path, "masked matrix file")->required();
  complete->add_option("--out", out_path, "completed matrix file")->required();

  CLI::App* schedule = app.add_subcommand("schedule", "print the hierarchical switching schedule");
  schedule->add_option("--nd", nd, "number of sub-arrays / digital channels")->required();
  schedule->add_option("--ns", ns, "elements per sub-array")->required();
  schedule->add_option("--ks", ks, "snapshots per configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sweep->parsed()) return run_sweep_command(config_path, out_dir, threads);
    if (hessian->parsed())
      return run_hessian_command(config_path, out_dir, points, realizations, fd_step,
                                 objective_name);
    if (complete->parsed()) return run_complete_command(in_path, out_path);
    if (schedule->parsed()) return run_schedule_command(nd, ns, ks);
  } catch (const rr2d::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rr2d/harness.hpp"

using namespace rr2d;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 4-element configuration that keeps Monte Carlo cheap; k_s = 4 keeps the
// per-element sample budgets of both architectures equal (8 each).
ExperimentConfig tiny_config() {
  ExperimentConfig config;
  config.n_elements = 4;
  config.n_digital = 2;
  config.k_s = 4;
  config.n_trials = 4;
  config.snr_db_range = {-6.0, 6.0, 6.0};
  config.n_interferers = 1;
  config.methods = {MethodTag::D_MVDR, MethodTag::D_SMI, MethodTag::H_SMI_RR2D};
  config.seed = 555;
  return config;
}

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "rr2d_harness_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("snr range enumerates inclusive endpoints", "[harness]") {
  const SnrRange full{-30.0, 30.0, 2.0};
  REQUIRE(full.points().size() == 31);
  const SnrRange desk{-30.0, 30.0, 6.0};
  const std::vector<double> pts = desk.points();
  REQUIRE(pts.size() == 11);
  REQUIRE(pts.front() == Catch::Approx(-30.0));
  REQUIRE(pts.back() == Catch::Approx(30.0));
  REQUIRE_THROWS_AS((SnrRange{0.0, 10.0, 0.0}.points()), std::invalid_argument);
  REQUIRE_THROWS_AS((SnrRange{10.0, 0.0, 1.0}.points()), std::invalid_argument);
}

TEST_CASE("experiment config validation and sample budgets", "[harness]") {
  ExperimentConfig config;  // reference-scale defaults
  REQUIRE_NOTHROW(config.validate());
  REQUIRE(config.snapshots_per_element() == 64);
  REQUIRE(config.snapshots_per_element() == 2 * config.n_elements);

  ExperimentConfig bad_div = config;
  bad_div.n_elements = 30;
  bad_div.n_digital = 4;
  REQUIRE_THROWS_AS(bad_div.validate(), std::invalid_argument);

  ExperimentConfig bad_parity = config;
  bad_parity.k_s = 3;  // 3 * 16 != 64
  REQUIRE_THROWS_WITH(bad_parity.validate(),
                      Catch::Matchers::ContainsSubstring("sample budgets"));

  ExperimentConfig no_methods = config;
  no_methods.methods.clear();
  REQUIRE_THROWS_AS(no_methods.validate(), std::invalid_argument);

  ExperimentConfig no_trials = config;
  no_trials.n_trials = 0;
  REQUIRE_THROWS_AS(no_trials.validate(), std::invalid_argument);
}

TEST_CASE("input baseline matches the single-element formula", "[harness]") {
  ExperimentConfig config;
  REQUIRE(input_sinr_db(config, 0.0) ==
          Catch::Approx(10.0 * std::log10(1.0 / 201.0)).margin(1e-9));
  REQUIRE(input_sinr_db(config, 30.0) ==
          Catch::Approx(10.0 * std::log10(1000.0 / 201.0)).margin(1e-9));
  ExperimentConfig quiet = config;
  quiet.n_interferers = 0;
  REQUIRE(input_sinr_db(quiet, 7.0) == Catch::Approx(7.0).margin(1e-9));
}

TEST_CASE("scenario drawing is seeded and respects the separation guard", "[harness]") {
  ExperimentConfig config;
  const Scenario a = draw_scenario(config, 3.0, 2024);
  const Scenario b = draw_scenario(config, 3.0, 2024);
  REQUIRE(a.soi.angle_deg == b.soi.angle_deg);
  REQUIRE(a.interferers.size() == 2);
  REQUIRE(a.interferers[0].angle_deg == b.interferers[0].angle_deg);
  REQUIRE(a.soi.power == Catch::Approx(db_to_linear(3.0)));
  REQUIRE(a.interferers[1].power == Catch::Approx(100.0));

  const Scenario c = draw_scenario(config, 3.0, 2025);
  REQUIRE(a.soi.angle_deg != c.soi.angle_deg);

  long redraws = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const Scenario s = draw_scenario(config, 0.0, seed, &redraws);
    for (const Source& i : s.interferers)
      REQUIRE(std::abs(i.angle_deg - s.soi.angle_deg) >= kMinAngleSeparationDeg);
  }
  REQUIRE(redraws >= 0);
}

TEST_CASE("run_trial is reproducible per seed and method", "[harness]") {
  const ExperimentConfig config = tiny_config();
  const double a = run_trial(config, 0.0, MethodTag::D_MVDR, 77);
  const double b = run_trial(config, 0.0, MethodTag::D_MVDR, 77);
  REQUIRE(a == b);
  const double c = run_trial(config, 0.0, MethodTag::D_MVDR, 78);
  REQUIRE(a != c);

  // every method runs and returns a finite SINR on the tiny setup
  for (MethodTag tag : all_methods()) {
    const double sinr = run_trial(config, 0.0, tag, 901);
    REQUIRE(std::isfinite(sinr));
  }
}

TEST_CASE("sweep aggregates trials into per-method records", "[harness]") {
  ExperimentConfig config = tiny_config();
  config.methods = {MethodTag::D_MVDR};
  config.n_trials = 3;

  const std::vector<ResultRecord> records = run_sweep(config);
  // 3 SNR points x (1 baseline + 1 method)
  REQUIRE(records.size() == 6);
  REQUIRE(records[0].method == kInputBaselineName);
  REQUIRE(records[0].std_sinr_db == 0.0);
  REQUIRE(records[1].method == "D_MVDR");
  REQUIRE(records[1].n_trials == 3);

  // the aggregate equals the mean over per-trial reruns
  double mean = 0.0;
  for (int trial = 0; trial < 3; ++trial)
    mean += run_trial(config, records[1].snr_db, MethodTag::D_MVDR,
                      detail::trial_seed_for(config.seed, 0, trial));
  mean /= 3.0;
  REQUIRE(records[1].mean_sinr_db == Catch::Approx(mean).margin(1e-12));

  // ... and the linear-domain mean matches the same reruns
  double linear = 0.0;
  for (int trial = 0; trial < 3; ++trial)
    linear += std::pow(10.0, run_trial(config, records[1].snr_db, MethodTag::D_MVDR,
                                       detail::trial_seed_for(config.seed, 0, trial)) /
                                 10.0);
  REQUIRE(records[1].mean_sinr_db_linear ==
          Catch::Approx(10.0 * std::log10(linear / 3.0)).margin(1e-12));

  // baseline records carry the analytic single-element value in both columns
  REQUIRE(records[0].mean_sinr_db ==
          Catch::Approx(input_sinr_db(config, records[0].snr_db)).margin(1e-12));
  REQUIRE(records[0].mean_sinr_db_linear == records[0].mean_sinr_db);
}

TEST_CASE("sweep output is identical across thread counts", "[harness]") {
  const ExperimentConfig config = tiny_config();

  const std::vector<ResultRecord> serial = run_sweep(config, 1);
  const std::vector<ResultRecord> parallel = run_sweep(config, 4);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t k = 0; k < serial.size(); ++k) {
    REQUIRE(serial[k].method == parallel[k].method);
    REQUIRE(serial[k].mean_sinr_db == parallel[k].mean_sinr_db);  // bitwise
    REQUIRE(serial[k].mean_sinr_db_linear == parallel[k].mean_sinr_db_linear);
    REQUIRE(serial[k].std_sinr_db == parallel[k].std_sinr_db);
  }

  const auto dir = temp_dir();
  const std::string csv1 = (dir / "serial.csv").string();
  const std::string csv2 = (dir / "parallel.csv").string();
  write_sweep_csv(serial, csv1);
  write_sweep_csv(parallel, csv2);
  REQUIRE(slurp(csv1) == slurp(csv2));

  const std::string header = slurp(csv1).substr(0, slurp(csv1).find('\n'));
  REQUIRE(header == "snr_db,method,mean_sinr_db,std_sinr_db,n_trials");
}

TEST_CASE("thread cap from the environment is validated", "[harness]") {
  setenv("RR2D_THREADS", "2", 1);
  REQUIRE(detail::resolve_thread_count(8) == 2);
  setenv("RR2D_THREADS", "banana", 1);
  REQUIRE_THROWS_AS(detail::resolve_thread_count(8), std::invalid_argument);
  setenv("RR2D_THREADS", "0", 1);
  REQUIRE_THROWS_AS(detail::resolve_thread_count(8), std::invalid_argument);
  unsetenv("RR2D_THREADS");
  REQUIRE(detail::resolve_thread_count(3) == 3);
}

TEST_CASE("hessian experiment collects spectra deterministically", "[harness]") {
  ExperimentConfig config = tiny_config();
  const HessianExperimentResult result = run_hessian_experiment(config, 2, 3, 1e-4);
  REQUIRE(result.records.size() == 6);
  REQUIRE(result.n_skipped == 0);
  for (const HessianRecord& rec : result.records) {
    REQUIRE(rec.eigenvalues.size() == 4);
    // sorted ascending
    for (int k = 1; k < 4; ++k) REQUIRE(rec.eigenvalues(k) >= rec.eigenvalues(k - 1));
  }
  REQUIRE(result.total() == 24);
  REQUIRE(result.fraction_negative() + result.fraction_positive() <= 1.0 + 1e-12);

  const HessianExperimentResult again = run_hessian_experiment(config, 2, 3, 1e-4);
  REQUIRE((again.records[0].eigenvalues - result.records[0].eigenvalues).norm() == 0.0);

  // the quadratic-form objective variant also runs
  const HessianExperimentResult quad = run_hessian_experiment(
      config, 1, 1, 1e-4, HessianObjective::quadratic_form);
  REQUIRE(quad.records.size() == 1);

  REQUIRE_THROWS_AS(run_hessian_experiment(config, 0, 1, 1e-4), std::invalid_argument);
  REQUIRE_THROWS_AS(run_hessian_experiment(config, 1, 1, -1.0), std::invalid_argument);
}

TEST_CASE("hessian file emission", "[harness]") {
  ExperimentConfig config = tiny_config();
  const HessianExperimentResult result = run_hessian_experiment(config, 2, 2, 1e-4);
  const auto dir = temp_dir();
  const std::string eig = (dir / "eig.csv").string();
  const std::string hist = (dir / "hist.csv").string();
  const std::string summary = (dir / "summary.txt").string();
  write_hessian_files(result, eig, hist, summary);

  const std::string eig_text = slurp(eig);
  REQUIRE(eig_text.rfind("realization,point,index,eigenvalue\n", 0) == 0);
  // header + one line per eigenvalue
  REQUIRE(std::count(eig_text.begin(), eig_text.end(), '\n') ==
          1 + static_cast<long>(result.total()));
  REQUIRE(slurp(hist).rfind("bin_lo,bin_hi,count\n", 0) == 0);
  REQUIRE(slurp(summary).find("fraction_negative") != std::string::npos);
}

TEST_CASE("plot emission writes svg series and a text table", "[harness]") {
  std::vector<ResultRecord> records;
  for (double snr : {-10.0, 0.0, 10.0}) {
    records.push_back({snr, "INPUT", snr - 23.0, snr - 23.0, 0.0, 5});
    records.push_back({snr, "D_MVDR", snr + 12.0, snr + 12.5, 1.0, 5});
    records.push_back({snr, "H_SMI_RR2D", snr + 4.0, snr + 4.5, 1.0, 5});
  }
  const auto dir = temp_dir();
  const std::string svg_path = (dir / "plot.svg").string();
  const std::string table_path = (dir / "plot.txt").string();
  emit_plot_data(records, svg_path, table_path);

  const std::string svg = slurp(svg_path);
  REQUIRE(svg.find("<svg") != std::string::npos);
  REQUIRE(std::count(svg.begin(), svg.end(), '\n') > 10);
  std::size_t polylines = 0;
  for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
       pos = svg.find("<polyline", pos + 1))
    ++polylines;
  REQUIRE(polylines == 3);
  REQUIRE(svg.find("stroke-dasharray") != std::string::npos);  // dashed baseline
  REQUIRE(svg.find("H_SMI_RR2D") != std::string::npos);        // legend label

  const std::string table = slurp(table_path);
  REQUIRE(table.find("snr_db") != std::string::npos);
  REQUIRE(table.find("D_MVDR") != std::string::npos);
  // both mean definitions get a matrix
  REQUIRE(table.find("mean_sinr_db:") != std::string::npos);
  REQUIRE(table.find("mean_sinr_db_linear:") != std::string::npos);
  REQUIRE(table.find("22.500") != std::string::npos);  // a value only the linear matrix holds

  REQUIRE_THROWS_AS(emit_plot_data({}, svg_path, table_path), std::invalid_argument);
}

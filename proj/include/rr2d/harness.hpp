#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rr2d/array_model.hpp"
#include "rr2d/beamformers.hpp"
#include "rr2d/circle_manifold.hpp"
#include "rr2d/common.hpp"
#include "rr2d/covariance_completion.hpp"
#include "rr2d/hybrid_architecture.hpp"

namespace rr2d {

struct SnrRange {
  double start_db = -30.0;
  double stop_db = 30.0;
  double step_db = 2.0;

  void validate() const {
    if (!(step_db > 0.0)) throw std::invalid_argument("SnrRange: step must be > 0");
    if (stop_db < start_db) throw std::invalid_argument("SnrRange: stop must be >= start");
  }

  std::vector<double> points() const {
    validate();
    std::vector<double> out;
    for (int k = 0;; ++k) {
      const double v = start_db + k * step_db;
      if (v > stop_db + 1e-9) break;
      out.push_back(v);
    }
    return out;
  }
};

inline std::vector<MethodTag> all_methods() {
  return {MethodTag::D_MVDR,    MethodTag::D_SMI,      MethodTag::H_MVDR_ACM,
          MethodTag::H_SMI_SCM, MethodTag::H_SMI_RR2D, MethodTag::PDBF_MVDR};
}

struct ExperimentConfig {
  int n_elements = 32;
  int n_digital = 2;
  double spacing = 0.5;
  SnrRange snr_db_range;
  double inr_db = 20.0;
  int n_interferers = 2;
  int k_s = 4;  // snapshots per switch configuration
  int n_trials = 500;
  std::vector<MethodTag> methods = all_methods();
  std::uint64_t seed = 20240901ULL;
  bool toeplitz_projection = true;       // ablation switch for the completion stage
  bool covariance_includes_soi = false;  // sample the SOI into SCM paths (degraded mode)
  CompletionConfig completion;
  AscentOptions ascent;

  SubArrayPartition partition() const { return {n_digital, n_elements / n_digital}; }

  // Both estimator families get the same per-element sample count.
  int snapshots_per_element() const {
    long per_element = k_s;
    for (int d = 0; d < n_digital - 1; ++d) per_element *= n_elements / n_digital;
    return static_cast<int>(per_element);
  }

  void validate() const {
    snr_db_range.validate();
    completion.validate();
    ascent.validate();
    if (n_elements < 1 || n_digital < 1 || n_elements % n_digital != 0)
      throw std::invalid_argument("ExperimentConfig: n_elements must be a positive multiple of n_digital");
    if (!(spacing > 0.0)) throw std::invalid_argument("ExperimentConfig: spacing must be > 0");
    if (n_interferers < 0) throw std::invalid_argument("ExperimentConfig: n_interferers must be >= 0");
    if (k_s < 1) throw std::invalid_argument("ExperimentConfig: k_s must be >= 1");
    if (n_trials < 1) throw std::invalid_argument("ExperimentConfig: n_trials must be >= 1");
    if (methods.empty()) throw std::invalid_argument("ExperimentConfig: methods must be nonempty");

    const int n_per = n_elements / n_digital;
    double n_configs = 1.0;
    for (int d = 0; d < n_digital; ++d) n_configs *= n_per;
    if (n_configs > 1e6)
      throw std::invalid_argument("ExperimentConfig: switching schedule too large (> 1e6 configurations)");
    const long hybrid_budget =
        static_cast<long>(k_s) * static_cast<long>(n_configs / n_per + 0.5);
    const long dbf_budget = 2L * n_elements;
    if (hybrid_budget != dbf_budget)
      throw std::invalid_argument(
          "ExperimentConfig: per-element sample budgets differ between architectures "
          "(hybrid k_s*n_per^(n_digital-1) = " + std::to_string(hybrid_budget) +
          ", digital 2*n_elements = " + std::to_string(dbf_budget) + "); adjust k_s");
  }
};

struct ResultRecord {
  double snr_db = 0.0;
  std::string method;
  double mean_sinr_db = 0.0;         // mean of the per-trial dB values
  double mean_sinr_db_linear = 0.0;  // dB of the mean per-trial linear SINR
  double std_sinr_db = 0.0;
  int n_trials = 0;
};

struct SweepStats {
  long angle_redraws = 0;
};

inline constexpr double kMinAngleSeparationDeg = 0.5;
inline constexpr const char* kInputBaselineName = "INPUT";

/// Single-element reference: p_s / (noise + total interference), independent
/// of arrival angles.
inline double input_sinr_db(const ExperimentConfig& config, double snr_db) {
  const double p_s = db_to_linear(snr_db);
  const double denom = 1.0 + config.n_interferers * db_to_linear(config.inr_db);
  return linear_to_db(p_s / denom);
}

/// Draws SOI and interferer angles uniformly on [-90, 90]; interferers landing
/// within 0.5 degrees of the SOI are redrawn.
inline Scenario draw_scenario(const ExperimentConfig& config, double snr_db,
                              std::uint64_t scenario_seed, long* redraw_count = nullptr) {
  std::mt19937_64 rng(scenario_seed);
  std::uniform_real_distribution<double> angle(-90.0, 90.0);

  Scenario scenario;
  scenario.geometry = {config.n_elements, config.spacing};
  scenario.noise_power = 1.0;
  scenario.seed = scenario_seed;
  scenario.soi = {angle(rng), db_to_linear(snr_db), SourceKind::soi};
  scenario.interferers.reserve(config.n_interferers);
  const double p_i = db_to_linear(config.inr_db);
  for (int i = 0; i < config.n_interferers; ++i) {
    double theta = angle(rng);
    while (std::abs(theta - scenario.soi.angle_deg) < kMinAngleSeparationDeg) {
      theta = angle(rng);
      if (redraw_count) ++*redraw_count;
    }
    scenario.interferers.push_back({theta, p_i, SourceKind::interferer});
  }
  scenario.validate();
  return scenario;
}

namespace detail {

/// Lifts a covariance estimate to strictly positive definite by diagonal
/// loading when its smallest eigenvalue sits at or below a relative floor.
/// Needed for estimates that are indefinite by construction, e.g. the
/// zero-filled partially observed SCM.
inline HermitianMatrix loaded_for_inversion(const HermitianMatrix& r, double rel_floor = 1e-6) {
  const double scale =
      std::max(std::abs(r.trace_real()) / static_cast<double>(r.size()), 1e-300);
  const double floor = rel_floor * scale;
  const double min_eig = r.min_eigenvalue();
  if (min_eig > floor) return r;
  const Eigen::Index n = r.size();
  return HermitianMatrix(r.matrix() +
                         (floor - min_eig) * Eigen::MatrixXcd::Identity(n, n));
}

inline std::uint64_t snapshot_seed(std::uint64_t trial_seed, MethodTag method) {
  return mix_seed(trial_seed, 0xA0ULL + static_cast<std::uint64_t>(method));
}

/// Full-array snapshots restricted per configuration, as produced by the
/// switching measurement chain.
inline std::vector<SnapshotBlock> collect_switched_blocks(const Scenario& scenario,
                                                          const SwitchSchedule& schedule,
                                                          bool include_soi,
                                                          std::mt19937_64& rng) {
  std::vector<SnapshotBlock> blocks;
  blocks.reserve(schedule.configs.size());
  for (const SwitchConfiguration& config : schedule.configs) {
    const SnapshotBlock full =
        generate_snapshots(scenario, schedule.snapshots_per_config, include_soi, rng);
    blocks.push_back(restrict_to_active(full, config));
  }
  return blocks;
}

}  // namespace detail

/// Runs one Monte Carlo trial of one method and returns its output SINR in dB
/// against the analytical signal and interference-plus-noise covariances. The
/// scenario is fully determined by trial_seed, so every method sees identical
/// conditions at a given trial.
inline double run_trial(const ExperimentConfig& config, double snr_db, MethodTag method,
                        std::uint64_t trial_seed, long* redraw_count = nullptr) {
  const Scenario scenario = draw_scenario(config, snr_db, trial_seed, redraw_count);
  const Eigen::VectorXcd a = steering_vector(scenario.geometry, scenario.soi.angle_deg);
  const HermitianMatrix r_in = analytical_covariance(scenario, false);
  const HermitianMatrix r_s(scenario.soi.power * (a * a.adjoint()), 1e-9);
  const SubArrayPartition partition = config.partition();

  Eigen::VectorXcd w_eff;
  switch (method) {
    case MethodTag::D_MVDR: {
      w_eff = mvdr_weights(r_in, a);
      break;
    }
    case MethodTag::D_SMI: {
      std::mt19937_64 rng(detail::snapshot_seed(trial_seed, method));
      const SnapshotBlock block = generate_snapshots(
          scenario, 2 * config.n_elements, config.covariance_includes_soi, rng);
      const HermitianMatrix scm = detail::loaded_for_inversion(sample_covariance(block));
      w_eff = mvdr_weights(scm, a);
      break;
    }
    case MethodTag::H_MVDR_ACM: {
      w_eff = hybrid_mvdr(r_in, a, partition, config.ascent, method).effective_weights;
      break;
    }
    case MethodTag::H_SMI_SCM: {
      // clairvoyant baseline: the hybrid pipeline is granted the full-array
      // SCM, estimated from the same per-element sample budget as D_SMI
      std::mt19937_64 rng(detail::snapshot_seed(trial_seed, method));
      const SnapshotBlock block = generate_snapshots(
          scenario, 2 * config.n_elements, config.covariance_includes_soi, rng);
      const HermitianMatrix scm = detail::loaded_for_inversion(sample_covariance(block));
      w_eff = hybrid_mvdr(scm, a, partition, config.ascent, method).effective_weights;
      break;
    }
    case MethodTag::H_SMI_RR2D: {
      std::mt19937_64 rng(detail::snapshot_seed(trial_seed, method));
      const SwitchSchedule schedule = hierarchical_schedule(partition, config.k_s);
      const MaskedCovariance incomplete = assemble_incomplete_scm(
          schedule,
          detail::collect_switched_blocks(scenario, schedule,
                                          config.covariance_includes_soi, rng));
      CompletionConfig completion = config.completion;
      completion.toeplitz_projection = config.toeplitz_projection;
      const HermitianMatrix r_est = dykstra_complete(incomplete, completion).first;
      w_eff = hybrid_mvdr(detail::loaded_for_inversion(r_est), a, partition, config.ascent,
                          method)
                  .effective_weights;
      break;
    }
    case MethodTag::PDBF_MVDR: {
      w_eff = pdbf_mvdr(r_in, a, partition).effective_weights;
      break;
    }
  }
  return output_sinr_db(w_eff, r_s, r_in);
}

namespace detail {

inline std::uint64_t trial_seed_for(std::uint64_t master, std::size_t snr_index,
                                    int trial) {
  return mix_seed(mix_seed(master, snr_index), static_cast<std::uint64_t>(trial));
}

inline int resolve_thread_count(int requested) {
  int n = requested;
  if (n <= 0) {
    n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
  }
  if (const char* env = std::getenv("RR2D_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1)
      throw std::invalid_argument("RR2D_THREADS must be a positive integer");
    n = std::min<long>(n, cap);
  }
  return n;
}

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

inline Moments moments_of(const std::vector<double>& xs) {
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - m.mean) * (x - m.mean);
  m.stddev = std::sqrt(var / static_cast<double>(xs.size()));
  return m;
}

}  // namespace detail

/// Monte Carlo SNR sweep across the configured methods. Trials distribute
/// over a worker pool (capped by RR2D_THREADS); per-trial seeds derive from
/// the master seed, so records are identical for any thread count. Each SNR
/// point also gets a single-element input-SINR baseline record.
inline std::vector<ResultRecord> run_sweep(const ExperimentConfig& config, int n_threads = 0,
                                           SweepStats* stats = nullptr) {
  config.validate();
  const std::vector<double> snrs = config.snr_db_range.points();
  const std::size_t n_methods = config.methods.size();
  const std::size_t n_tasks = snrs.size() * static_cast<std::size_t>(config.n_trials);

  std::vector<double> sinr(n_tasks * n_methods, 0.0);
  std::vector<long> redraws(n_tasks, 0);

  const int workers = static_cast<int>(
      std::min<std::size_t>(detail::resolve_thread_count(n_threads), n_tasks));
  std::atomic<std::size_t> next_task{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t task = next_task.fetch_add(1);
      if (task >= n_tasks || failed.load()) break;
      const std::size_t snr_index = task / config.n_trials;
      const int trial = static_cast<int>(task % config.n_trials);
      const std::uint64_t trial_seed = detail::trial_seed_for(config.seed, snr_index, trial);
      try {
        for (std::size_t m = 0; m < n_methods; ++m) {
          long* rd = m == 0 ? &redraws[task] : nullptr;  // scenario redraws counted once
          sinr[task * n_methods + m] =
              run_trial(config, snrs[snr_index], config.methods[m], trial_seed, rd);
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) first_error = e.what();
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failed.load()) throw numeric_error("run_sweep: trial failed: " + first_error);

  if (stats) {
    stats->angle_redraws = 0;
    for (long r : redraws) stats->angle_redraws += r;
  }

  std::vector<ResultRecord> records;
  records.reserve(snrs.size() * (n_methods + 1));
  std::vector<double> trial_values(config.n_trials);
  for (std::size_t s = 0; s < snrs.size(); ++s) {
    ResultRecord baseline;
    baseline.snr_db = snrs[s];
    baseline.method = kInputBaselineName;
    baseline.mean_sinr_db = input_sinr_db(config, snrs[s]);
    baseline.mean_sinr_db_linear = baseline.mean_sinr_db;
    baseline.std_sinr_db = 0.0;
    baseline.n_trials = config.n_trials;
    records.push_back(baseline);

    for (std::size_t m = 0; m < n_methods; ++m) {
      double linear_sum = 0.0;
      for (int trial = 0; trial < config.n_trials; ++trial) {
        trial_values[trial] =
            sinr[(s * config.n_trials + trial) * n_methods + m];
        linear_sum += db_to_linear(trial_values[trial]);
      }
      const detail::Moments mom = detail::moments_of(trial_values);
      ResultRecord rec;
      rec.snr_db = snrs[s];
      rec.method = method_name(config.methods[m]);
      rec.mean_sinr_db = mom.mean;
      rec.mean_sinr_db_linear =
          linear_to_db(linear_sum / static_cast<double>(config.n_trials));
      rec.std_sinr_db = mom.stddev;
      rec.n_trials = config.n_trials;
      records.push_back(rec);
    }
  }
  return records;
}

inline void write_sweep_csv(const std::vector<ResultRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("write_sweep_csv: cannot open " + path);
  out << "snr_db,method,mean_sinr_db,std_sinr_db,n_trials\n";
  char buf[160];
  for (const ResultRecord& r : records) {
    std::snprintf(buf, sizeof(buf), "%.6f,%s,%.6f,%.6f,%d\n", r.snr_db, r.method.c_str(),
                  r.mean_sinr_db, r.std_sinr_db, r.n_trials);
    out << buf;
  }
  if (!out.good()) throw std::invalid_argument("write_sweep_csv: write failed for " + path);
}

// ---------------------------------------------------------------------------
// Curvature probe of the analog-phase landscape.

enum class HessianObjective {
  eliminated_digital,  // MVDR output power with the digital stage solved in closed form
  quadratic_form,      // matched-energy quadratic w^H B^H B w
};

struct HessianRecord {
  int realization = 0;
  int point = 0;
  Eigen::VectorXd eigenvalues;  // sorted ascending
};

struct HessianExperimentResult {
  std::vector<HessianRecord> records;
  long n_negative = 0;
  long n_positive = 0;
  long n_zero = 0;
  int n_skipped = 0;

  long total() const { return n_negative + n_positive + n_zero; }
  double fraction_negative() const {
    return total() > 0 ? static_cast<double>(n_negative) / total() : 0.0;
  }
  double fraction_positive() const {
    return total() > 0 ? static_cast<double>(n_positive) / total() : 0.0;
  }
};

/// Samples the Hessian spectrum of the analog-phase objective at random
/// feasible points across random scenarios. The objective depends only on the
/// interference-plus-noise statistics, so the SOI power is pinned at 0 dB.
/// Numeric failures skip the point and are counted.
inline HessianExperimentResult run_hessian_experiment(
    const ExperimentConfig& config, int n_points, int n_realizations, double fd_step = 1e-4,
    HessianObjective objective = HessianObjective::eliminated_digital) {
  config.validate();
  if (n_points < 1 || n_realizations < 1)
    throw std::invalid_argument("run_hessian_experiment: points and realizations must be >= 1");
  if (!(fd_step > 0.0))
    throw std::invalid_argument("run_hessian_experiment: fd_step must be > 0");

  const SubArrayPartition partition = config.partition();
  HessianExperimentResult result;

  for (int r = 0; r < n_realizations; ++r) {
    const std::uint64_t seed = mix_seed(mix_seed(config.seed, 0x4855ULL), r);
    const Scenario scenario = draw_scenario(config, 0.0, seed);
    const Eigen::VectorXcd a = steering_vector(scenario.geometry, scenario.soi.angle_deg);
    const HermitianMatrix r_in = analytical_covariance(scenario, false);

    std::function<double(const Eigen::VectorXd&)> f;
    if (objective == HessianObjective::eliminated_digital) {
      f = [&](const Eigen::VectorXd& phases) {
        const AnalogWeights analog =
            AnalogWeights::from_flat(PhaseVector::from_phases(phases).entries(), partition);
        const Eigen::MatrixXcd wa = block_diagonal(analog);
        const Eigen::VectorXcd v = wa * a;
        const Eigen::MatrixXcd m = wa * r_in.matrix() * wa.adjoint();
        const Eigen::VectorXcd x = m.ldlt().solve(v);
        return (v.adjoint() * x)(0).real();
      };
    } else {
      const Eigen::VectorXcd w0 = mvdr_weights(r_in, a);
      const Eigen::MatrixXcd b = build_w0_blocks(w0, partition);
      const Eigen::MatrixXcd q = b.adjoint() * b;
      f = [q](const Eigen::VectorXd& phases) {
        const Eigen::VectorXcd w = PhaseVector::from_phases(phases).entries();
        return (w.adjoint() * q * w)(0).real();
      };
    }

    std::mt19937_64 point_rng(mix_seed(seed, 0x504fULL));
    std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
    for (int p = 0; p < n_points; ++p) {
      Eigen::VectorXd phi(partition.n_total());
      for (Eigen::Index k = 0; k < phi.size(); ++k) phi(k) = phase(point_rng);
      try {
        HessianRecord rec;
        rec.realization = r;
        rec.point = p;
        rec.eigenvalues = hessian_spectrum_at(f, phi, fd_step);
        const double tol = 1e-6 * std::max(std::abs(rec.eigenvalues(0)),
                                           std::abs(rec.eigenvalues(rec.eigenvalues.size() - 1)));
        for (Eigen::Index k = 0; k < rec.eigenvalues.size(); ++k) {
          if (rec.eigenvalues(k) < -tol)
            ++result.n_negative;
          else if (rec.eigenvalues(k) > tol)
            ++result.n_positive;
          else
            ++result.n_zero;
        }
        result.records.push_back(std::move(rec));
      } catch (const numeric_error&) {
        ++result.n_skipped;
      }
    }
  }
  return result;
}

inline void write_hessian_files(const HessianExperimentResult& result,
                                const std::string& eigenvalues_path,
                                const std::string& histogram_path,
                                const std::string& summary_path, int n_bins = 40) {
  std::ofstream eig(eigenvalues_path);
  if (!eig) throw std::invalid_argument("write_hessian_files: cannot open " + eigenvalues_path);
  eig << "realization,point,index,eigenvalue\n";
  char buf[128];
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const HessianRecord& rec : result.records) {
    for (Eigen::Index k = 0; k < rec.eigenvalues.size(); ++k) {
      const double v = rec.eigenvalues(k);
      std::snprintf(buf, sizeof(buf), "%d,%d,%ld,%.9e\n", rec.realization, rec.point,
                    static_cast<long>(k), v);
      eig << buf;
      lo = first ? v : std::min(lo, v);
      hi = first ? v : std::max(hi, v);
      first = false;
    }
  }
  if (!eig.good()) throw std::invalid_argument("write_hessian_files: write failed for " + eigenvalues_path);

  std::ofstream hist(histogram_path);
  if (!hist) throw std::invalid_argument("write_hessian_files: cannot open " + histogram_path);
  hist << "bin_lo,bin_hi,count\n";
  if (!first) {
    if (hi <= lo) hi = lo + 1.0;
    std::vector<long> counts(n_bins, 0);
    const double width = (hi - lo) / n_bins;
    for (const HessianRecord& rec : result.records) {
      for (Eigen::Index k = 0; k < rec.eigenvalues.size(); ++k) {
        int bin = static_cast<int>((rec.eigenvalues(k) - lo) / width);
        bin = std::clamp(bin, 0, n_bins - 1);
        ++counts[bin];
      }
    }
    for (int b = 0; b < n_bins; ++b) {
      std::snprintf(buf, sizeof(buf), "%.9e,%.9e,%ld\n", lo + b * width, lo + (b + 1) * width,
                    counts[b]);
      hist << buf;
    }
  }
  if (!hist.good()) throw std::invalid_argument("write_hessian_files: write failed for " + histogram_path);

  std::ofstream sum(summary_path);
  if (!sum) throw std::invalid_argument("write_hessian_files: cannot open " + summary_path);
  sum << "eigenvalues_total " << result.total() << "\n"
      << "fraction_negative " << result.fraction_negative() << "\n"
      << "fraction_positive " << result.fraction_positive() << "\n"
      << "zero_count " << result.n_zero << "\n"
      << "points_skipped " << result.n_skipped << "\n";
  if (!sum.good()) throw std::invalid_argument("write_hessian_files: write failed for " + summary_path);
}

// ---------------------------------------------------------------------------
// Plot emission: one SVG line chart plus a plain-text table.

namespace detail {

struct Series {
  std::string name;
  std::vector<double> snr;
  std::vector<double> mean;
  std::vector<double> mean_linear;
};

inline std::vector<Series> group_records(const std::vector<ResultRecord>& records) {
  std::vector<Series> series;
  for (const ResultRecord& r : records) {
    auto it = std::find_if(series.begin(), series.end(),
                           [&](const Series& s) { return s.name == r.method; });
    if (it == series.end()) {
      series.push_back({r.method, {}, {}, {}});
      it = series.end() - 1;
    }
    it->snr.push_back(r.snr_db);
    it->mean.push_back(r.mean_sinr_db);
    it->mean_linear.push_back(r.mean_sinr_db_linear);
  }
  return series;
}

inline const char* series_color(const std::string& name) {
  static const std::pair<const char*, const char*> palette[] = {
      {"D_MVDR", "#1f77b4"},     {"D_SMI", "#ff7f0e"},      {"H_MVDR_ACM", "#2ca02c"},
      {"H_SMI_SCM", "#d62728"},  {"H_SMI_RR2D", "#9467bd"}, {"PDBF_MVDR", "#8c564b"},
      {"INPUT", "#7f7f7f"},
  };
  for (const auto& [key, color] : palette)
    if (name == key) return color;
  return "#17becf";
}

}  // namespace detail

/// Writes an SVG line chart (one series per method, the input baseline dashed)
/// and an aligned plain-text table with one matrix per mean definition
/// (dB-domain mean, then linear-domain mean).
inline void emit_plot_data(const std::vector<ResultRecord>& records, const std::string& svg_path,
                           const std::string& table_path) {
  if (records.empty()) throw std::invalid_argument("emit_plot_data: no records");
  const std::vector<detail::Series> series = detail::group_records(records);

  double x_lo = records[0].snr_db, x_hi = records[0].snr_db;
  double y_lo = records[0].mean_sinr_db, y_hi = records[0].mean_sinr_db;
  for (const ResultRecord& r : records) {
    x_lo = std::min(x_lo, r.snr_db);
    x_hi = std::max(x_hi, r.snr_db);
    y_lo = std::min(y_lo, r.mean_sinr_db);
    y_hi = std::max(y_hi, r.mean_sinr_db);
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  const double y_pad = std::max(1.0, 0.05 * (y_hi - y_lo));
  y_lo -= y_pad;
  y_hi += y_pad;

  const double width = 860, height = 560;
  const double ml = 70, mr = 30, mt = 40, mb = 55;
  const double pw = width - ml - mr, ph = height - mt - mb;
  auto sx = [&](double v) { return ml + (v - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double v) { return mt + (y_hi - v) / (y_hi - y_lo) * ph; };

  std::ofstream svg(svg_path);
  if (!svg) throw std::invalid_argument("emit_plot_data: cannot open " + svg_path);
  char buf[256];
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2
      << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
         "Mean output SINR vs input SNR</text>\n";

  // axes and ticks
  svg << "<g stroke=\"#333\" stroke-width=\"1\" fill=\"none\">"
      << "<path d=\"M" << ml << " " << mt << " L" << ml << " " << mt + ph << " L" << ml + pw
      << " " << mt + ph << "\"/></g>\n";
  const int n_ticks = 7;
  svg << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333\">\n";
  for (int t = 0; t < n_ticks; ++t) {
    const double fx = x_lo + (x_hi - x_lo) * t / (n_ticks - 1);
    const double fy = y_lo + (y_hi - y_lo) * t / (n_ticks - 1);
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#333\"/>"
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.0f</text>\n",
                  sx(fx), mt + ph, sx(fx), mt + ph + 5, sx(fx), mt + ph + 20, fx);
    svg << buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#333\"/>"
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.1f</text>\n",
                  ml - 5, sy(fy), ml, sy(fy), ml - 9, sy(fy) + 4, fy);
    svg << buf;
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">input SNR (dB)</text>\n"
      << "<text x=\"18\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << mt + ph / 2 << ")\">mean output SINR (dB)</text>\n</g>\n";

  for (const detail::Series& s : series) {
    svg << "<polyline fill=\"none\" stroke=\"" << detail::series_color(s.name)
        << "\" stroke-width=\"2\"";
    if (s.name == kInputBaselineName) svg << " stroke-dasharray=\"6 4\"";
    svg << " points=\"";
    for (std::size_t k = 0; k < s.snr.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", sx(s.snr[k]), sy(s.mean[k]));
      svg << buf;
    }
    svg << "\"/>\n";
  }

  double ly = mt + 16;
  svg << "<g font-family=\"sans-serif\" font-size=\"13\">\n";
  for (const detail::Series& s : series) {
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\" "
                  "stroke-width=\"2\"%s/><text x=\"%.1f\" y=\"%.1f\">%s</text>\n",
                  ml + 12, ly - 4, ml + 44, ly - 4, detail::series_color(s.name),
                  s.name == kInputBaselineName ? " stroke-dasharray=\"6 4\"" : "", ml + 50, ly,
                  s.name.c_str());
    svg << buf;
    ly += 18;
  }
  svg << "</g>\n</svg>\n";
  if (!svg.good()) throw std::invalid_argument("emit_plot_data: write failed for " + svg_path);

  std::ofstream table(table_path);
  if (!table) throw std::invalid_argument("emit_plot_data: cannot open " + table_path);
  std::vector<double> snrs;
  for (const ResultRecord& r : records)
    if (std::find(snrs.begin(), snrs.end(), r.snr_db) == snrs.end()) snrs.push_back(r.snr_db);
  std::sort(snrs.begin(), snrs.end());

  const auto write_block = [&](const char* label,
                               const std::vector<double> detail::Series::*column) {
    table << "# " << label << "\n";
    std::snprintf(buf, sizeof(buf), "%12s", "snr_db");
    table << buf;
    for (const detail::Series& s : series) {
      std::snprintf(buf, sizeof(buf), " %14s", s.name.c_str());
      table << buf;
    }
    table << "\n";
    for (double snr : snrs) {
      std::snprintf(buf, sizeof(buf), "%12.3f", snr);
      table << buf;
      for (const detail::Series& s : series) {
        bool found = false;
        for (std::size_t k = 0; k < s.snr.size(); ++k) {
          if (s.snr[k] == snr) {
            std::snprintf(buf, sizeof(buf), " %14.3f", (s.*column)[k]);
            table << buf;
            found = true;
            break;
          }
        }
        if (!found) {
          std::snprintf(buf, sizeof(buf), " %14s", "-");
          table << buf;
        }
      }
      table << "\n";
    }
  };
  write_block("mean_sinr_db: mean of the per-trial SINR values in dB", &detail::Series::mean);
  table << "\n";
  write_block("mean_sinr_db_linear: dB of the mean per-trial linear SINR",
              &detail::Series::mean_linear);
  if (!table.good()) throw std::invalid_argument("emit_plot_data: write failed for " + table_path);
}

}  // namespace rr2d

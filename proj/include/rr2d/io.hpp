#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rr2d/array_model.hpp"
#include "rr2d/covariance_completion.hpp"
#include "rr2d/harness.hpp"

namespace rr2d {

inline MethodTag method_from_name(const std::string& name) {
  for (MethodTag tag : all_methods())
    if (method_name(tag) == name) return tag;
  throw std::invalid_argument("unknown method name: " + name);
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& known,
                                const std::string& context) {
  if (!j.is_object()) throw std::invalid_argument(context + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument(context + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& target, const std::string& context) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(context + ": bad value for '" + key + "': " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scenario files: a single generative setup with one SOI and equal-power
// interferers.

inline Scenario scenario_from_json(const nlohmann::json& j) {
  detail::reject_unknown_keys(j,
                              {"n_elements", "spacing", "soi_angle_deg", "snr_db",
                               "interferer_angles_deg", "inr_db", "seed"},
                              "scenario");
  int n_elements = 32;
  double spacing = 0.5, soi_angle_deg = 0.0, snr_db = 0.0, inr_db = 20.0;
  std::vector<double> interferer_angles;
  std::uint64_t seed = 0;
  detail::read_key(j, "n_elements", n_elements, "scenario");
  detail::read_key(j, "spacing", spacing, "scenario");
  detail::read_key(j, "soi_angle_deg", soi_angle_deg, "scenario");
  detail::read_key(j, "snr_db", snr_db, "scenario");
  detail::read_key(j, "interferer_angles_deg", interferer_angles, "scenario");
  detail::read_key(j, "inr_db", inr_db, "scenario");
  detail::read_key(j, "seed", seed, "scenario");

  Scenario scenario;
  scenario.geometry = {n_elements, spacing};
  scenario.noise_power = 1.0;
  scenario.seed = seed;
  scenario.soi = {soi_angle_deg, db_to_linear(snr_db), SourceKind::soi};
  for (double angle : interferer_angles)
    scenario.interferers.push_back({angle, db_to_linear(inr_db), SourceKind::interferer});
  scenario.validate();
  return scenario;
}

inline nlohmann::json scenario_to_json(const Scenario& scenario) {
  scenario.validate();
  nlohmann::json j;
  j["n_elements"] = scenario.geometry.n_elements;
  j["spacing"] = scenario.geometry.element_spacing;
  j["soi_angle_deg"] = scenario.soi.angle_deg;
  j["snr_db"] = linear_to_db(scenario.soi.power / scenario.noise_power);
  std::vector<double> angles;
  double inr_db = 20.0;
  for (std::size_t i = 0; i < scenario.interferers.size(); ++i) {
    const Source& s = scenario.interferers[i];
    const double db = linear_to_db(s.power / scenario.noise_power);
    if (i == 0)
      inr_db = db;
    else if (std::abs(db - inr_db) > 1e-9)
      throw std::invalid_argument(
          "scenario_to_json: file format carries a single inr_db; interferer powers differ");
    angles.push_back(s.angle_deg);
  }
  j["interferer_angles_deg"] = angles;
  j["inr_db"] = inr_db;
  j["seed"] = scenario.seed;
  return j;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_scenario: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("load_scenario: " + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

inline void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("save_scenario: cannot open " + path);
  out << scenario_to_json(scenario).dump(2) << "\n";
  if (!out.good()) throw std::invalid_argument("save_scenario: write failed for " + path);
}

// ---------------------------------------------------------------------------
// Experiment configuration files. Every key is optional and falls back to the
// built-in default; unknown keys are rejected.

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  detail::reject_unknown_keys(
      j,
      {"n_elements", "n_digital", "spacing", "snr_db_range", "inr_db", "n_interferers", "k_s",
       "n_trials", "methods", "seed", "toeplitz_projection", "covariance_includes_soi",
       "completion", "ascent"},
      "config");
  ExperimentConfig config;
  detail::read_key(j, "n_elements", config.n_elements, "config");
  detail::read_key(j, "n_digital", config.n_digital, "config");
  detail::read_key(j, "spacing", config.spacing, "config");
  detail::read_key(j, "inr_db", config.inr_db, "config");
  detail::read_key(j, "n_interferers", config.n_interferers, "config");
  detail::read_key(j, "k_s", config.k_s, "config");
  detail::read_key(j, "n_trials", config.n_trials, "config");
  detail::read_key(j, "seed", config.seed, "config");
  detail::read_key(j, "toeplitz_projection", config.toeplitz_projection, "config");
  detail::read_key(j, "covariance_includes_soi", config.covariance_includes_soi, "config");

  if (j.contains("snr_db_range")) {
    const nlohmann::json& r = j.at("snr_db_range");
    detail::reject_unknown_keys(r, {"start_db", "stop_db", "step_db"}, "config.snr_db_range");
    detail::read_key(r, "start_db", config.snr_db_range.start_db, "config.snr_db_range");
    detail::read_key(r, "stop_db", config.snr_db_range.stop_db, "config.snr_db_range");
    detail::read_key(r, "step_db", config.snr_db_range.step_db, "config.snr_db_range");
  }
  if (j.contains("methods")) {
    std::vector<std::string> names;
    detail::read_key(j, "methods", names, "config");
    config.methods.clear();
    for (const std::string& name : names) config.methods.push_back(method_from_name(name));
  }
  if (j.contains("completion")) {
    const nlohmann::json& c = j.at("completion");
    detail::reject_unknown_keys(
        c, {"fill_constant", "distance_epsilon", "reg_epsilon", "delta_tol", "max_iters"},
        "config.completion");
    detail::read_key(c, "fill_constant", config.completion.fill_constant, "config.completion");
    detail::read_key(c, "distance_epsilon", config.completion.distance_epsilon,
                     "config.completion");
    detail::read_key(c, "reg_epsilon", config.completion.reg_epsilon, "config.completion");
    detail::read_key(c, "delta_tol", config.completion.delta_tol, "config.completion");
    detail::read_key(c, "max_iters", config.completion.max_iters, "config.completion");
  }
  if (j.contains("ascent")) {
    const nlohmann::json& a = j.at("ascent");
    detail::reject_unknown_keys(a,
                                {"max_iters", "grad_tol", "initial_step", "backtrack_factor",
                                 "armijo_c", "restarts", "restart_seed"},
                                "config.ascent");
    detail::read_key(a, "max_iters", config.ascent.max_iters, "config.ascent");
    detail::read_key(a, "grad_tol", config.ascent.grad_tol, "config.ascent");
    detail::read_key(a, "initial_step", config.ascent.initial_step, "config.ascent");
    detail::read_key(a, "backtrack_factor", config.ascent.backtrack_factor, "config.ascent");
    detail::read_key(a, "armijo_c", config.ascent.armijo_c, "config.ascent");
    detail::read_key(a, "restarts", config.ascent.restarts, "config.ascent");
    detail::read_key(a, "restart_seed", config.ascent.restart_seed, "config.ascent");
  }
  config.validate();
  return config;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_experiment_config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("load_experiment_config: " + path + ": " + e.what());
  }
  return experiment_config_from_json(j);
}

// ---------------------------------------------------------------------------
// Masked-matrix text files: first a line with N, then N^2 lines of
// `i j re im observed_flag`. Lines starting with '#' are comments.

namespace detail {

inline void write_matrix_file(const Eigen::MatrixXcd& values,
                              const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& flags,
                              const std::string& path,
                              const std::vector<std::string>& report_lines) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("write_matrix_file: cannot open " + path);
  const Eigen::Index n = values.rows();
  out << n << "\n";
  char buf[128];
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      std::snprintf(buf, sizeof(buf), "%ld %ld %.17g %.17g %d\n", static_cast<long>(i),
                    static_cast<long>(j), values(i, j).real(), values(i, j).imag(),
                    flags(i, j) ? 1 : 0);
      out << buf;
    }
  }
  for (const std::string& line : report_lines) out << "# " << line << "\n";
  if (!out.good()) throw std::invalid_argument("write_matrix_file: write failed for " + path);
}

}  // namespace detail

inline void save_masked_matrix(const MaskedCovariance& inc, const std::string& path) {
  inc.validate();
  const Eigen::Index n = inc.values.rows();
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> flags(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) flags(i, j) = inc.mask.observed(i, j);
  detail::write_matrix_file(inc.values, flags, path, {});
}

/// Completed output: every entry carries a value, so all flags are 1; the
/// completion report is appended as comment lines.
inline void save_completed_matrix(const HermitianMatrix& completed, const CompletionReport& report,
                                  const std::string& path) {
  const Eigen::Index n = completed.size();
  std::vector<std::string> lines;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "iterations %d", report.iterations_run);
  lines.push_back(buf);
  std::snprintf(buf, sizeof(buf), "converged %d", report.converged ? 1 : 0);
  lines.push_back(buf);
  std::snprintf(buf, sizeof(buf), "final_relative_change %.9e", report.final_relative_change);
  lines.push_back(buf);
  std::snprintf(buf, sizeof(buf), "residual_psd_min_eig %.9e",
                report.constraint_residuals.psd_min_eig);
  lines.push_back(buf);
  std::snprintf(buf, sizeof(buf), "residual_toeplitz_rel %.9e",
                report.constraint_residuals.toeplitz_frobenius_rel);
  lines.push_back(buf);
  std::snprintf(buf, sizeof(buf), "residual_observed_rel %.9e",
                report.constraint_residuals.observed_frobenius_rel);
  lines.push_back(buf);
  detail::write_matrix_file(completed.matrix(),
                            Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, true),
                            path, lines);
}

inline MaskedCovariance load_masked_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_masked_matrix: cannot open " + path);

  auto next_data_line = [&](std::string& line) {
    while (std::getline(in, line)) {
      std::size_t start = line.find_first_not_of(" \t\r");
      if (start == std::string::npos || line[start] == '#') continue;
      return true;
    }
    return false;
  };

  std::string line;
  if (!next_data_line(line))
    throw std::invalid_argument("load_masked_matrix: " + path + ": missing size line");
  long n = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> n) || n < 1)
      throw std::invalid_argument("load_masked_matrix: " + path + ": bad size line");
  }

  Eigen::MatrixXcd values = Eigen::MatrixXcd::Zero(n, n);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> flags =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);

  for (long entry = 0; entry < n * n; ++entry) {
    if (!next_data_line(line))
      throw std::invalid_argument("load_masked_matrix: " + path + ": expected " +
                                  std::to_string(n * n) + " entries");
    std::istringstream ss(line);
    long i = 0, j = 0;
    double re = 0.0, im = 0.0;
    int flag = 0;
    if (!(ss >> i >> j >> re >> im >> flag) || i < 0 || i >= n || j < 0 || j >= n ||
        (flag != 0 && flag != 1))
      throw std::invalid_argument("load_masked_matrix: " + path + ": bad entry line: " + line);
    if (seen(i, j))
      throw std::invalid_argument("load_masked_matrix: " + path + ": duplicate entry (" +
                                  std::to_string(i) + ", " + std::to_string(j) + ")");
    seen(i, j) = true;
    values(i, j) = cxd(re, im);
    flags(i, j) = flag == 1;
  }

  double scale = 0.0;
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) scale = std::max(scale, std::abs(values(i, j)));
  const double tol = 1e-6 * std::max(scale, 1.0);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) {
      if (flags(i, j) != flags(j, i))
        throw std::invalid_argument("load_masked_matrix: " + path + ": asymmetric mask at (" +
                                    std::to_string(i) + ", " + std::to_string(j) + ")");
      if (!flags(i, j) && std::abs(values(i, j)) != 0.0)
        throw std::invalid_argument("load_masked_matrix: " + path +
                                    ": unobserved entries must be zero");
      if (j >= i && std::abs(values(i, j) - std::conj(values(j, i))) > tol)
        throw std::invalid_argument("load_masked_matrix: " + path +
                                    ": matrix is not Hermitian at (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ")");
    }
  }
  // exact symmetrization after the tolerance check
  for (long i = 0; i < n; ++i) {
    values(i, i) = cxd(values(i, i).real(), 0.0);
    for (long j = i + 1; j < n; ++j) {
      const cxd avg = 0.5 * (values(i, j) + std::conj(values(j, i)));
      values(i, j) = avg;
      values(j, i) = std::conj(avg);
    }
  }

  MaskedCovariance out;
  out.values = std::move(values);
  out.mask = ObservationMask(std::move(flags));
  out.samples_per_entry = Eigen::MatrixXi::Zero(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) out.samples_per_entry(i, j) = out.mask.observed(i, j) ? 1 : 0;
  out.validate();
  return out;
}

}  // namespace rr2d

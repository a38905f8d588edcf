#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rr2d/common.hpp"

namespace rr2d {

// Uniform linear array. Spacing is a multiple of the carrier wavelength.
struct ArrayGeometry {
  int n_elements = 1;
  double element_spacing = 0.5;

  void validate() const {
    if (n_elements < 1) throw std::invalid_argument("ArrayGeometry: n_elements must be >= 1");
    if (!(element_spacing > 0.0))
      throw std::invalid_argument("ArrayGeometry: element_spacing must be > 0");
  }
};

enum class SourceKind { soi, interferer };

// Point source with power relative to unit per-element noise.
struct Source {
  double angle_deg = 0.0;
  double power = 1.0;
  SourceKind kind = SourceKind::interferer;

  void validate() const {
    if (!(power > 0.0)) throw std::invalid_argument("Source: power must be > 0");
    if (angle_deg < -90.0 || angle_deg > 90.0)
      throw std::invalid_argument("Source: angle must lie in [-90, 90] degrees");
  }
};

// Generative ground truth: geometry, one SOI, interferers, unit-scale noise.
struct Scenario {
  ArrayGeometry geometry;
  Source soi;
  std::vector<Source> interferers;
  double noise_power = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    geometry.validate();
    soi.validate();
    if (soi.kind != SourceKind::soi) throw std::invalid_argument("Scenario: soi.kind must be soi");
    if (!(noise_power > 0.0)) throw std::invalid_argument("Scenario: noise_power must be > 0");
    for (const Source& s : interferers) {
      s.validate();
      if (s.kind != SourceKind::interferer)
        throw std::invalid_argument("Scenario: interferer entries must have kind interferer");
    }
  }
};

// One column per temporal snapshot.
struct SnapshotBlock {
  Eigen::MatrixXcd samples;
  bool includes_soi = false;

  int n_snapshots() const { return static_cast<int>(samples.cols()); }
};

/// Complex square matrix that is conjugate-symmetric to within a relative
/// Frobenius tolerance at construction; stored exactly Hermitianized.
class HermitianMatrix {
 public:
  static constexpr double kSymmetryTol = 1e-12;

  HermitianMatrix() = default;

  explicit HermitianMatrix(Eigen::MatrixXcd m, double tol = kSymmetryTol) {
    if (m.rows() != m.cols())
      throw std::invalid_argument("HermitianMatrix: matrix must be square");
    const double scale = std::max(1.0, m.norm());
    const double asym = (m - m.adjoint()).norm();
    if (!(asym <= tol * scale))
      throw std::invalid_argument("HermitianMatrix: input is not Hermitian within tolerance");
    m_ = 0.5 * (m + m.adjoint().eval());
  }

  const Eigen::MatrixXcd& matrix() const { return m_; }
  Eigen::Index size() const { return m_.rows(); }

  double trace_real() const { return m_.trace().real(); }

  Eigen::VectorXd eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw numeric_error("HermitianMatrix: eigendecomposition failed");
    return es.eigenvalues();
  }

  double min_eigenvalue() const { return eigenvalues()(0); }

  bool is_psd(double tol_scale = 1e-10) const {
    return min_eigenvalue() >= -tol_scale * std::max(1.0, std::abs(trace_real()));
  }

  // Constant along every diagonal, main diagonal real.
  bool is_toeplitz(double tol = 1e-10) const {
    const Eigen::Index n = m_.rows();
    const double scale = std::max(1.0, m_.norm());
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index i = 1; i + k < n; ++i) {
        if (std::abs(m_(i, i + k) - m_(0, k)) > tol * scale) return false;
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(m_(i, i).imag()) > tol * scale) return false;
    }
    return true;
  }

 private:
  Eigen::MatrixXcd m_;
};

/// Steering vector for a ULA: entry n is exp(+j 2 pi d n sin(theta)).
inline Eigen::VectorXcd steering_vector(const ArrayGeometry& geometry, double angle_deg) {
  geometry.validate();
  if (angle_deg < -90.0 || angle_deg > 90.0)
    throw std::invalid_argument("steering_vector: angle must lie in [-90, 90] degrees");
  const double phase_step =
      2.0 * std::numbers::pi * geometry.element_spacing * std::sin(deg_to_rad(angle_deg));
  Eigen::VectorXcd a(geometry.n_elements);
  for (int n = 0; n < geometry.n_elements; ++n) {
    a(n) = std::polar(1.0, phase_step * static_cast<double>(n));
  }
  return a;
}

/// Exact second-order statistics of the received ensemble:
/// R = [soi] p_s a_s a_s^H + sum_i p_i a_i a_i^H + noise_power I.
inline HermitianMatrix analytical_covariance(const Scenario& scenario, bool include_soi) {
  scenario.validate();
  const int n = scenario.geometry.n_elements;
  Eigen::MatrixXcd r = scenario.noise_power * Eigen::MatrixXcd::Identity(n, n);
  auto add_source = [&](const Source& s) {
    const Eigen::VectorXcd a = steering_vector(scenario.geometry, s.angle_deg);
    r.noalias() += s.power * (a * a.adjoint());
  };
  if (include_soi) add_source(scenario.soi);
  for (const Source& s : scenario.interferers) add_source(s);
  return HermitianMatrix(std::move(r));
}

/// Draws K snapshots x[k] = sum_src a(theta) g + n with g ~ CN(0, power) and
/// n elementwise CN(0, noise_power). Deterministic for a fixed rng state; the
/// include_soi=false path models SOI-free pre-filtered data.
inline SnapshotBlock generate_snapshots(const Scenario& scenario, int n_snapshots,
                                        bool include_soi, std::mt19937_64& rng) {
  scenario.validate();
  if (n_snapshots < 1) throw std::invalid_argument("generate_snapshots: need at least 1 snapshot");
  const int n = scenario.geometry.n_elements;

  std::normal_distribution<double> unit_normal(0.0, 1.0);
  auto draw_cn = [&](double power) {
    const double s = std::sqrt(0.5 * power);
    const double re = unit_normal(rng);
    const double im = unit_normal(rng);
    return cxd(s * re, s * im);
  };

  std::vector<std::pair<Eigen::VectorXcd, double>> sources;
  if (include_soi)
    sources.emplace_back(steering_vector(scenario.geometry, scenario.soi.angle_deg),
                         scenario.soi.power);
  for (const Source& s : scenario.interferers)
    sources.emplace_back(steering_vector(scenario.geometry, s.angle_deg), s.power);

  SnapshotBlock block;
  block.includes_soi = include_soi;
  block.samples.resize(n, n_snapshots);
  for (int k = 0; k < n_snapshots; ++k) {
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
    for (const auto& [a, power] : sources) x += a * draw_cn(power);
    for (int e = 0; e < n; ++e) x(e) += draw_cn(scenario.noise_power);
    block.samples.col(k) = x;
  }
  return block;
}

/// SCM estimate (1/K) X X^H.
inline HermitianMatrix sample_covariance(const SnapshotBlock& block) {
  if (block.samples.cols() < 1)
    throw std::invalid_argument("sample_covariance: need at least 1 snapshot");
  const double k = static_cast<double>(block.samples.cols());
  Eigen::MatrixXcd r = (block.samples * block.samples.adjoint()) / k;
  return HermitianMatrix(std::move(r));
}

}  // namespace rr2d

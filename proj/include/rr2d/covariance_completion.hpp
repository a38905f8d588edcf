#pragma once

#include <cmath>
#include <cstdlib>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rr2d/array_model.hpp"
#include "rr2d/common.hpp"
#include "rr2d/hybrid_architecture.hpp"

namespace rr2d {

/// Symmetric boolean mask of which covariance entries were measured. The
/// diagonal is always observed; under sub-array switching the off-diagonal
/// observed set is exactly the cross-sub-array pairs.
class ObservationMask {
 public:
  ObservationMask() = default;

  explicit ObservationMask(Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> observed)
      : observed_(std::move(observed)) {
    if (observed_.rows() != observed_.cols())
      throw std::invalid_argument("ObservationMask: mask must be square");
    for (Eigen::Index i = 0; i < observed_.rows(); ++i) {
      if (!observed_(i, i))
        throw std::invalid_argument("ObservationMask: all diagonal entries must be observed");
      for (Eigen::Index j = 0; j < i; ++j) {
        if (observed_(i, j) != observed_(j, i))
          throw std::invalid_argument("ObservationMask: mask must be symmetric");
      }
    }
  }

  /// Mask induced by one-active-element-per-sub-array switching: (i, j) is
  /// observed iff i == j or i and j lie in different sub-arrays.
  static ObservationMask for_partition(const SubArrayPartition& partition) {
    partition.validate();
    const int n = partition.n_total();
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> observed(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        observed(i, j) = (i == j) || (partition.subarray_of(i) != partition.subarray_of(j));
      }
    }
    return ObservationMask(std::move(observed));
  }

  bool observed(Eigen::Index i, Eigen::Index j) const { return observed_(i, j); }
  Eigen::Index size() const { return observed_.rows(); }

  Eigen::Index observed_count() const {
    Eigen::Index c = 0;
    for (Eigen::Index i = 0; i < size(); ++i)
      for (Eigen::Index j = 0; j < size(); ++j)
        if (observed_(i, j)) ++c;
    return c;
  }

  bool operator==(const ObservationMask& other) const {
    return observed_.rows() == other.observed_.rows() && observed_ == other.observed_;
  }

 private:
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> observed_;
};

/// Partially observed SCM: measured entries plus per-entry accumulation
/// counts; unobserved entries are exactly zero.
struct MaskedCovariance {
  Eigen::MatrixXcd values;
  ObservationMask mask;
  Eigen::MatrixXi samples_per_entry;

  Eigen::Index size() const { return values.rows(); }

  void validate() const {
    if (values.rows() != values.cols())
      throw std::invalid_argument("MaskedCovariance: values must be square");
    if (values.rows() != mask.size())
      throw std::invalid_argument("MaskedCovariance: values/mask size mismatch");
    if (samples_per_entry.rows() != values.rows() || samples_per_entry.cols() != values.cols())
      throw std::invalid_argument("MaskedCovariance: counts size mismatch");
    const double scale = std::max(1.0, values.norm());
    for (Eigen::Index i = 0; i < size(); ++i) {
      for (Eigen::Index j = 0; j < size(); ++j) {
        if (!mask.observed(i, j)) {
          if (values(i, j) != cxd(0.0, 0.0))
            throw std::invalid_argument("MaskedCovariance: unobserved entries must be zero");
        } else if (std::abs(values(i, j) - std::conj(values(j, i))) > 1e-9 * scale) {
          throw std::invalid_argument("MaskedCovariance: values must be Hermitian on the mask");
        }
      }
    }
  }
};

struct CompletionConfig {
  double fill_constant = 0.01;   // fallback for lags with no observed entry
  double distance_epsilon = 1e-6;
  double reg_epsilon = 0.0;      // diagonal loading; <= 0 selects 1e-6 * trace / N
  double delta_tol = 1e-6;
  int max_iters = 500;
  bool toeplitz_projection = true;  // ablation switch

  void validate() const {
    if (!(fill_constant > 0.0) || !(distance_epsilon > 0.0) || !(delta_tol > 0.0))
      throw std::invalid_argument("CompletionConfig: constants must be positive");
    if (max_iters < 1) throw std::invalid_argument("CompletionConfig: max_iters must be >= 1");
  }

  double effective_reg(double trace, Eigen::Index n) const {
    if (reg_epsilon > 0.0) return reg_epsilon;
    return 1e-6 * std::abs(trace) / static_cast<double>(std::max<Eigen::Index>(n, 1));
  }
};

struct ConstraintResiduals {
  double psd_min_eig = 0.0;
  double toeplitz_frobenius_rel = 0.0;
  double observed_frobenius_rel = 0.0;
};

struct CompletionReport {
  int iterations_run = 0;
  bool converged = false;
  double final_relative_change = 0.0;
  ConstraintResiduals constraint_residuals;
};

/// Accumulates active-element outer products from one snapshot block per
/// configuration into the partially observed SCM. Each entry is divided by
/// its accumulation count; the mask marks exactly the accumulated entries.
inline MaskedCovariance assemble_incomplete_scm(const SwitchSchedule& schedule,
                                                const std::vector<SnapshotBlock>& per_config) {
  schedule.partition.validate();
  if (per_config.size() != schedule.configs.size())
    throw std::invalid_argument("assemble_incomplete_scm: one snapshot block per configuration required");
  const int n = schedule.partition.n_total();
  const int n_digital = schedule.partition.n_digital;

  Eigen::MatrixXcd sums = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(n, n);
  for (std::size_t c = 0; c < schedule.configs.size(); ++c) {
    const SwitchConfiguration& config = schedule.configs[c];
    const Eigen::MatrixXcd& x = per_config[c].samples;
    if (x.rows() != n_digital || x.cols() != schedule.snapshots_per_config)
      throw std::invalid_argument("assemble_incomplete_scm: block shape must be N_D x K_S");
    for (int k = 0; k < x.cols(); ++k) {
      for (int d = 0; d < n_digital; ++d) {
        for (int e = 0; e < n_digital; ++e) {
          sums(config.active[d], config.active[e]) += x(d, k) * std::conj(x(e, k));
          counts(config.active[d], config.active[e]) += 1;
        }
      }
    }
  }

  MaskedCovariance out;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> observed(n, n);
  out.values = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      observed(i, j) = counts(i, j) > 0;
      if (counts(i, j) > 0) out.values(i, j) = sums(i, j) / static_cast<double>(counts(i, j));
    }
  }
  out.mask = ObservationMask(std::move(observed));
  out.samples_per_entry = std::move(counts);
  out.validate();
  return out;
}

namespace detail {

/// Hermitianize, clamp negative eigenvalues to zero, add reg * I.
inline Eigen::MatrixXcd project_psd_impl(const Eigen::MatrixXcd& m, double reg_epsilon) {
  Eigen::MatrixXcd herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  if (es.info() != Eigen::Success) throw numeric_error("project_psd: eigendecomposition failed");
  Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXcd out =
      es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().adjoint();
  out = 0.5 * (out + out.adjoint().eval());
  if (reg_epsilon != 0.0)
    out += reg_epsilon * Eigen::MatrixXcd::Identity(m.rows(), m.cols());
  return out;
}

/// Average each diagonal together with the conjugate of its mirror; the main
/// diagonal comes out real.
inline Eigen::MatrixXcd project_toeplitz_impl(const Eigen::MatrixXcd& m) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXcd out(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    cxd acc(0.0, 0.0);
    for (Eigen::Index i = 0; i + k < n; ++i) acc += m(i, i + k) + std::conj(m(i + k, i));
    cxd c = acc / static_cast<double>(2 * (n - k));
    if (k == 0) c = cxd(c.real(), 0.0);
    for (Eigen::Index i = 0; i + k < n; ++i) {
      out(i, i + k) = c;
      out(i + k, i) = std::conj(c);
    }
  }
  return out;
}

}  // namespace detail

/// Nearest PSD matrix in Frobenius norm (spectral clamp), plus optional
/// diagonal loading.
inline HermitianMatrix project_psd(const Eigen::MatrixXcd& m, double reg_epsilon) {
  if (m.rows() != m.cols()) throw std::invalid_argument("project_psd: matrix must be square");
  return HermitianMatrix(detail::project_psd_impl(m, reg_epsilon), 1e-9);
}

/// Orthogonal projection onto the Hermitian Toeplitz subspace.
inline HermitianMatrix project_toeplitz(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("project_toeplitz: matrix must be square");
  return HermitianMatrix(detail::project_toeplitz_impl(m), 1e-9);
}

/// Reasserts the measured entries; everything off the mask passes through.
inline Eigen::MatrixXcd project_observed(const Eigen::MatrixXcd& m, const MaskedCovariance& inc) {
  if (m.rows() != inc.size() || m.cols() != inc.size())
    throw std::invalid_argument("project_observed: dimension mismatch");
  Eigen::MatrixXcd out = m;
  for (Eigen::Index i = 0; i < inc.size(); ++i)
    for (Eigen::Index j = 0; j < inc.size(); ++j)
      if (inc.mask.observed(i, j)) out(i, j) = inc.values(i, j);
  return out;
}

/// Distance-weighted Toeplitz-consistent fill of the missing entries:
/// observed entries are copied verbatim, each missing (i, j) becomes a
/// weighted average of observed entries at the same separation |i-j| with
/// weights 1/(distance + eps), and the result is Hermitian-averaged.
inline HermitianMatrix toeplitz_initialize(const MaskedCovariance& inc,
                                           const CompletionConfig& cfg) {
  inc.validate();
  cfg.validate();
  const Eigen::Index n = inc.size();

  // donors grouped by signed lag q - p, so conjugate-mirror entries never mix
  std::vector<std::vector<std::pair<Eigen::Index, Eigen::Index>>> by_lag(2 * n - 1);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q < n; ++q)
      if (inc.mask.observed(p, q)) by_lag[q - p + n - 1].emplace_back(p, q);

  Eigen::MatrixXcd filled = inc.values;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (inc.mask.observed(i, j)) continue;
      const auto& same_lag = by_lag[j - i + n - 1];
      if (same_lag.empty()) {
        filled(i, j) = cxd(cfg.fill_constant, 0.0);
        continue;
      }
      cxd acc(0.0, 0.0);
      double weight_sum = 0.0;
      for (const auto& [p, q] : same_lag) {
        const double di = static_cast<double>(i - p);
        const double dj = static_cast<double>(j - q);
        const double w = 1.0 / (std::sqrt(di * di + dj * dj) + cfg.distance_epsilon);
        acc += w * inc.values(p, q);
        weight_sum += w;
      }
      filled(i, j) = acc / weight_sum;
    }
  }
  Eigen::MatrixXcd sym = 0.5 * (filled + filled.adjoint().eval());
  return HermitianMatrix(std::move(sym), 1e-9);
}

/// Dykstra's alternating projections onto {PSD} -> {Hermitian Toeplitz} ->
/// {observed entries fixed}, each set carrying its own correction term,
/// started from the Toeplitz-consistent fill. Stops when the relative
/// Frobenius change across a full sweep drops below delta_tol.
///
/// Under finite sampling the three sets rarely intersect, so the cycle
/// converges to a compromise in which each phase point satisfies only its own
/// constraint. The returned matrix is the structural phase point -- the
/// iterate right after the Toeplitz step (after the PSD step when the
/// Toeplitz projection is disabled) -- with one final PSD projection plus
/// diagonal loading so downstream solvers see a strictly positive definite
/// result. Measurement consistency is then held in the least-squares sense
/// reported by the observed residual: re-fixing the raw entries verbatim
/// would re-inject their sampling noise into an otherwise structured
/// estimate, and with only k_s snapshots behind each cross-sub-array entry
/// that noise dominates everything the structure recovered.
inline std::pair<HermitianMatrix, CompletionReport> dykstra_complete(const MaskedCovariance& inc,
                                                                     const CompletionConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = inc.size();
  const double reg = cfg.effective_reg(inc.values.trace().real(), n);
  if (!std::isfinite(reg))
    throw numeric_error("dykstra_complete: regularization overflowed");

  Eigen::MatrixXcd x = toeplitz_initialize(inc, cfg).matrix();
  if (!all_finite(x)) throw numeric_error("dykstra_complete: initialization is not finite");
  Eigen::MatrixXcd corr_psd = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd corr_toeplitz = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd corr_observed = Eigen::MatrixXcd::Zero(n, n);

  CompletionReport report;
  Eigen::MatrixXcd prev = x;
  Eigen::MatrixXcd structural = x;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    Eigen::MatrixXcd y = detail::project_psd_impl(x + corr_psd, reg);
    corr_psd += x - y;
    x = std::move(y);

    if (cfg.toeplitz_projection) {
      y = detail::project_toeplitz_impl(x + corr_toeplitz);
      corr_toeplitz += x - y;
      x = std::move(y);
    }
    structural = x;

    y = project_observed(x + corr_observed, inc);
    corr_observed += x - y;
    x = std::move(y);

    if (!all_finite(x)) throw numeric_error("dykstra_complete: iterate is not finite");

    report.iterations_run = iter + 1;
    report.final_relative_change = (x - prev).norm() / std::max(prev.norm(), 1e-300);
    prev = x;
    if (report.final_relative_change < cfg.delta_tol) {
      report.converged = true;
      break;
    }
  }

  Eigen::MatrixXcd final_m = detail::project_psd_impl(structural, reg);
  if (!all_finite(final_m))
    throw numeric_error("dykstra_complete: final projection is not finite");
  HermitianMatrix completed(std::move(final_m), 1e-9);
  const Eigen::MatrixXcd& r = completed.matrix();

  report.constraint_residuals.psd_min_eig = completed.min_eigenvalue();
  report.constraint_residuals.toeplitz_frobenius_rel =
      (r - detail::project_toeplitz_impl(r)).norm() / std::max(r.norm(), 1e-300);
  double observed_diff = 0.0;
  double observed_ref = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!inc.mask.observed(i, j)) continue;
      observed_diff += std::norm(r(i, j) - inc.values(i, j));
      observed_ref += std::norm(inc.values(i, j));
    }
  }
  report.constraint_residuals.observed_frobenius_rel =
      std::sqrt(observed_diff) / std::max(std::sqrt(observed_ref), 1e-300);
  return {std::move(completed), report};
}

}  // namespace rr2d

#pragma once

#include <string>

#include <Eigen/Dense>

#include "rr2d/array_model.hpp"
#include "rr2d/circle_manifold.hpp"
#include "rr2d/common.hpp"
#include "rr2d/hybrid_architecture.hpp"

namespace rr2d {

enum class MethodTag {
  D_MVDR,      // fully digital, analytical interference-plus-noise covariance
  D_SMI,       // fully digital, sample covariance
  H_MVDR_ACM,  // hybrid, analytical covariance
  H_SMI_SCM,   // hybrid, incomplete sample covariance used as-is
  H_SMI_RR2D,  // hybrid, completed sample covariance
  PDBF_MVDR,   // partial DBF: one element per sub-array
};

inline std::string method_name(MethodTag tag) {
  switch (tag) {
    case MethodTag::D_MVDR: return "D_MVDR";
    case MethodTag::D_SMI: return "D_SMI";
    case MethodTag::H_MVDR_ACM: return "H_MVDR_ACM";
    case MethodTag::H_SMI_SCM: return "H_SMI_SCM";
    case MethodTag::H_SMI_RR2D: return "H_SMI_RR2D";
    case MethodTag::PDBF_MVDR: return "PDBF_MVDR";
  }
  throw std::invalid_argument("method_name: unknown tag");
}

struct BeamformerDiagnostics {
  double manifold_objective = 0.0;
  double distortionless_error = 0.0;
};

struct BeamformerResult {
  Eigen::VectorXcd effective_weights;  // full-array composite weights
  MethodTag method_tag = MethodTag::D_MVDR;
  BeamformerDiagnostics diagnostics;
};

/// Minimum-variance distortionless-response weights R^-1 a / (a^H R^-1 a).
inline Eigen::VectorXcd mvdr_weights(const HermitianMatrix& r, const Eigen::VectorXcd& a) {
  if (r.size() != a.size()) throw std::invalid_argument("mvdr_weights: dimension mismatch");
  const double min_eig = r.min_eigenvalue();
  const double scale = std::max(1.0, std::abs(r.trace_real())) / static_cast<double>(r.size());
  if (min_eig <= 1e-12 * scale)
    throw numeric_error("mvdr_weights: covariance nearly singular; apply diagonal loading upstream");
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(r.matrix());
  if (ldlt.info() != Eigen::Success)
    throw numeric_error("mvdr_weights: factorization failed");
  const Eigen::VectorXcd x = ldlt.solve(a);
  const cxd denom = (a.adjoint() * x)(0);
  if (!(std::abs(denom) > 0.0) || !std::isfinite(std::abs(denom)))
    throw numeric_error("mvdr_weights: degenerate normalization a^H R^-1 a");
  return x / denom;
}

/// Digital-stage MVDR behind fixed analog weights: the reduced problem uses
/// W_A R W_A^H and the reduced steering vector W_A a.
inline Eigen::VectorXcd hybrid_digital_weights_closed_form(const AnalogWeights& w_a,
                                                           const HermitianMatrix& r,
                                                           const Eigen::VectorXcd& a) {
  const Eigen::MatrixXcd wa = block_diagonal(w_a);
  if (wa.cols() != a.size())
    throw std::invalid_argument("hybrid_digital_weights_closed_form: dimension mismatch");
  return mvdr_weights(digital_covariance(wa, r), wa * a);
}

/// Least-squares digital match to a target full-array weight vector:
/// w_D = (1/N_S) W_A w0, the minimizer of ||w0 - W_A^H w_D||.
inline Eigen::VectorXcd hybrid_digital_weights_mse(const AnalogWeights& w_a,
                                                   const Eigen::VectorXcd& w0,
                                                   const SubArrayPartition& partition) {
  const Eigen::MatrixXcd wa = block_diagonal(w_a);
  if (wa.cols() != w0.size())
    throw std::invalid_argument("hybrid_digital_weights_mse: dimension mismatch");
  return (wa * w0) / static_cast<double>(partition.n_per_subarray);
}

/// Row-block matrix B built from the target weights: row d carries the
/// conjugated sub-array-d entries of w0 in their global columns, so that
/// B w_flat = W_A(w_flat) w0 for any flat analog vector.
inline Eigen::MatrixXcd build_w0_blocks(const Eigen::VectorXcd& w0,
                                        const SubArrayPartition& partition) {
  if (w0.size() != partition.n_total())
    throw std::invalid_argument("build_w0_blocks: dimension mismatch");
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(partition.n_digital, partition.n_total());
  for (int e = 0; e < partition.n_total(); ++e) b(partition.subarray_of(e), e) = w0(e);
  return b;
}

/// Hybrid MVDR: target weights w0 from the source covariance, analog phases by
/// Riemannian ascent of the matched-energy quadratic, digital stage by the
/// reduced-space distortionless solution behind the fixed analog combiner,
/// then a final rescale guarding w^H a = 1 against roundoff.
inline BeamformerResult hybrid_mvdr(const HermitianMatrix& r_source, const Eigen::VectorXcd& a,
                                    const SubArrayPartition& partition, const AscentOptions& opts,
                                    MethodTag tag) {
  if (r_source.size() != partition.n_total() || a.size() != partition.n_total())
    throw std::invalid_argument("hybrid_mvdr: dimension mismatch");
  const Eigen::VectorXcd w0 = mvdr_weights(r_source, a);

  const Eigen::MatrixXcd b = build_w0_blocks(w0, partition);
  const HermitianMatrix q(b.adjoint() * b, 1e-9);

  // Warm start at the per-entry phase conjugate of w0; zero entries fall back
  // to 1. Separability over sub-arrays makes this the analytic maximizer, so
  // the ascent mostly just polishes it.
  Eigen::VectorXcd warm(w0.size());
  for (Eigen::Index k = 0; k < w0.size(); ++k) {
    const double mag = std::abs(w0(k));
    warm(k) = mag > 0.0 ? std::conj(w0(k)) / mag : cxd(1.0, 0.0);
  }
  const AscentResult ascent = maximize_quadratic_on_circle(q, PhaseVector(warm), opts);

  const AnalogWeights analog = AnalogWeights::from_flat(ascent.maximizer.entries(), partition);
  const Eigen::MatrixXcd wa = block_diagonal(analog);
  Eigen::VectorXcd w_d = hybrid_digital_weights_closed_form(analog, r_source, a);

  const cxd gain = (w_d.adjoint() * (wa * a))(0);
  if (!(std::abs(gain) > 0.0) || !std::isfinite(std::abs(gain)))
    throw numeric_error("hybrid_mvdr: degenerate look-direction response");
  w_d /= std::conj(gain);

  BeamformerResult result;
  result.effective_weights = effective_full_weights(wa, w_d);
  result.method_tag = tag;
  result.diagnostics.manifold_objective = ascent.objective;
  result.diagnostics.distortionless_error =
      std::abs((result.effective_weights.adjoint() * a)(0) - cxd(1.0, 0.0));
  return result;
}

/// Partial DBF baseline: only the first element of each sub-array is used, an
/// N_D-element MVDR runs on the reduced array, and the weights embed back into
/// the full aperture with zeros elsewhere.
inline BeamformerResult pdbf_mvdr(const HermitianMatrix& r, const Eigen::VectorXcd& a,
                                  const SubArrayPartition& partition) {
  if (r.size() != partition.n_total() || a.size() != partition.n_total())
    throw std::invalid_argument("pdbf_mvdr: dimension mismatch");
  std::vector<int> picks(partition.n_digital);
  for (int d = 0; d < partition.n_digital; ++d) picks[d] = partition.first_element(d);

  Eigen::MatrixXcd r_red(partition.n_digital, partition.n_digital);
  Eigen::VectorXcd a_red(partition.n_digital);
  for (int i = 0; i < partition.n_digital; ++i) {
    a_red(i) = a(picks[i]);
    for (int j = 0; j < partition.n_digital; ++j) r_red(i, j) = r.matrix()(picks[i], picks[j]);
  }
  const Eigen::VectorXcd w_red = mvdr_weights(HermitianMatrix(r_red, 1e-9), a_red);

  BeamformerResult result;
  result.effective_weights = Eigen::VectorXcd::Zero(partition.n_total());
  for (int i = 0; i < partition.n_digital; ++i) result.effective_weights(picks[i]) = w_red(i);
  result.method_tag = MethodTag::PDBF_MVDR;
  result.diagnostics.distortionless_error =
      std::abs((result.effective_weights.adjoint() * a)(0) - cxd(1.0, 0.0));
  return result;
}

/// Output SINR in dB of composite weights against the true signal and
/// interference-plus-noise covariances.
inline double output_sinr_db(const Eigen::VectorXcd& w_eff, const HermitianMatrix& r_signal,
                             const HermitianMatrix& r_in) {
  if (w_eff.size() != r_signal.size() || w_eff.size() != r_in.size())
    throw std::invalid_argument("output_sinr_db: dimension mismatch");
  const double num = (w_eff.adjoint() * r_signal.matrix() * w_eff)(0).real();
  const double den = (w_eff.adjoint() * r_in.matrix() * w_eff)(0).real();
  if (!(den > 0.0)) throw numeric_error("output_sinr_db: nonpositive interference-plus-noise power");
  return linear_to_db(num / den);
}

}  // namespace rr2d

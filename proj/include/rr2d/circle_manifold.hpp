#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "rr2d/array_model.hpp"
#include "rr2d/common.hpp"

namespace rr2d {

/// Point on the complex circle manifold: every entry has unit modulus.
class PhaseVector {
 public:
  static constexpr double kModulusTol = 1e-10;

  PhaseVector() = default;

  explicit PhaseVector(Eigen::VectorXcd entries) : entries_(std::move(entries)) {
    for (Eigen::Index k = 0; k < entries_.size(); ++k) {
      if (std::abs(std::abs(entries_(k)) - 1.0) > kModulusTol)
        throw std::invalid_argument("PhaseVector: entries must be unit modulus");
    }
  }

  static PhaseVector from_phases(const Eigen::VectorXd& phases) {
    Eigen::VectorXcd v(phases.size());
    for (Eigen::Index k = 0; k < phases.size(); ++k) v(k) = std::polar(1.0, phases(k));
    return PhaseVector(std::move(v));
  }

  /// Entrywise radial projection onto the manifold; zero entries map to 1.
  static PhaseVector project(const Eigen::VectorXcd& v) {
    Eigen::VectorXcd out(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      const double mag = std::abs(v(k));
      out(k) = mag > 0.0 ? v(k) / mag : cxd(1.0, 0.0);
    }
    return PhaseVector(std::move(out));
  }

  const Eigen::VectorXcd& entries() const { return entries_; }
  Eigen::Index size() const { return entries_.size(); }

 private:
  Eigen::VectorXcd entries_;
};

struct AscentOptions {
  int max_iters = 200;
  double grad_tol = 1e-8;
  double initial_step = 1.0;
  double backtrack_factor = 0.5;
  // Sufficient-increase fraction. Values near 1e-4 accept overshooting steps
  // that bounce across the peak with microscopic net gain; 0.1 forces the
  // backtracker down to a properly scaled step.
  double armijo_c = 0.1;
  int restarts = 1;
  std::uint64_t restart_seed = 0x5eedULL;

  void validate() const {
    if (max_iters < 1 || restarts < 1)
      throw std::invalid_argument("AscentOptions: max_iters and restarts must be >= 1");
    if (!(grad_tol > 0.0) || !(initial_step > 0.0) || !(armijo_c > 0.0))
      throw std::invalid_argument("AscentOptions: tolerances and steps must be positive");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
      throw std::invalid_argument("AscentOptions: backtrack_factor must lie in (0, 1)");
  }
};

inline double circle_objective(const HermitianMatrix& q, const PhaseVector& w) {
  return (w.entries().adjoint() * q.matrix() * w.entries())(0).real();
}

/// Euclidean gradient 2 Q w projected onto the tangent space of the circle
/// manifold at w: t_k = g_k - Re(g_k conj(w_k)) w_k.
inline Eigen::VectorXcd riemannian_gradient(const HermitianMatrix& q, const PhaseVector& w) {
  if (q.size() != w.size())
    throw std::invalid_argument("riemannian_gradient: dimension mismatch");
  const Eigen::VectorXcd g = 2.0 * (q.matrix() * w.entries());
  Eigen::VectorXcd t(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    const cxd wk = w.entries()(k);
    t(k) = g(k) - (g(k) * std::conj(wk)).real() * wk;
  }
  return t;
}

/// Entrywise retraction (w_k + step d_k)/|w_k + step d_k|.
inline PhaseVector retract(const PhaseVector& w, double step, const Eigen::VectorXcd& direction) {
  if (direction.size() != w.size()) throw std::invalid_argument("retract: dimension mismatch");
  Eigen::VectorXcd out(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    cxd v = w.entries()(k) + step * direction(k);
    double mag = std::abs(v);
    if (mag == 0.0) {
      v += cxd(std::numeric_limits<double>::epsilon(), 0.0);
      mag = std::abs(v);
    }
    out(k) = v / mag;
  }
  return PhaseVector(std::move(out));
}

struct AscentResult {
  PhaseVector maximizer;
  double objective = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
};

namespace detail {

inline AscentResult ascend_from(const HermitianMatrix& q, const PhaseVector& w_init,
                                const AscentOptions& opts) {
  PhaseVector w = w_init;
  double f = circle_objective(q, w);
  AscentResult result;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    result.iterations = iter;
    const Eigen::VectorXcd t = riemannian_gradient(q, w);
    const double grad_norm = t.norm();
    result.gradient_norm = grad_norm;
    if (grad_norm < opts.grad_tol) break;

    // Armijo backtracking on the ascent direction t; the directional
    // derivative along t equals ||t||^2.
    double step = opts.initial_step;
    bool accepted = false;
    for (int back = 0; back < 60; ++back) {
      PhaseVector cand = retract(w, step, t);
      const double f_cand = circle_objective(q, cand);
      if (std::isfinite(f_cand) && f_cand >= f + opts.armijo_c * step * grad_norm * grad_norm) {
        w = std::move(cand);
        f = f_cand;
        accepted = true;
        break;
      }
      step *= opts.backtrack_factor;
    }
    if (!accepted) break;
  }
  result.maximizer = std::move(w);
  result.objective = f;
  return result;
}

}  // namespace detail

/// Riemannian gradient ascent with Armijo backtracking; accepted objective
/// values are nondecreasing. With restarts > 1 the best of additional
/// random-phase initializations is returned, ties broken toward the earliest
/// start.
inline AscentResult maximize_quadratic_on_circle(const HermitianMatrix& q,
                                                 const PhaseVector& w_init,
                                                 const AscentOptions& opts) {
  opts.validate();
  if (q.size() != w_init.size())
    throw std::invalid_argument("maximize_quadratic_on_circle: dimension mismatch");
  AscentResult best = detail::ascend_from(q, w_init, opts);
  if (opts.restarts > 1) {
    std::mt19937_64 rng(opts.restart_seed);
    std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
    for (int r = 1; r < opts.restarts; ++r) {
      Eigen::VectorXd phi(w_init.size());
      for (Eigen::Index k = 0; k < phi.size(); ++k) phi(k) = phase(rng);
      AscentResult cand = detail::ascend_from(q, PhaseVector::from_phases(phi), opts);
      if (cand.objective > best.objective) best = std::move(cand);
    }
  }
  return best;
}

/// Real symmetric Hessian of a phase-parameterized objective by second-order
/// central differences; returns the eigenvalues sorted ascending.
inline Eigen::VectorXd hessian_spectrum_at(
    const std::function<double(const Eigen::VectorXd&)>& objective, const Eigen::VectorXd& point,
    double fd_step) {
  if (!(fd_step > 0.0)) throw std::invalid_argument("hessian_spectrum_at: fd_step must be > 0");
  const Eigen::Index n = point.size();
  const double h = fd_step;

  auto eval = [&](const Eigen::VectorXd& phi) {
    const double v = objective(phi);
    if (!std::isfinite(v)) throw numeric_error("hessian_spectrum_at: objective not finite");
    return v;
  };

  Eigen::MatrixXd hess(n, n);
  Eigen::VectorXd phi = point;
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = m; k < n; ++k) {
      phi = point;
      phi(m) += h;
      phi(k) += h;
      const double fpp = eval(phi);
      phi = point;
      phi(m) += h;
      phi(k) -= h;
      const double fpm = eval(phi);
      phi = point;
      phi(m) -= h;
      phi(k) += h;
      const double fmp = eval(phi);
      phi = point;
      phi(m) -= h;
      phi(k) -= h;
      const double fmm = eval(phi);
      hess(m, k) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
      hess(k, m) = hess(m, k);
    }
  }
  hess = 0.5 * (hess + hess.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw numeric_error("hessian_spectrum_at: eigendecomposition failed");
  return es.eigenvalues();
}

}  // namespace rr2d

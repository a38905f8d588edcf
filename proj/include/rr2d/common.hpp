#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rr2d {

using cxd = std::complex<double>;

/// Thrown when linear algebra breaks down: singular covariance, failed
/// eigendecomposition, non-finite iterates. Distinct from
/// std::invalid_argument, which flags bad inputs/configuration.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/// splitmix64 finalizer over a (state, salt) pair. Used to derive independent
/// per-trial and per-stream RNG seeds from one master seed.
inline std::uint64_t mix_seed(std::uint64_t state, std::uint64_t salt) {
  std::uint64_t z = state + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline bool all_finite(const Eigen::MatrixXcd& m) {
  return m.allFinite();
}

}  // namespace rr2d

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rr2d/array_model.hpp"
#include "rr2d/common.hpp"

namespace rr2d {

// Disjoint contiguous sub-arrays: sub-array d owns elements [d*N_S, (d+1)*N_S).
struct SubArrayPartition {
  int n_digital = 1;
  int n_per_subarray = 1;

  int n_total() const { return n_digital * n_per_subarray; }
  int subarray_of(int element) const { return element / n_per_subarray; }
  int first_element(int subarray) const { return subarray * n_per_subarray; }

  void validate() const {
    if (n_digital < 1) throw std::invalid_argument("SubArrayPartition: n_digital must be >= 1");
    if (n_per_subarray < 1)
      throw std::invalid_argument("SubArrayPartition: n_per_subarray must be >= 1");
  }

  void validate_against(const ArrayGeometry& geometry) const {
    validate();
    if (n_total() != geometry.n_elements)
      throw std::invalid_argument("SubArrayPartition: N_D * N_S must equal n_elements");
  }
};

/// Per-sub-array analog phase weights, every entry unit modulus.
struct AnalogWeights {
  std::vector<Eigen::VectorXcd> per_subarray;

  void validate() const {
    for (const auto& w : per_subarray) {
      for (Eigen::Index k = 0; k < w.size(); ++k) {
        if (std::abs(std::abs(w(k)) - 1.0) > 1e-12)
          throw std::invalid_argument("AnalogWeights: entries must be unit modulus");
      }
    }
  }

  static AnalogWeights all_ones(const SubArrayPartition& partition) {
    AnalogWeights w;
    w.per_subarray.assign(partition.n_digital,
                          Eigen::VectorXcd::Ones(partition.n_per_subarray));
    return w;
  }

  /// Splits a flat length-N_A unit-modulus vector into per-sub-array weights.
  static AnalogWeights from_flat(const Eigen::VectorXcd& flat, const SubArrayPartition& partition) {
    partition.validate();
    if (flat.size() != partition.n_total())
      throw std::invalid_argument("AnalogWeights: flat vector length must equal N_A");
    AnalogWeights w;
    w.per_subarray.reserve(partition.n_digital);
    for (int d = 0; d < partition.n_digital; ++d) {
      w.per_subarray.push_back(flat.segment(partition.first_element(d), partition.n_per_subarray));
    }
    w.validate();
    return w;
  }
};

// One active element per sub-array.
struct SwitchConfiguration {
  std::vector<int> active;
};

// Ordered activation patterns plus the per-configuration snapshot count.
struct SwitchSchedule {
  std::vector<SwitchConfiguration> configs;
  int snapshots_per_config = 1;
  SubArrayPartition partition;
};

/// Assembles the block-diagonal analog combining matrix: row a carries
/// sub-array a's weights in its own columns, zeros elsewhere.
inline Eigen::MatrixXcd block_diagonal(const AnalogWeights& weights) {
  weights.validate();
  const int n_digital = static_cast<int>(weights.per_subarray.size());
  int n_total = 0;
  for (const auto& w : weights.per_subarray) n_total += static_cast<int>(w.size());
  Eigen::MatrixXcd w_a = Eigen::MatrixXcd::Zero(n_digital, n_total);
  int col = 0;
  for (int a = 0; a < n_digital; ++a) {
    const auto& w = weights.per_subarray[a];
    w_a.block(a, col, 1, w.size()) = w.transpose();
    col += static_cast<int>(w.size());
  }
  return w_a;
}

/// Covariance seen by the digital chains: W_A R W_A^H.
inline HermitianMatrix digital_covariance(const Eigen::MatrixXcd& w_a, const HermitianMatrix& r) {
  if (w_a.cols() != r.size())
    throw std::invalid_argument("digital_covariance: combiner/covariance dimension mismatch");
  Eigen::MatrixXcd rd = w_a * r.matrix() * w_a.adjoint();
  return HermitianMatrix(std::move(rd), 1e-9);
}

/// Enumerates all N_S^N_D activation patterns in odometer order, the last
/// sub-array cycling fastest. Every cross-sub-array element pair is active
/// together in exactly N_S^(N_D-2) configurations.
inline SwitchSchedule hierarchical_schedule(const SubArrayPartition& partition,
                                            int snapshots_per_config) {
  partition.validate();
  if (snapshots_per_config < 1)
    throw std::invalid_argument("hierarchical_schedule: snapshots_per_config must be >= 1");
  SwitchSchedule schedule;
  schedule.snapshots_per_config = snapshots_per_config;
  schedule.partition = partition;

  const int n_digital = partition.n_digital;
  const int n_per = partition.n_per_subarray;
  std::vector<int> digit(n_digital, 0);
  while (true) {
    SwitchConfiguration config;
    config.active.resize(n_digital);
    for (int d = 0; d < n_digital; ++d)
      config.active[d] = partition.first_element(d) + digit[d];
    schedule.configs.push_back(std::move(config));

    int pos = n_digital - 1;
    while (pos >= 0 && ++digit[pos] == n_per) {
      digit[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return schedule;
}

/// Measurement-mode combiner: row d selects the active element of sub-array d
/// with unit gain, all other elements off.
inline Eigen::MatrixXcd selection_matrix(const SwitchConfiguration& config, int n_total) {
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(static_cast<int>(config.active.size()), n_total);
  for (int d = 0; d < static_cast<int>(config.active.size()); ++d) {
    const int e = config.active[d];
    if (e < 0 || e >= n_total)
      throw std::invalid_argument("selection_matrix: active element out of range");
    s(d, e) = 1.0;
  }
  return s;
}

/// Composite weight vector w_eff = W_A^H w_D, so y = w_eff^H x for any
/// snapshot x.
inline Eigen::VectorXcd effective_full_weights(const Eigen::MatrixXcd& w_a,
                                               const Eigen::VectorXcd& w_d) {
  if (w_a.rows() != w_d.size())
    throw std::invalid_argument("effective_full_weights: combiner/digital dimension mismatch");
  return w_a.adjoint() * w_d;
}

/// Keeps only the rows of a snapshot block that the given configuration
/// activates, ordered by sub-array index.
inline SnapshotBlock restrict_to_active(const SnapshotBlock& block,
                                        const SwitchConfiguration& config) {
  SnapshotBlock out;
  out.includes_soi = block.includes_soi;
  out.samples.resize(static_cast<int>(config.active.size()), block.samples.cols());
  for (int d = 0; d < static_cast<int>(config.active.size()); ++d) {
    const int e = config.active[d];
    if (e < 0 || e >= block.samples.rows())
      throw std::invalid_argument("restrict_to_active: active element out of range");
    out.samples.row(d) = block.samples.row(e);
  }
  return out;
}

}  // namespace rr2d

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rr2d/array_model.hpp"
#include "rr2d/covariance_completion.hpp"

using namespace rr2d;

namespace {

Eigen::MatrixXcd random_hermitian(int n, std::uint64_t seed, double diag_boost = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cxd(gauss(rng), gauss(rng));
  return 0.5 * (a + a.adjoint()) + diag_boost * Eigen::MatrixXcd::Identity(n, n);
}

// Hermitian Toeplitz PD ground truth from a one-interferer scene.
HermitianMatrix toeplitz_truth(int n) {
  Scenario s;
  s.geometry = {n, 0.5};
  s.soi = {0.0, 1.0, SourceKind::soi};
  s.interferers.push_back({37.0, db_to_linear(10.0), SourceKind::interferer});
  return analytical_covariance(s, false);
}

MaskedCovariance mask_matrix(const Eigen::MatrixXcd& values, const ObservationMask& mask) {
  MaskedCovariance out;
  out.values = values;
  const Eigen::Index n = values.rows();
  out.samples_per_entry = Eigen::MatrixXi::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (mask.observed(i, j)) {
        out.samples_per_entry(i, j) = 1;
      } else {
        out.values(i, j) = cxd(0.0, 0.0);
      }
    }
  }
  out.mask = mask;
  out.validate();
  return out;
}

}  // namespace

TEST_CASE("switching mask observes exactly diagonal and cross pairs", "[completion]") {
  const ObservationMask m = ObservationMask::for_partition({2, 2});
  REQUIRE(m.size() == 4);
  REQUIRE(m.observed_count() == 12);  // 16 entries minus intra pairs (0,1),(1,0),(2,3),(3,2)
  REQUIRE(m.observed(0, 0));
  REQUIRE_FALSE(m.observed(0, 1));
  REQUIRE_FALSE(m.observed(3, 2));
  REQUIRE(m.observed(0, 2));
  REQUIRE(m.observed(1, 3));

  const ObservationMask full_scale = ObservationMask::for_partition({2, 16});
  REQUIRE(full_scale.observed_count() == 544);  // 1024 - 2*16*15 unobserved intra pairs
}

TEST_CASE("observation mask rejects malformed inputs", "[completion]") {
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> bad_diag =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(2, 2, true);
  bad_diag(1, 1) = false;
  REQUIRE_THROWS_AS(ObservationMask(bad_diag), std::invalid_argument);

  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> asym =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(2, 2, true);
  asym(0, 1) = false;
  REQUIRE_THROWS_AS(ObservationMask(asym), std::invalid_argument);
}

TEST_CASE("incomplete SCM accumulation averages per-entry counts", "[completion]") {
  const SubArrayPartition p{2, 2};
  SwitchSchedule schedule = hierarchical_schedule(p, 2);

  // Constant snapshots make the expected averages easy to state.
  std::vector<SnapshotBlock> blocks(4);
  for (int c = 0; c < 4; ++c) {
    blocks[c].samples = Eigen::MatrixXcd::Constant(2, 2, cxd(1.0, 0.0));
    blocks[c].samples *= static_cast<double>(c + 1);
  }

  const MaskedCovariance inc = assemble_incomplete_scm(schedule, blocks);
  REQUIRE(inc.mask == ObservationMask::for_partition(p));

  // element 0 is active in configs 0 and 1 with snapshot values 1 and 2
  REQUIRE(inc.samples_per_entry(0, 0) == 4);  // 2 configs * 2 snapshots
  REQUIRE(inc.values(0, 0) == cxd((1.0 + 1.0 + 4.0 + 4.0) / 4.0, 0.0));
  // cross pair (0,2) only in config 0
  REQUIRE(inc.samples_per_entry(0, 2) == 2);
  REQUIRE(inc.values(0, 2) == cxd(1.0, 0.0));
  // cross pair (1,3) only in config 3 (values 4)
  REQUIRE(inc.samples_per_entry(1, 3) == 2);
  REQUIRE(inc.values(1, 3) == cxd(16.0, 0.0));
  // intra-sub-array pair never observed
  REQUIRE(inc.samples_per_entry(0, 1) == 0);
  REQUIRE(inc.values(0, 1) == cxd(0.0, 0.0));

  REQUIRE_THROWS_AS(assemble_incomplete_scm(schedule, std::vector<SnapshotBlock>(3)),
                    std::invalid_argument);
}

TEST_CASE("psd projection clamps negative eigenvalues", "[completion]") {
  Eigen::MatrixXcd m(2, 2);
  m << cxd(1, 0), cxd(0, 0), cxd(0, 0), cxd(-1, 0);
  const HermitianMatrix proj = project_psd(m, 0.0);
  Eigen::MatrixXcd expected(2, 2);
  expected << cxd(1, 0), cxd(0, 0), cxd(0, 0), cxd(0, 0);
  REQUIRE((proj.matrix() - expected).norm() < 1e-12);

  // idempotence and PSD-ness on random inputs
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Eigen::MatrixXcd h = random_hermitian(6, seed);
    const HermitianMatrix once = project_psd(h, 0.0);
    const HermitianMatrix twice = project_psd(once.matrix(), 0.0);
    REQUIRE(once.min_eigenvalue() >= -1e-10 * std::abs(once.trace_real()));
    REQUIRE((twice.matrix() - once.matrix()).norm() <= 1e-10 * (1.0 + once.matrix().norm()));
  }

  // diagonal loading shifts the spectrum
  const HermitianMatrix loaded = project_psd(m, 0.5);
  REQUIRE(loaded.min_eigenvalue() >= 0.5 - 1e-12);
}

TEST_CASE("toeplitz projection averages diagonals", "[completion]") {
  Eigen::MatrixXcd m(2, 2);
  m << cxd(1, 0), cxd(2, 0), cxd(0, 0), cxd(3, 0);
  const HermitianMatrix proj = project_toeplitz(m);
  REQUIRE(std::abs(proj.matrix()(0, 0) - cxd(2, 0)) < 1e-14);
  REQUIRE(std::abs(proj.matrix()(1, 1) - cxd(2, 0)) < 1e-14);
  REQUIRE(std::abs(proj.matrix()(0, 1) - cxd(1, 0)) < 1e-14);
  REQUIRE(std::abs(proj.matrix()(1, 0) - cxd(1, 0)) < 1e-14);

  for (std::uint64_t seed = 11; seed <= 13; ++seed) {
    const Eigen::MatrixXcd h = random_hermitian(7, seed);
    const HermitianMatrix once = project_toeplitz(h);

    // constant diagonals, real main diagonal
    for (int k = 0; k < 7; ++k) {
      for (int i = 0; i + k < 7; ++i) {
        REQUIRE(std::abs(once.matrix()(i, i + k) - once.matrix()(0, k)) < 1e-12);
      }
    }
    for (int i = 0; i < 7; ++i) REQUIRE(std::abs(once.matrix()(i, i).imag()) < 1e-14);

    // idempotence
    const HermitianMatrix twice = project_toeplitz(once.matrix());
    REQUIRE((twice.matrix() - once.matrix()).norm() < 1e-12 * (1.0 + once.matrix().norm()));
    REQUIRE(once.is_toeplitz());

    // orthogonality: the residual is perpendicular to every Hermitian
    // Toeplitz matrix under the real inner product Re<A, B>
    std::mt19937_64 rng(seed * 97);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(7, 7);
    for (int k = 0; k < 7; ++k) {
      const cxd c = k == 0 ? cxd(gauss(rng), 0.0) : cxd(gauss(rng), gauss(rng));
      for (int i = 0; i + k < 7; ++i) {
        t(i, i + k) = c;
        t(i + k, i) = std::conj(c);
      }
    }
    const cxd inner = ((h - once.matrix()).adjoint() * t).trace();
    REQUIRE(std::abs(inner.real()) < 1e-10);
  }
}

TEST_CASE("projections are nonexpansive", "[completion]") {
  for (std::uint64_t seed = 21; seed <= 24; ++seed) {
    const Eigen::MatrixXcd a = random_hermitian(6, seed);
    const Eigen::MatrixXcd b = random_hermitian(6, seed + 100);
    const double dist = (a - b).norm();
    REQUIRE((project_psd(a, 0.0).matrix() - project_psd(b, 0.0).matrix()).norm() <=
            dist + 1e-10);
    REQUIRE((project_toeplitz(a).matrix() - project_toeplitz(b).matrix()).norm() <=
            dist + 1e-10);
  }
}

TEST_CASE("observed projection reasserts measured entries", "[completion]") {
  const ObservationMask mask = ObservationMask::for_partition({2, 2});
  const HermitianMatrix truth = toeplitz_truth(4);
  const MaskedCovariance inc = mask_matrix(truth.matrix(), mask);

  const Eigen::MatrixXcd start = random_hermitian(4, 99);
  const Eigen::MatrixXcd fixed = project_observed(start, inc);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (mask.observed(i, j)) {
        REQUIRE(std::abs(fixed(i, j) - truth.matrix()(i, j)) < 1e-14);
      } else {
        REQUIRE(std::abs(fixed(i, j) - start(i, j)) < 1e-14);
      }
    }
  }
  const Eigen::MatrixXcd again = project_observed(fixed, inc);
  REQUIRE((again - fixed).norm() < 1e-14);
}

TEST_CASE("toeplitz initialization fills by distance-weighted lag averages", "[completion]") {
  // 6 elements, 3 sub-arrays of 2: lag-1 observations exist only at (1,2), (3,4).
  const SubArrayPartition p{3, 2};
  const ObservationMask mask = ObservationMask::for_partition(p);
  Eigen::MatrixXcd values = Eigen::MatrixXcd::Zero(6, 6);
  for (int i = 0; i < 6; ++i) values(i, i) = 2.0;
  auto set_pair = [&](int i, int j, cxd v) {
    values(i, j) = v;
    values(j, i) = std::conj(v);
  };
  // distinct lag-1 values to expose the weighting
  set_pair(1, 2, cxd(0.8, 0.1));
  set_pair(3, 4, cxd(0.4, -0.3));
  // lag >= 2 cross entries, constant per lag for simplicity
  for (int i = 0; i < 6; ++i)
    for (int j = i + 2; j < 6; ++j)
      if (mask.observed(i, j)) set_pair(i, j, cxd(0.1, 0.0));

  const MaskedCovariance inc = mask_matrix(values, mask);
  CompletionConfig config;
  const HermitianMatrix init = toeplitz_initialize(inc, config);

  // observed entries are kept verbatim
  REQUIRE(std::abs(init.matrix()(1, 2) - cxd(0.8, 0.1)) < 1e-12);
  REQUIRE(std::abs(init.matrix()(0, 2) - cxd(0.1, 0.0)) < 1e-12);

  // missing (0,1): distances to (1,2) and (3,4) are sqrt(2) and 3*sqrt(2),
  // so the weights are in ratio 3:1
  const double d_near = std::sqrt(2.0) + config.distance_epsilon;
  const double d_far = 3.0 * std::sqrt(2.0) + config.distance_epsilon;
  const double w_near = 1.0 / d_near, w_far = 1.0 / d_far;
  const cxd expected01 =
      (w_near * cxd(0.8, 0.1) + w_far * cxd(0.4, -0.3)) / (w_near + w_far);
  REQUIRE(std::abs(init.matrix()(0, 1) - expected01) < 1e-12);
  // Hermitian output
  REQUIRE(std::abs(init.matrix()(1, 0) - std::conj(init.matrix()(0, 1))) < 1e-14);
}

TEST_CASE("toeplitz initialization falls back to the fill constant", "[completion]") {
  // single sub-array: only the diagonal is ever observed, so every lag >= 1
  // has no donor entries
  const ObservationMask mask = ObservationMask::for_partition({1, 3});
  Eigen::MatrixXcd values = Eigen::MatrixXcd::Zero(3, 3);
  for (int i = 0; i < 3; ++i) values(i, i) = 5.0;
  const MaskedCovariance inc = mask_matrix(values, mask);

  const HermitianMatrix init = toeplitz_initialize(inc, CompletionConfig{});
  REQUIRE(std::abs(init.matrix()(0, 1) - cxd(0.01, 0.0)) < 1e-15);
  REQUIRE(std::abs(init.matrix()(0, 2) - cxd(0.01, 0.0)) < 1e-15);
  REQUIRE(std::abs(init.matrix()(0, 0) - cxd(5.0, 0.0)) < 1e-15);
}

TEST_CASE("dykstra recovers a masked analytical toeplitz covariance", "[completion]") {
  const HermitianMatrix truth = toeplitz_truth(4);
  REQUIRE(truth.is_toeplitz());
  REQUIRE(truth.is_psd());

  const MaskedCovariance inc = mask_matrix(truth.matrix(), ObservationMask::for_partition({2, 2}));

  CompletionConfig config;
  config.delta_tol = 1e-10;
  config.max_iters = 5000;
  config.reg_epsilon = 1e-12;
  const auto [completed, report] = dykstra_complete(inc, config);

  const double rel = (completed.matrix() - truth.matrix()).norm() / truth.matrix().norm();
  REQUIRE(rel <= 1e-6);
  REQUIRE(report.converged);
  REQUIRE(report.iterations_run >= 1);
  REQUIRE(report.constraint_residuals.toeplitz_frobenius_rel < 1e-6);
  REQUIRE(report.constraint_residuals.observed_frobenius_rel < 1e-6);
  REQUIRE(completed.min_eigenvalue() >= -1e-10 * completed.trace_real());
}

TEST_CASE("dykstra leaves a feasible fully observed input in place", "[completion]") {
  // one sub-array per element means every entry is observed
  const HermitianMatrix truth = toeplitz_truth(4);
  const MaskedCovariance inc = mask_matrix(truth.matrix(), ObservationMask::for_partition({4, 1}));

  CompletionConfig config;
  config.reg_epsilon = 1e-12;
  const auto [completed, report] = dykstra_complete(inc, config);
  REQUIRE(report.converged);
  REQUIRE((completed.matrix() - truth.matrix()).norm() < 1e-9 * truth.matrix().norm());
}

TEST_CASE("dykstra reports compromise residuals on infeasible data", "[completion]") {
  // random Hermitian observed values: generally no PSD Toeplitz matrix agrees
  // with them, so the algorithm settles on a least-squares compromise
  const ObservationMask mask = ObservationMask::for_partition({2, 3});
  Eigen::MatrixXcd noisy = random_hermitian(6, 777, 3.0);
  const MaskedCovariance inc = mask_matrix(noisy, mask);

  CompletionConfig config;
  config.max_iters = 300;
  const auto [completed, report] = dykstra_complete(inc, config);

  REQUIRE(completed.min_eigenvalue() >= -1e-10 * std::abs(completed.trace_real()));
  REQUIRE(report.iterations_run >= 1);
  REQUIRE(report.constraint_residuals.toeplitz_frobenius_rel >= 0.0);
  REQUIRE(report.constraint_residuals.observed_frobenius_rel >= 0.0);
  REQUIRE(std::isfinite(report.final_relative_change));
}

TEST_CASE("ablation switch skips the toeplitz constraint", "[completion]") {
  const HermitianMatrix truth = toeplitz_truth(4);
  const MaskedCovariance inc = mask_matrix(truth.matrix(), ObservationMask::for_partition({2, 2}));

  CompletionConfig config;
  config.toeplitz_projection = false;
  config.reg_epsilon = 1e-12;
  const auto [completed, report] = dykstra_complete(inc, config);

  // observed entries still honored and output PSD
  double observed_err = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (inc.mask.observed(i, j))
        observed_err = std::max(observed_err,
                                std::abs(completed.matrix()(i, j) - truth.matrix()(i, j)));
  REQUIRE(observed_err < 1e-6);
  REQUIRE(completed.min_eigenvalue() >= -1e-10 * completed.trace_real());
  // without the structural prior the unobserved intra-pair entries have no
  // reason to match the truth; the toeplitz residual is reported untouched
  REQUIRE(report.constraint_residuals.toeplitz_frobenius_rel >= 0.0);
}

TEST_CASE("completion config validation", "[completion]") {
  CompletionConfig bad;
  bad.fill_constant = -1.0;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  CompletionConfig bad2;
  bad2.max_iters = 0;
  REQUIRE_THROWS_AS(bad2.validate(), std::invalid_argument);
  CompletionConfig auto_reg;
  REQUIRE(auto_reg.effective_reg(32.0, 4) == Catch::Approx(8e-6));
  auto_reg.reg_epsilon = 0.5;
  REQUIRE(auto_reg.effective_reg(32.0, 4) == Catch::Approx(0.5));
}

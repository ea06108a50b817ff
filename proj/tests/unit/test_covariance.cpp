#include <doctest.h>

#include <random>

#include "egg/covariance.hpp"
#include "egg/simulation.hpp"
#include "support/oracles.hpp"

using egg::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd gaussian_rows(Index m, const MatrixXd& cov, std::mt19937_64& rng) {
  const MatrixXd l = cov.llt().matrixL();
  std::normal_distribution<double> normal;
  MatrixXd out(m, cov.rows());
  VectorXd e(cov.rows());
  for (Index j = 0; j < m; ++j) {
    for (Index k = 0; k < e.size(); ++k) e(k) = normal(rng);
    out.row(j) = (l * e).transpose();
  }
  return out;
}

MatrixXd equicorrelation(Index p, double rho) {
  MatrixXd r = MatrixXd::Constant(p, p, rho);
  r.diagonal().setOnes();
  return r;
}

}  // namespace

TEST_CASE("panel invariants are enforced") {
  CHECK_THROWS_AS(egg::SummaryPanel(MatrixXd::Zero(1, 2), {}, {}), egg::DataError);
  CHECK_THROWS_AS(egg::SummaryPanel(MatrixXd::Zero(3, 1), {}, {}), egg::DataError);
  MatrixXd z = MatrixXd::Zero(3, 2);
  z(1, 1) = NAN;
  CHECK_THROWS_AS(egg::SummaryPanel(z, {}, {}), egg::DataError);
  const egg::SummaryPanel ok(MatrixXd::Ones(3, 2), {}, {});
  CHECK(ok.traits() == std::vector<std::string>{"trait1", "trait2"});
  CHECK_THROWS_AS(egg::NullPanel(MatrixXd::Zero(2, 3)), egg::DataError);
}

TEST_CASE("error covariance examples") {
  MatrixXd b(1, 2);
  b << 1, 2;
  MatrixXd expected(2, 2);
  expected << 1, 2, 2, 4;
  CHECK(egg::second_moment(b) == expected);
  CHECK(egg::estimate_error_covariance(egg::NullPanel(MatrixXd::Zero(4, 3))).matrix == MatrixXd::Zero(3, 3));
}

TEST_CASE("error covariance recovers a known correlation") {
  std::mt19937_64 rng(7);
  const MatrixXd truth = equicorrelation(3, 0.3);
  const auto err = egg::estimate_error_covariance(egg::NullPanel(gaussian_rows(100000, truth, rng)));
  CHECK(egg::max_abs(err.matrix - truth) < 0.01);
  CHECK(err.out_of_band.empty());
}

TEST_CASE("error covariance is PSD") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::normal_distribution<double> normal;
    MatrixXd b(6, 5);
    for (Index i = 0; i < 6; ++i)
      for (Index j = 0; j < 5; ++j) b(i, j) = normal(rng);
    CHECK(egg::min_eigenvalue(egg::estimate_error_covariance(egg::NullPanel(b)).matrix) >= -1e-10);
  }
}

TEST_CASE("pearson covariance examples") {
  MatrixXd z(1, 2);
  z << 1, 1;
  MatrixXd expected(2, 2);
  expected << 0, 1, 1, 0;
  CHECK(egg::pearson_covariance(z, MatrixXd::Identity(2, 2)) == expected);

  VectorXd col(4);
  col << 1, -2, 3, 0.5;
  MatrixXd same(4, 3);
  for (Index k = 0; k < 3; ++k) same.col(k) = col;
  const MatrixXd c = egg::pearson_covariance(same, MatrixXd::Zero(3, 3));
  CHECK(egg::max_abs(c - MatrixXd::Constant(3, 3, col.squaredNorm() / 4)) < 1e-15);
}

TEST_CASE("pearson covariance of null-like panels vanishes") {
  std::mt19937_64 rng(9);
  const MatrixXd r = equicorrelation(3, 0.4);
  const egg::SummaryPanel panel(gaussian_rows(100000, r, rng), {}, {});
  const auto err = egg::estimate_error_covariance(egg::NullPanel(gaussian_rows(100000, r, rng)));
  CHECK(egg::max_abs(egg::pearson_covariance(panel, err).matrix) < 0.02);
}

TEST_CASE("pearson covariance is invariant to row order") {
  std::mt19937_64 rng(10);
  const MatrixXd z = gaussian_rows(50, equicorrelation(4, 0.2), rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(50);
  perm.setIdentity();
  std::shuffle(perm.indices().data(), perm.indices().data() + 50, rng);
  const MatrixXd zp = perm * z;
  const MatrixXd zero = MatrixXd::Zero(4, 4);
  // Summation order differs, so equality holds to rounding only.
  CHECK(egg::max_abs(egg::pearson_covariance(z, zero) - egg::pearson_covariance(zp, zero)) < 1e-14);
}

TEST_CASE("spearman endpoints are exact") {
  MatrixXd z(6, 3);
  z.col(0) << 0.3, -1.2, 2.5, 0.1, -0.7, 1.9;
  z.col(1) = z.col(0).array().exp();
  z.col(2) = -z.col(0);
  const MatrixXd r = egg::spearman_correlation(z);
  CHECK(r(0, 1) == 1.0);
  CHECK(r(0, 2) == -1.0);
  CHECK(r(1, 2) == -1.0);
  CHECK(r.diagonal() == VectorXd::Ones(3));
  CHECK(egg::sine_transform(1.0) == 1.0);
  CHECK(egg::sine_transform(-1.0) == -1.0);
}

TEST_CASE("spearman matches an independent rank-difference oracle") {
  std::mt19937_64 rng(12);
  const MatrixXd z = gaussian_rows(100000, MatrixXd::Identity(2, 2), rng);
  const MatrixXd r = egg::spearman_correlation(z);
  CHECK(std::abs(r(0, 1)) < 0.02);
  const double rho = egg::testing::spearman_rank_difference(z.col(0), z.col(1));
  CHECK(std::abs(r(0, 1) - 2.0 * std::sin(M_PI * rho / 6.0)) < 0.01);
}

TEST_CASE("spearman is invariant to increasing transforms") {
  std::mt19937_64 rng(13);
  const MatrixXd z = gaussian_rows(200, equicorrelation(3, 0.5), rng);
  MatrixXd t = z;
  t.col(0) = z.col(0).array().exp();
  t.col(2) = z.col(2).array().cube() + 4.0;
  CHECK(egg::spearman_correlation(z) == egg::spearman_correlation(t));
}

TEST_CASE("spearman rejects constant columns by name") {
  MatrixXd z(4, 2);
  z << 1, 2, 1, 3, 1, 4, 1, 5;
  try {
    egg::spearman_correlation(z, {"height", "bmi"});
    FAIL("expected DataError");
  } catch (const egg::DataError& e) {
    CHECK(std::string(e.what()).find("height") != std::string::npos);
  }
}

TEST_CASE("spearman covariance examples") {
  // Columns with MAD 1: median 0, absolute deviations with median 1/1.483.
  const double d = 1.0 / 1.483;
  MatrixXd z(5, 2);
  z.col(0) << -2 * d, -d, 0, d, 2 * d;
  z.col(1) = z.col(0);
  const MatrixXd c = egg::spearman_covariance(z, MatrixXd::Identity(2, 2));
  CHECK(c(0, 0) == doctest::Approx(0.0));
  CHECK(c(0, 1) == doctest::Approx(1.0));
  CHECK(c(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("spearman and pearson agree on clean Gaussian panels") {
  std::mt19937_64 rng(14);
  MatrixXd cov(3, 3);
  cov << 2.0, 0.6, -0.3, 0.6, 1.5, 0.2, -0.3, 0.2, 1.0;
  const MatrixXd z = gaussian_rows(100000, cov, rng);
  const MatrixXd err = 0.2 * MatrixXd::Identity(3, 3);
  CHECK(egg::max_abs(egg::spearman_covariance(z, err) - egg::pearson_covariance(z, err)) < 0.03);
}

TEST_CASE("spearman resists mean-shift contamination") {
  std::mt19937_64 rng(15);
  MatrixXd cov(3, 3);
  cov << 1.0, 0.5, 0.25, 0.5, 1.0, 0.5, 0.25, 0.5, 1.0;
  MatrixXd z = gaussian_rows(20000, cov, rng);
  for (Index j = 0; j < z.rows(); j += 10) z.row(j).array() += 5.0;
  const MatrixXd zero = MatrixXd::Zero(3, 3);
  const double spearman_err = (egg::spearman_covariance(z, zero) - cov).norm();
  const double pearson_err = (egg::pearson_covariance(z, zero) - cov).norm();
  CHECK(spearman_err < pearson_err);
}

TEST_CASE("spearman beats pearson under simulated pleiotropy in most replicates") {
  egg::sim::SimulationDesign design;
  design.p = 10;
  design.m = 1000;
  design.pleiotropy_fraction = 0.1;
  int wins = 0;
  const int reps = 200;
  for (int rep = 0; rep < reps; ++rep) {
    design.seed = egg::sim::rep_seed(500, rep);
    auto data = egg::sim::simulate_summary_panel(design);
    const auto dirty = egg::sim::inject_pleiotropy(data.panel, design, data.effect_sd);
    const MatrixXd err = data.error_correlation;
    const MatrixXd truth = static_cast<double>(design.n) * data.sigma_beta;
    const double s = (egg::spearman_covariance(dirty.panel.z(), err) - truth).norm();
    const double p = (egg::pearson_covariance(dirty.panel.z(), err) - truth).norm();
    if (s <= p) ++wins;
  }
  CHECK(wins >= 180);
}

TEST_CASE("genetic correlation examples") {
  const MatrixXd i3 = MatrixXd::Identity(3, 3);
  CHECK(egg::genetic_correlation({i3, egg::EstimatorKind::Pearson, false}, 0.05).matrix == i3);

  std::mt19937_64 rng(16);
  const MatrixXd r = egg::testing::random_correlation(4, rng);
  const auto same = egg::genetic_correlation({r, egg::EstimatorKind::Spearman, false}, 0.05);
  CHECK(egg::max_abs(same.matrix - r) < 1e-10);
  CHECK(same.floor_applied);
  CHECK(same.estimator_kind == egg::EstimatorKind::Spearman);

  MatrixXd bad(2, 2);
  bad << 1, 1.2, 1.2, 1;
  const MatrixXd fixed = egg::genetic_correlation({bad, egg::EstimatorKind::Pearson, false}, 0.05).matrix;
  const VectorXd ev = egg::testing::jacobi_eigenvalues(fixed);
  CHECK(ev(0) >= 0.05 - 1e-10);
  CHECK(fixed(0, 0) == 1.0);
  CHECK(fixed(1, 1) == 1.0);
  CHECK(fixed(0, 1) > 0.0);
}

TEST_CASE("genetic correlation always meets its floor") {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 200; ++trial) {
    MatrixXd a = egg::testing::random_symmetric(6, rng);
    a.diagonal() = a.diagonal().cwiseAbs().array() + 0.1;
    const MatrixXd r = egg::genetic_correlation({a, egg::EstimatorKind::Pearson, false}, 0.05).matrix;
    CHECK(egg::testing::jacobi_eigenvalues(r)(0) >= 0.05 - 1e-10);
    CHECK(egg::max_abs(r.diagonal() - VectorXd::Ones(6)) <= 1e-12);
    CHECK(egg::is_symmetric(r));
  }
}

TEST_CASE("reliability ratio examples") {
  CHECK(egg::reliability_ratio(MatrixXd::Ones(5, 2)) == VectorXd::Zero(2));
  MatrixXd z(2, 1);
  z << 2, 2;
  CHECK(egg::reliability_ratio(z)(0) == doctest::Approx(0.75));

  std::mt19937_64 rng(19);
  const MatrixXd nulls = gaussian_rows(100000, MatrixXd::Identity(2, 2), rng);
  const VectorXd r = egg::reliability_ratio(nulls);
  CHECK(std::abs(r(0)) < 0.02);
  CHECK(std::abs(r(1)) < 0.02);
  CHECK((r.array() <= 1.0).all());
}

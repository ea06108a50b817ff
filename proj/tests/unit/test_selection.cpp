#include <doctest.h>

#include <random>

#include "egg/selection.hpp"
#include "egg/simulation.hpp"

using egg::Index;
using Eigen::MatrixXd;

namespace {

egg::CovarianceSource source_for(const egg::sim::SimulatedData& data, egg::EstimatorKind kind) {
  return {data.panel.z(), egg::estimate_error_covariance(data.nulls).matrix, kind, 0.05, true};
}

egg::sim::SimulatedData small_design(std::uint64_t seed, Index m = 200) {
  egg::sim::SimulationDesign d;
  d.p = 6;
  d.m = m;
  d.seed = seed;
  return egg::sim::simulate_summary_panel(d);
}

egg::PrecisionFit fit_with_support(Index p, const std::vector<egg::TraitPair>& pairs) {
  MatrixXd t = MatrixXd::Identity(p, p);
  for (const auto& [k, s] : pairs) t(k, s) = t(s, k) = 0.1;
  return egg::make_fit(t, true, 1, 0.0);
}

}  // namespace

TEST_CASE("config validation") {
  egg::SelectionConfig c;
  CHECK_THROWS_AS(c.validate(), egg::ValidationError);
  c.lambda_grid = {0.1, 0.1};
  CHECK_THROWS_AS(c.validate(), egg::ValidationError);
  c.lambda_grid = {0.1, 0.2};
  CHECK_NOTHROW(c.validate());
  c.c_t = 1.0;
  CHECK_THROWS_AS(c.validate(), egg::ValidationError);
  c.c_t = 0.95;
  c.subsamples = 0;
  CHECK_THROWS_AS(c.validate(), egg::ValidationError);
}

TEST_CASE("linear grid") {
  const auto g = egg::linear_grid(0.05, 1.0, 20);
  CHECK(g.size() == 20);
  CHECK(g.front() == 0.05);
  CHECK(g.back() == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(0.1));
}

TEST_CASE("a one-point grid is returned unchanged") {
  const auto data = small_design(1);
  egg::SelectionConfig c;
  c.lambda_grid = {0.37};
  const auto cv = egg::cross_validate_lambda(source_for(data, egg::EstimatorKind::Pearson), c,
                                             egg::PenaltySpec::mcp(0.0), {});
  CHECK(cv.lambda_cv == 0.37);
}

TEST_CASE("cross-validation needs at least ten rows") {
  egg::CovarianceSource src{MatrixXd::Random(9, 3), MatrixXd::Zero(3, 3), egg::EstimatorKind::Pearson, 0.05, true};
  egg::SelectionConfig c;
  c.lambda_grid = {0.1, 0.2};
  CHECK_THROWS_AS(egg::cross_validate_lambda(src, c, egg::PenaltySpec::mcp(0.0), {}), egg::DataError);
}

TEST_CASE("CVE collapses to the in-sample entropy when test equals train") {
  const auto data = small_design(2);
  const auto src = source_for(data, egg::EstimatorKind::Pearson);
  egg::SelectionConfig c;
  c.lambda_grid = {0.05, 0.1, 0.2};
  c.cv_splits = 3;
  c.seed = 9;
  c.test_equals_train = true;
  const egg::AdmmConfig admm;
  const auto cv = egg::cross_validate_lambda(src, c, egg::PenaltySpec::mcp(0.0), admm);
  REQUIRE(cv.table.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    double expected = 0.0;
    for (int h = 0; h < 3; ++h) {
      const MatrixXd s = src.sigma(egg::cv_train_rows(c, src.variants(), h));
      expected += egg::entropy_loss(s, egg::solve_penalized_entropy(s, egg::PenaltySpec::mcp(c.lambda_grid[i]), admm).precision);
    }
    CHECK(cv.table[i].mean_cve == doctest::Approx(expected / 3).epsilon(1e-4));
    CHECK(cv.table[i].lambda == c.lambda_grid[i]);
  }
}

TEST_CASE("cross-validation beats both grid endpoints in a noisy regime") {
  egg::sim::SimulationDesign d;
  d.p = 10;
  d.m = 30;
  egg::SelectionConfig c;
  c.lambda_grid = egg::linear_grid(0.05, 1.0, 20);
  const egg::AdmmConfig admm;
  double chosen = 0.0, low = 0.0, high = 0.0;
  for (int r = 0; r < 20; ++r) {
    d.seed = 700 + static_cast<std::uint64_t>(r);
    c.seed = static_cast<std::uint64_t>(r);
    const auto data = egg::sim::simulate_summary_panel(d);
    const auto src = source_for(data, egg::EstimatorKind::Pearson);
    const auto cv = egg::cross_validate_lambda(src, c, egg::PenaltySpec::mcp(0.0), admm);
    const MatrixXd s = src.sigma();
    auto loss = [&](double l) {
      return egg::entropy_loss(data.truth_correlation,
                               egg::solve_penalized_entropy(s, egg::PenaltySpec::mcp(l), admm).precision);
    };
    chosen += loss(cv.lambda_cv);
    low += loss(c.lambda_grid.front());
    high += loss(c.lambda_grid.back());
  }
  CHECK(chosen < low);
  CHECK(chosen < high);
}

TEST_CASE("selection frequency arithmetic") {
  std::vector<egg::PrecisionFit> fits;
  for (int h = 0; h < 100; ++h)
    fits.push_back(h < 94 ? fit_with_support(3, {{0, 1}, {1, 2}}) : fit_with_support(3, {{1, 2}}));
  const MatrixXd freq = egg::selection_frequencies(fits, 3);
  CHECK(freq(0, 1) == doctest::Approx(0.94));
  CHECK(freq(1, 2) == 1.0);
  CHECK(freq(0, 2) == 0.0);
  CHECK(freq.diagonal() == Eigen::VectorXd::Ones(3));
  CHECK(1.0 - freq(0, 1) == doctest::Approx(0.06));

  MatrixXd theta = MatrixXd::Identity(3, 3);
  theta(0, 1) = theta(1, 0) = 0.2;
  theta(1, 2) = theta(2, 1) = 0.3;
  const MatrixXd pruned = egg::prune_by_frequency(theta, freq, 0.95);
  CHECK(pruned(0, 1) == 0.0);
  CHECK(pruned(1, 2) == 0.3);
}

TEST_CASE("identical supports give indicator frequencies") {
  std::vector<egg::PrecisionFit> fits(10, fit_with_support(4, {{0, 3}}));
  const MatrixXd freq = egg::selection_frequencies(fits, 4);
  for (Index k = 0; k < 4; ++k)
    for (Index s = 0; s < 4; ++s)
      if (k != s) CHECK(freq(k, s) == ((k == 0 && s == 3) || (k == 3 && s == 0) ? 1.0 : 0.0));
}

TEST_CASE("stability selection is deterministic and consistent") {
  const auto data = small_design(3);
  const auto src = source_for(data, egg::EstimatorKind::Spearman);
  egg::SelectionConfig c;
  c.lambda_grid = {0.05};
  c.subsamples = 30;
  c.seed = 77;
  const auto a = egg::stability_select(src, 0.05, c, egg::PenaltySpec::mcp(0.0), {});
  const auto b = egg::stability_select(src, 0.05, c, egg::PenaltySpec::mcp(0.0), {});
  CHECK(a.frequencies == b.frequencies);
  CHECK(a.pruned_fit.precision == b.pruned_fit.precision);
  CHECK(egg::is_symmetric(a.frequencies));
  CHECK((a.frequencies.array() >= 0.0).all());
  CHECK((a.frequencies.array() <= 1.0).all());
  CHECK(a.pvalues == MatrixXd::Ones(6, 6) - a.frequencies);
  for (const auto& [k, s] : a.pruned_fit.support) CHECK(a.frequencies(k, s) >= c.c_t);
  CHECK(egg::min_eigenvalue(a.pruned_fit.precision) >= egg::AdmmConfig{}.delta - 2e-6 * 6);
}

TEST_CASE("stability subsamples are independent of the CV splits") {
  egg::SelectionConfig c;
  c.seed = 5;
  CHECK(egg::cv_train_rows(c, 100, 0) != egg::stability_rows(c, 100, 0));
  CHECK(egg::stability_rows(c, 100, 3) == egg::stability_rows(c, 100, 3));
  CHECK(egg::stability_rows(c, 100, 3).size() == 50);
}

TEST_CASE("raising c_t never adds edges") {
  const auto data = small_design(4, 150);
  const auto src = source_for(data, egg::EstimatorKind::Pearson);
  egg::SelectionConfig c;
  c.lambda_grid = {0.03};
  c.subsamples = 40;
  std::size_t previous = SIZE_MAX;
  for (double ct : {0.5, 0.7, 0.9, 0.95, 0.99}) {
    c.c_t = ct;
    const auto r = egg::stability_select(src, 0.03, c, egg::PenaltySpec::mcp(0.0), {});
    CHECK(r.pruned_fit.support.size() <= previous);
    previous = r.pruned_fit.support.size();
  }
}

TEST_CASE("AR(1) truth edge frequencies separate at the threshold") {
  egg::sim::SimulationDesign d;
  d.p = 10;
  d.m = 2000;
  const auto cfg = egg::sim::default_method_config();
  int good = 0;
  for (int r = 0; r < 30; ++r) {
    d.seed = egg::sim::rep_seed(31, r);
    const auto data = egg::sim::simulate_summary_panel(d);
    const auto src = source_for(data, egg::EstimatorKind::Pearson);
    auto sel = cfg.selection;
    sel.seed = static_cast<std::uint64_t>(r);
    const auto cv = egg::cross_validate_lambda(src, sel, cfg.penalty, cfg.admm);
    const auto st = egg::stability_select(src, cv.lambda_cv, sel, cfg.penalty, cfg.admm);
    bool ok = true;
    for (Index k = 0; k < d.p; ++k)
      for (Index s = k + 1; s < d.p; ++s) {
        const bool edge = data.truth_precision(k, s) != 0.0;
        if (edge != (st.frequencies(k, s) >= sel.c_t)) ok = false;
      }
    if (ok) ++good;
  }
  CHECK(good >= 24);
}

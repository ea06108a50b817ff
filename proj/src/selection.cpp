#include "egg/selection.hpp"

#include <cmath>
#include <limits>

#include "egg/rng.hpp"

namespace egg {

namespace {

constexpr std::uint64_t kCvStream = 0x4356;         // "CV"
constexpr std::uint64_t kStabilityStream = 0x5354;  // "ST"

MatrixXd rows_of(const MatrixXd& z, const std::vector<Index>& rows) {
  MatrixXd out(static_cast<Index>(rows.size()), z.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = z.row(rows[i]);
  return out;
}

void require_splittable(const CovarianceSource& source) {
  if (source.variants() < 10) throw DataError("selection: fewer than 10 variants, cannot split");
}

double safe_entropy(const MatrixXd& sigma, const MatrixXd& theta) {
  try {
    return entropy_loss(sigma, theta);
  } catch (const DomainError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

MatrixXd correlation_input(const Eigen::Ref<const MatrixXd>& z, const MatrixXd* err, EstimatorKind estimator,
                           double floor) {
  const MatrixXd zero = MatrixXd::Zero(z.cols(), z.cols());
  const MatrixXd& e = err != nullptr ? *err : zero;
  GeneticCovariance cov{estimator == EstimatorKind::Pearson ? pearson_covariance(z, e) : spearman_covariance(z, e),
                        estimator, false};
  return genetic_correlation(cov, floor).matrix;
}

MatrixXd CovarianceSource::sigma() const {
  return correlation_input(z, subtract_error ? &error : nullptr, estimator, floor);
}

MatrixXd CovarianceSource::sigma(const std::vector<Index>& rows) const {
  return correlation_input(rows_of(z, rows), subtract_error ? &error : nullptr, estimator, floor);
}

void SelectionConfig::validate() const {
  if (lambda_grid.empty()) throw ValidationError("selection: lambda grid is empty");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] > 0.0)) throw ValidationError("selection: lambda grid entries must be positive");
    if (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1]))
      throw ValidationError("selection: lambda grid must be strictly ascending");
  }
  if (subsamples < 1) throw ValidationError("selection: need at least one subsample");
  if (cv_splits < 1) throw ValidationError("selection: need at least one CV split");
  if (!(c_s > 0.0 && c_s < 1.0)) throw ValidationError("selection: c_s must lie in (0, 1)");
  if (!(c_t >= 0.5 && c_t < 1.0)) throw ValidationError("selection: c_t must lie in [0.5, 1)");
}

std::vector<Index> cv_train_rows(const SelectionConfig& config, Index m, int h) {
  auto rng = make_rng(config.seed, kCvStream, static_cast<std::uint64_t>(h));
  return sample_without_replacement(m, static_cast<Index>(std::floor(config.c_s * static_cast<double>(m))), rng);
}

std::vector<Index> stability_rows(const SelectionConfig& config, Index m, int h) {
  auto rng = make_rng(config.seed, kStabilityStream, static_cast<std::uint64_t>(h));
  return sample_without_replacement(m, static_cast<Index>(std::floor(config.c_s * static_cast<double>(m))), rng);
}

std::vector<double> linear_grid(double lo, double hi, int count) {
  if (count < 1) throw ValidationError("linear_grid: count must be positive");
  if (count == 1) return {lo};
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  return grid;
}

CvResult cross_validate_lambda(const CovarianceSource& source, const SelectionConfig& config,
                               const PenaltySpec& penalty, const AdmmConfig& admm) {
  config.validate();
  const auto& grid = config.lambda_grid;
  const std::size_t n_lambda = grid.size();
  CvResult result;
  if (n_lambda == 1) {
    result.lambda_cv = grid.front();
    result.table.push_back({grid.front(), 0.0, 0.0});
    return result;
  }
  require_splittable(source);
  const Index m = source.variants();

  std::vector<std::vector<double>> cve(n_lambda);
  for (int h = 0; h < config.cv_splits; ++h) {
    const auto train = cv_train_rows(config, m, h);
    const auto test = config.test_equals_train ? train : complement(m, train);
    const MatrixXd sigma_train = source.sigma(train);
    const MatrixXd sigma_test = config.test_equals_train ? sigma_train : source.sigma(test);

    // λ path from the sparsest end, each fit warm-started from the previous one.
    AdmmState state;
    bool have_state = false;
    for (std::size_t i = n_lambda; i-- > 0;) {
      SolveOptions options;
      if (have_state) options.warm_start = &state;
      AdmmState next;
      options.final_state = &next;
      const PrecisionFit fit = solve_penalized_entropy(sigma_train, penalty.with_lambda(grid[i]), admm, options);
      cve[i].push_back(safe_entropy(sigma_test, fit.precision));
      state = std::move(next);
      have_state = true;
    }
  }

  double best = std::numeric_limits<double>::infinity();
  result.lambda_cv = grid.front();
  for (std::size_t i = 0; i < n_lambda; ++i) {
    const auto& v = cve[i];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double sd = 0.0;
    if (v.size() > 1) {
      for (double x : v) sd += (x - mean) * (x - mean);
      sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
    }
    result.table.push_back({grid[i], mean, sd});
    if (mean < best) {
      best = mean;
      result.lambda_cv = grid[i];
    }
  }
  return result;
}

MatrixXd selection_frequencies(const std::vector<PrecisionFit>& fits, Index p) {
  MatrixXd freq = MatrixXd::Zero(p, p);
  if (fits.empty()) throw DomainError("selection_frequencies: no fits");
  for (const auto& fit : fits)
    for (const auto& [k, s] : fit.support) {
      freq(k, s) += 1.0;
      freq(s, k) += 1.0;
    }
  freq /= static_cast<double>(fits.size());
  freq.diagonal().setOnes();
  return freq;
}

MatrixXd prune_by_frequency(const MatrixXd& precision, const MatrixXd& frequencies, double c_t) {
  MatrixXd out = precision;
  for (Index k = 0; k < out.rows(); ++k)
    for (Index s = 0; s < out.cols(); ++s)
      if (k != s && frequencies(k, s) < c_t) out(k, s) = 0.0;
  return out;
}

StabilityResult stability_select(const CovarianceSource& source, double lambda_cv, const SelectionConfig& config,
                                 const PenaltySpec& penalty, const AdmmConfig& admm) {
  config.validate();
  require_splittable(source);
  const Index m = source.variants();
  const Index p = source.dim();
  const PenaltySpec tuned = penalty.with_lambda(lambda_cv);

  std::vector<PrecisionFit> fits;
  fits.reserve(static_cast<std::size_t>(config.subsamples));
  for (int h = 0; h < config.subsamples; ++h) {
    const auto rows = stability_rows(config, m, h);
    fits.push_back(solve_penalized_entropy(source.sigma(rows), tuned, admm));
  }

  StabilityResult result;
  result.lambda_cv = lambda_cv;
  result.frequencies = selection_frequencies(fits, p);
  result.pvalues = (MatrixXd::Ones(p, p) - result.frequencies);

  const MatrixXd sigma = source.sigma();
  AdmmState full_state;
  SolveOptions full_options;
  full_options.final_state = &full_state;
  result.full_fit = solve_penalized_entropy(sigma, tuned, admm, full_options);

  const MatrixXd pruned = prune_by_frequency(result.full_fit.precision, result.frequencies, config.c_t);
  if (pruned == result.full_fit.precision) {
    result.pruned_fit = result.full_fit;
  } else if (min_eigenvalue(pruned) >= admm.delta) {
    double objective = std::numeric_limits<double>::infinity();
    try {
      objective = penalized_objective(sigma, pruned, tuned);
    } catch (const DomainError&) {
    }
    result.pruned_fit = make_fit(pruned, result.full_fit.converged, result.full_fit.iterations, objective);
  } else {
    Eigen::MatrixX<bool> mask(p, p);
    for (Index k = 0; k < p; ++k)
      for (Index s = 0; s < p; ++s) mask(k, s) = k == s || result.frequencies(k, s) >= config.c_t;
    SolveOptions options;
    options.warm_start = &full_state;
    options.support_mask = &mask;
    result.pruned_fit = solve_penalized_entropy(sigma, tuned, admm, options);
    result.refit = true;
  }
  return result;
}

}  // namespace egg

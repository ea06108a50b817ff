#pragma once

#include <cstdint>
#include <vector>

#include "egg/covariance.hpp"
#include "egg/solver.hpp"

namespace egg {

/// Variant-level rows plus everything needed to turn any subset of them
/// into the correlation-scale matrix the solver consumes.
struct CovarianceSource {
  MatrixXd z;
  /// Full-data error covariance; not re-estimated per subsample.
  MatrixXd error;
  EstimatorKind estimator = EstimatorKind::Spearman;
  double floor = 0.05;
  /// False gives the naive estimator (no error subtraction).
  bool subtract_error = true;

  Index variants() const { return z.rows(); }
  Index dim() const { return z.cols(); }

  MatrixXd sigma() const;
  MatrixXd sigma(const std::vector<Index>& rows) const;
};

/// Covariance of `z` under `estimator` (error subtracted when `err` is given),
/// floored and rescaled to a correlation matrix.
MatrixXd correlation_input(const Eigen::Ref<const MatrixXd>& z, const MatrixXd* err, EstimatorKind estimator,
                           double floor);

struct SelectionConfig {
  std::vector<double> lambda_grid;
  int subsamples = 100;  // H, stability selection
  int cv_splits = 10;
  double c_s = 0.5;
  double c_t = 0.95;
  std::uint64_t seed = 1;
  /// Test hook: evaluate CV on the training rows themselves.
  bool test_equals_train = false;

  void validate() const;
};

/// Training rows of CV split h (⌊c_s·m⌋ rows, sorted).
std::vector<Index> cv_train_rows(const SelectionConfig& config, Index m, int h);

/// Rows of stability subsample h, drawn independently of the CV splits.
std::vector<Index> stability_rows(const SelectionConfig& config, Index m, int h);

/// Evenly spaced grid lo, ..., hi with `count` points.
std::vector<double> linear_grid(double lo, double hi, int count);

struct CveRow {
  double lambda = 0.0;
  double mean_cve = 0.0;
  double sd_cve = 0.0;
};

struct CvResult {
  double lambda_cv = 0.0;
  std::vector<CveRow> table;  // ascending λ
};

CvResult cross_validate_lambda(const CovarianceSource& source, const SelectionConfig& config,
                               const PenaltySpec& penalty, const AdmmConfig& admm);

struct StabilityResult {
  double lambda_cv = 0.0;
  MatrixXd frequencies;
  PrecisionFit full_fit;
  PrecisionFit pruned_fit;
  MatrixXd pvalues;
  /// True when zeroing broke σ_min ≥ δ and the fit was re-solved on the kept support.
  bool refit = false;
};

/// Selection frequencies of nonzero off-diagonal entries over the fits.
MatrixXd selection_frequencies(const std::vector<PrecisionFit>& fits, Index p);

/// Zeros the entries of `fit` whose frequency is below c_t.
MatrixXd prune_by_frequency(const MatrixXd& precision, const MatrixXd& frequencies, double c_t);

StabilityResult stability_select(const CovarianceSource& source, double lambda_cv, const SelectionConfig& config,
                                 const PenaltySpec& penalty, const AdmmConfig& admm);

}  // namespace egg

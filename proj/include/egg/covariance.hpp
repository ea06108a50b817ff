#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "egg/matrix_core.hpp"

namespace egg {

using MatrixXd = Eigen::MatrixXd;
using VectorXd = Eigen::VectorXd;

/// Z-scores of independent variants (rows) across traits (columns).
class SummaryPanel {
 public:
  SummaryPanel(MatrixXd z, std::vector<std::string> traits, std::vector<long> sample_sizes);

  const MatrixXd& z() const { return z_; }
  const std::vector<std::string>& traits() const { return traits_; }
  const std::vector<long>& sample_sizes() const { return sample_sizes_; }
  Index variants() const { return z_.rows(); }
  Index dim() const { return z_.cols(); }

  /// Panel restricted to the given rows, in the given order.
  SummaryPanel subset(const std::vector<Index>& rows) const;

 private:
  MatrixXd z_;
  std::vector<std::string> traits_;
  std::vector<long> sample_sizes_;
};

/// Z-scores of variants that are null for every trait.
class NullPanel {
 public:
  explicit NullPanel(MatrixXd b);

  const MatrixXd& b() const { return b_; }
  Index variants() const { return b_.rows(); }
  Index dim() const { return b_.cols(); }

 private:
  MatrixXd b_;
};

struct ErrorCovariance {
  MatrixXd matrix;
  /// Traits whose diagonal entry falls outside (0.5, 1.5).
  std::vector<Index> out_of_band;
};

enum class EstimatorKind { Pearson, Spearman };

const char* to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);

struct GeneticCovariance {
  MatrixXd matrix;
  EstimatorKind estimator_kind = EstimatorKind::Pearson;
  bool floor_applied = false;
};

// Matrix-level kernels. These evaluate the formulas with no panel-size
// checks; the typed overloads below validate their inputs.

/// (1/M) Σ b_j b_jᵀ.
MatrixXd second_moment(const Eigen::Ref<const MatrixXd>& rows);

/// Uncentered second moment of the panel minus the error covariance.
MatrixXd pearson_covariance(const Eigen::Ref<const MatrixXd>& z, const Eigen::Ref<const MatrixXd>& err);

/// Rank correlation mapped back to the Pearson scale by 2·sin(π ρ / 6).
MatrixXd spearman_correlation(const Eigen::Ref<const MatrixXd>& z,
                              const std::vector<std::string>& traits = {});

/// D R D - Σ_ω with D the per-column MAD scales.
MatrixXd spearman_covariance(const Eigen::Ref<const MatrixXd>& z, const Eigen::Ref<const MatrixXd>& err,
                             const std::vector<std::string>& traits = {});

/// Per-column MAD scales.
VectorXd column_mad(const Eigen::Ref<const MatrixXd>& z);

/// 2·sin(π ρ / 6), exact at ρ = ±1.
double sine_transform(double rho);

ErrorCovariance estimate_error_covariance(const NullPanel& nulls);
GeneticCovariance pearson_covariance(const SummaryPanel& panel, const ErrorCovariance& err);
MatrixXd spearman_correlation(const SummaryPanel& panel);
GeneticCovariance spearman_covariance(const SummaryPanel& panel, const ErrorCovariance& err);

/// Floors the spectrum at `floor` and rescales to unit diagonal.
GeneticCovariance genetic_correlation(const GeneticCovariance& cov, double floor);

/// Σ_j (z_jk² - 1) / Σ_j z_jk² per trait.
VectorXd reliability_ratio(const Eigen::Ref<const MatrixXd>& z);
VectorXd reliability_ratio(const SummaryPanel& panel);

}  // namespace egg

#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "egg/gwas_io.hpp"
#include "egg/selection.hpp"

namespace egg {

/// Variants whose two-sided P exceeds `threshold` for every trait.
std::vector<Index> null_screen(const Eigen::Ref<const MatrixXd>& z, double threshold);

struct JointScreen {
  std::vector<Index> kept;  // ascending
  VectorXd statistic;       // per input row
  VectorXd pvalue;          // per input row
};

/// z_jᵀ R⁻¹ z_j against χ²(p); keeps rows with P at or below `threshold`.
/// R is floored at `floor` before inversion.
JointScreen joint_chisq_screen(const Eigen::Ref<const MatrixXd>& z, const MatrixXd& err, double threshold,
                               double floor = 0.05);

struct PruneCandidate {
  std::string chromosome;
  long long position = 0;
  double pvalue = 1.0;
};

/// Greedy by ascending P: keep a variant unless a kept variant on the same
/// chromosome lies within `window_bp`. Returns kept indices, ascending.
std::vector<Index> distance_prune(const std::vector<PruneCandidate>& candidates, long long window_bp);

struct AnalysisConfig {
  std::vector<std::string> trait_files;
  std::vector<std::string> trait_labels;
  double null_p_threshold = 0.05;
  double joint_p_threshold = 5e-8;
  long long prune_window_bp = 1'000'000;
  EstimatorKind estimator = EstimatorKind::Spearman;
  PenaltySpec penalty = PenaltySpec::mcp(0.0, 3.0);
  AdmmConfig admm;
  SelectionConfig selection;
  double sigma_floor = 0.05;
  std::string out_dir = "egg_out";
  bool strict = false;

  /// Checks everything that can be checked without reading data.
  void validate() const;
};

/// Default λ grid for correlation-scale input.
std::vector<double> default_lambda_grid();

struct PreparedData {
  std::vector<std::string> traits;
  std::vector<long> sample_sizes;
  SummaryPanel analysis;
  std::vector<io::VariantInfo> analysis_variants;
  VectorXd analysis_joint_p;
  /// Correlation-scale error covariance from the null variants.
  ErrorCovariance error;
  Index null_variants = 0;
  std::vector<std::pair<std::string, long long>> stage_counts;
  std::vector<std::string> warnings;
};

/// parse → align → null screen → error covariance → joint screen → prune.
PreparedData prepare_data(const AnalysisConfig& config, std::ostream* log = nullptr);

struct PipelineResult {
  PreparedData data;
  GeneticCovariance correlation;
  CvResult cv;
  StabilityResult stability;
};

PipelineResult run_pipeline(const AnalysisConfig& config, std::ostream* log = nullptr);

}  // namespace egg

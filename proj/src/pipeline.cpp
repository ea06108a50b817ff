#include "egg/pipeline.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "egg/stats.hpp"

namespace egg {

namespace {

void log_stage(std::ostream* log, PreparedData& data, const std::string& stage, long long count) {
  data.stage_counts.emplace_back(stage, count);
  if (log != nullptr) *log << "[egg] " << stage << ": " << count << '\n';
}

MatrixXd rows_of(const MatrixXd& z, const std::vector<Index>& rows) {
  MatrixXd out(static_cast<Index>(rows.size()), z.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = z.row(rows[i]);
  return out;
}

}  // namespace

std::vector<Index> null_screen(const Eigen::Ref<const MatrixXd>& z, double threshold) {
  std::vector<Index> out;
  for (Index j = 0; j < z.rows(); ++j) {
    bool null = true;
    for (Index k = 0; k < z.cols() && null; ++k) null = stats::normal_two_sided_p(z(j, k)) > threshold;
    if (null) out.push_back(j);
  }
  return out;
}

JointScreen joint_chisq_screen(const Eigen::Ref<const MatrixXd>& z, const MatrixXd& err, double threshold,
                               double floor) {
  if (err.rows() != z.cols() || err.cols() != z.cols())
    throw DimensionError("joint_chisq_screen: error matrix does not match the panel");
  const MatrixXd floored = clip_eigenvalues(err, floor);
  Eigen::LLT<MatrixXd> llt(floored);
  if (llt.info() != Eigen::Success) throw DomainError("joint_chisq_screen: error correlation is singular");
  JointScreen out;
  out.statistic.resize(z.rows());
  out.pvalue.resize(z.rows());
  const double dof = static_cast<double>(z.cols());
  for (Index j = 0; j < z.rows(); ++j) {
    const VectorXd whitened = llt.matrixL().solve(z.row(j).transpose());
    out.statistic(j) = whitened.squaredNorm();
    out.pvalue(j) = stats::chi_square_sf(out.statistic(j), dof);
    if (out.pvalue(j) <= threshold) out.kept.push_back(j);
  }
  return out;
}

std::vector<Index> distance_prune(const std::vector<PruneCandidate>& candidates, long long window_bp) {
  if (window_bp <= 0) throw ValidationError("distance_prune: window must be positive");
  std::vector<Index> order(candidates.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return candidates[static_cast<std::size_t>(a)].pvalue < candidates[static_cast<std::size_t>(b)].pvalue;
  });
  std::unordered_map<std::string, std::vector<long long>> kept_positions;
  std::vector<Index> kept;
  for (Index i : order) {
    const auto& c = candidates[static_cast<std::size_t>(i)];
    auto& positions = kept_positions[c.chromosome];
    const bool clash = std::any_of(positions.begin(), positions.end(), [&](long long pos) {
      const long long gap = pos > c.position ? pos - c.position : c.position - pos;
      return gap <= window_bp;
    });
    if (clash) continue;
    positions.push_back(c.position);
    kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

void AnalysisConfig::validate() const {
  if (trait_files.size() < 2) throw ValidationError("need at least two trait files");
  if (!trait_labels.empty() && trait_labels.size() != trait_files.size())
    throw ValidationError("trait label count must match trait file count");
  if (!(null_p_threshold > 0.0 && null_p_threshold < 1.0)) throw ValidationError("null_p_threshold must lie in (0, 1)");
  if (!(joint_p_threshold > 0.0 && joint_p_threshold < 1.0))
    throw ValidationError("joint_p_threshold must lie in (0, 1)");
  if (prune_window_bp <= 0) throw ValidationError("prune_window_bp must be positive");
  if (!(sigma_floor > 0.0 && sigma_floor < 1.0)) throw ValidationError("sigma_floor must lie in (0, 1)");
  penalty.validate();
  admm.validate();
  selection.validate();
}

std::vector<double> default_lambda_grid() { return linear_grid(0.02, 0.4, 10); }

PreparedData prepare_data(const AnalysisConfig& config, std::ostream* log) {
  config.validate();
  std::vector<std::string> labels = config.trait_labels;
  if (labels.empty())
    for (std::size_t t = 0; t < config.trait_files.size(); ++t) labels.push_back("T" + std::to_string(t + 1));

  std::vector<io::GwasFile> files;
  for (const auto& path : config.trait_files) files.push_back(io::parse_gwas_file(path));

  const io::AlignedPanel aligned = io::align_traits(labels, files);
  PreparedData data{labels, aligned.panel.sample_sizes(), aligned.panel, {}, {}, {}, 0, {}, {}};
  for (const auto& f : files) {
    log_stage(log, data, "parsed:" + f.path, static_cast<long long>(f.records.size()));
    data.warnings.insert(data.warnings.end(), f.warnings.begin(), f.warnings.end());
  }
  log_stage(log, data, "aligned", aligned.panel.variants());
  log_stage(log, data, "allele_mismatch_dropped", aligned.allele_mismatches);
  log_stage(log, data, "non_snv_rejected", aligned.rejected_alleles);

  const MatrixXd& z = aligned.panel.z();
  const auto null_rows = null_screen(z, config.null_p_threshold);
  log_stage(log, data, "null_variants", static_cast<long long>(null_rows.size()));
  const NullPanel nulls(rows_of(z, null_rows));
  const ErrorCovariance raw = estimate_error_covariance(nulls);
  data.error.matrix = cov2cor(raw.matrix);
  data.error.out_of_band = raw.out_of_band;
  data.null_variants = static_cast<Index>(null_rows.size());

  const JointScreen joint = joint_chisq_screen(z, data.error.matrix, config.joint_p_threshold, config.sigma_floor);
  // Null and analysis panels must be disjoint.
  std::vector<Index> significant;
  std::set_difference(joint.kept.begin(), joint.kept.end(), null_rows.begin(), null_rows.end(),
                      std::back_inserter(significant));
  log_stage(log, data, "joint_significant", static_cast<long long>(significant.size()));

  std::vector<PruneCandidate> candidates;
  for (Index j : significant) {
    const auto& v = aligned.variants[static_cast<std::size_t>(j)];
    candidates.push_back({v.chromosome, v.position, joint.pvalue(j)});
  }
  const auto pruned = distance_prune(candidates, config.prune_window_bp);
  std::vector<Index> analysis_rows;
  for (Index i : pruned) analysis_rows.push_back(significant[static_cast<std::size_t>(i)]);
  log_stage(log, data, "pruned_independent", static_cast<long long>(analysis_rows.size()));
  if (analysis_rows.size() < 10) throw DataError("fewer than 10 independent significant variants remain");

  data.analysis = aligned.panel.subset(analysis_rows);
  data.analysis_joint_p.resize(static_cast<Index>(analysis_rows.size()));
  for (std::size_t i = 0; i < analysis_rows.size(); ++i) {
    data.analysis_variants.push_back(aligned.variants[static_cast<std::size_t>(analysis_rows[i])]);
    data.analysis_joint_p(static_cast<Index>(i)) = joint.pvalue(analysis_rows[i]);
  }
  return data;
}

PipelineResult run_pipeline(const AnalysisConfig& config, std::ostream* log) {
  PipelineResult result{prepare_data(config, log), {}, {}, {}};
  const auto& data = result.data;
  const GeneticCovariance cov = config.estimator == EstimatorKind::Pearson
                                    ? pearson_covariance(data.analysis, data.error)
                                    : spearman_covariance(data.analysis, data.error);
  result.correlation = genetic_correlation(cov, config.sigma_floor);

  const CovarianceSource source{data.analysis.z(), data.error.matrix, config.estimator, config.sigma_floor, true};
  result.cv = cross_validate_lambda(source, config.selection, config.penalty, config.admm);
  if (log != nullptr) *log << "[egg] lambda_cv: " << result.cv.lambda_cv << '\n';
  result.stability = stability_select(source, result.cv.lambda_cv, config.selection, config.penalty, config.admm);
  if (log != nullptr)
    *log << "[egg] edges: " << result.stability.pruned_fit.support.size()
         << (result.stability.pruned_fit.converged ? "" : " (solver did not converge)") << '\n';
  return result;
}

}  // namespace egg

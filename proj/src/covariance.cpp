#include "egg/covariance.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "egg/stats.hpp"

namespace egg {

namespace {

void require_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw DataError(std::string(what) + ": non-finite entry");
}

void require_matching(Index p, const MatrixXd& err, const char* what) {
  if (err.rows() != p || err.cols() != p) {
    std::ostringstream msg;
    msg << what << ": error covariance is " << err.rows() << "x" << err.cols() << ", panel has " << p
        << " traits";
    throw DimensionError(msg.str());
  }
}

std::string trait_name(const std::vector<std::string>& traits, Index k) {
  if (static_cast<std::size_t>(k) < traits.size()) return traits[static_cast<std::size_t>(k)];
  return "column " + std::to_string(k);
}

}  // namespace

SummaryPanel::SummaryPanel(MatrixXd z, std::vector<std::string> traits, std::vector<long> sample_sizes)
    : z_(std::move(z)), traits_(std::move(traits)), sample_sizes_(std::move(sample_sizes)) {
  if (z_.rows() < 2 || z_.cols() < 2) throw DataError("SummaryPanel: need at least 2 variants and 2 traits");
  require_finite(z_, "SummaryPanel");
  const auto p = static_cast<std::size_t>(z_.cols());
  if (traits_.empty()) {
    for (std::size_t k = 0; k < p; ++k) traits_.push_back("trait" + std::to_string(k + 1));
  }
  if (traits_.size() != p) throw DimensionError("SummaryPanel: trait label count does not match columns");
  if (sample_sizes_.empty()) sample_sizes_.assign(p, 1);
  if (sample_sizes_.size() != p) throw DimensionError("SummaryPanel: sample size count does not match columns");
  for (long n : sample_sizes_)
    if (n <= 0) throw DataError("SummaryPanel: sample sizes must be positive");
}

SummaryPanel SummaryPanel::subset(const std::vector<Index>& rows) const {
  MatrixXd out(static_cast<Index>(rows.size()), z_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = z_.row(rows[i]);
  return SummaryPanel(std::move(out), traits_, sample_sizes_);
}

NullPanel::NullPanel(MatrixXd b) : b_(std::move(b)) {
  require_finite(b_, "NullPanel");
  if (b_.cols() < 1) throw DataError("NullPanel: no traits");
  if (b_.rows() < b_.cols()) {
    std::ostringstream msg;
    msg << "insufficient null variants: " << b_.rows() << " rows for " << b_.cols() << " traits";
    throw DataError(msg.str());
  }
}

const char* to_string(EstimatorKind kind) {
  return kind == EstimatorKind::Pearson ? "pearson" : "spearman";
}

EstimatorKind estimator_from_string(const std::string& name) {
  if (name == "pearson") return EstimatorKind::Pearson;
  if (name == "spearman") return EstimatorKind::Spearman;
  throw ValidationError("unknown estimator '" + name + "' (expected pearson or spearman)");
}

MatrixXd second_moment(const Eigen::Ref<const MatrixXd>& rows) {
  if (rows.rows() < 1) throw DataError("second_moment: no rows");
  MatrixXd s = MatrixXd::Zero(rows.cols(), rows.cols());
  s.selfadjointView<Eigen::Lower>().rankUpdate(rows.transpose());
  s /= static_cast<double>(rows.rows());
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return s;
}

MatrixXd pearson_covariance(const Eigen::Ref<const MatrixXd>& z, const Eigen::Ref<const MatrixXd>& err) {
  require_matching(z.cols(), err, "pearson_covariance");
  return symmetrize(second_moment(z) - err);
}

double sine_transform(double rho) {
  if (rho >= 1.0) return 1.0;
  if (rho <= -1.0) return -1.0;
  return 2.0 * std::sin(std::numbers::pi * rho / 6.0);
}

MatrixXd spearman_correlation(const Eigen::Ref<const MatrixXd>& z, const std::vector<std::string>& traits) {
  const Index m = z.rows();
  const Index p = z.cols();
  if (m < 3) throw DataError("spearman_correlation: need at least 3 variants");
  MatrixXd centered(m, p);
  VectorXd ss(p);
  const double center = 0.5 * static_cast<double>(m + 1);
  for (Index k = 0; k < p; ++k) {
    const VectorXd col = z.col(k);
    const auto r = stats::midranks(std::span<const double>(col.data(), static_cast<std::size_t>(m)));
    for (Index j = 0; j < m; ++j) centered(j, k) = r[static_cast<std::size_t>(j)] - center;
    ss(k) = centered.col(k).squaredNorm();
    if (ss(k) == 0.0) throw DataError("spearman_correlation: constant column for trait " + trait_name(traits, k));
  }
  MatrixXd out(p, p);
  for (Index s = 0; s < p; ++s) {
    out(s, s) = 1.0;
    for (Index k = s + 1; k < p; ++k) {
      const double rho = centered.col(k).dot(centered.col(s)) / std::sqrt(ss(k) * ss(s));
      const double r = sine_transform(rho);
      out(k, s) = r;
      out(s, k) = r;
    }
  }
  return out;
}

VectorXd column_mad(const Eigen::Ref<const MatrixXd>& z) {
  VectorXd d(z.cols());
  for (Index k = 0; k < z.cols(); ++k) {
    const VectorXd col = z.col(k);
    d(k) = stats::mad_scale(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
  }
  return d;
}

MatrixXd spearman_covariance(const Eigen::Ref<const MatrixXd>& z, const Eigen::Ref<const MatrixXd>& err,
                             const std::vector<std::string>& traits) {
  require_matching(z.cols(), err, "spearman_covariance");
  const MatrixXd r = spearman_correlation(z, traits);
  const VectorXd d = column_mad(z);
  return symmetrize(d.asDiagonal() * r * d.asDiagonal() - err);
}

ErrorCovariance estimate_error_covariance(const NullPanel& nulls) {
  ErrorCovariance out{second_moment(nulls.b()), {}};
  for (Index k = 0; k < out.matrix.rows(); ++k)
    if (!(out.matrix(k, k) > 0.5 && out.matrix(k, k) < 1.5)) out.out_of_band.push_back(k);
  return out;
}

GeneticCovariance pearson_covariance(const SummaryPanel& panel, const ErrorCovariance& err) {
  return {pearson_covariance(panel.z(), err.matrix), EstimatorKind::Pearson, false};
}

MatrixXd spearman_correlation(const SummaryPanel& panel) { return spearman_correlation(panel.z(), panel.traits()); }

GeneticCovariance spearman_covariance(const SummaryPanel& panel, const ErrorCovariance& err) {
  return {spearman_covariance(panel.z(), err.matrix, panel.traits()), EstimatorKind::Spearman, false};
}

GeneticCovariance genetic_correlation(const GeneticCovariance& cov, double floor) {
  if (!(floor > 0.0 && floor < 1.0)) throw DomainError("genetic_correlation: floor must lie in (0, 1)");
  const MatrixXd floored = clip_eigenvalues(cov.matrix, floor);
  MatrixXd r = cov2cor(floored);
  // Rescaling to unit diagonal can pull the smallest eigenvalue back under
  // the floor; mixing with the identity restores it and keeps the diagonal.
  const double lowest = min_eigenvalue(r);
  if (lowest < floor) {
    const double t = (floor - lowest) / (1.0 - lowest);
    r = symmetrize((1.0 - t) * r + t * MatrixXd::Identity(r.rows(), r.cols()));
    r.diagonal().setOnes();
  }
  return {r, cov.estimator_kind, true};
}

VectorXd reliability_ratio(const Eigen::Ref<const MatrixXd>& z) {
  VectorXd out(z.cols());
  const double m = static_cast<double>(z.rows());
  for (Index k = 0; k < z.cols(); ++k) {
    const double total = z.col(k).squaredNorm();
    if (total == 0.0) throw DataError("reliability_ratio: column " + std::to_string(k) + " is all zero");
    out(k) = (total - m) / total;
  }
  return out;
}

VectorXd reliability_ratio(const SummaryPanel& panel) { return reliability_ratio(panel.z()); }

}  // namespace egg

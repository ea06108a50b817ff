#include "egg/glasso.hpp"

#include <cmath>
#include <limits>

namespace egg {

namespace {

// min ½ βᵀVβ - uᵀβ + λ‖β‖₁ by cyclic coordinate descent, warm-started at beta.
void lasso_cd(const MatrixXd& v, const VectorXd& u, double lambda, VectorXd& beta, double tol, int max_inner) {
  const Index n = u.size();
  for (int it = 0; it < max_inner; ++it) {
    double delta = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double r = u(j) - v.col(j).dot(beta) + v(j, j) * beta(j);
      const double updated = soft_threshold(r, lambda) / v(j, j);
      delta = std::max(delta, std::abs(updated - beta(j)));
      beta(j) = updated;
    }
    if (delta < tol) break;
  }
}

std::vector<Index> others(Index p, Index j) {
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(p - 1));
  for (Index i = 0; i < p; ++i)
    if (i != j) idx.push_back(i);
  return idx;
}

}  // namespace

PrecisionFit graphical_lasso(const MatrixXd& s, double lambda, const GlassoConfig& config) {
  if (s.rows() != s.cols() || s.rows() < 2) throw DimensionError("graphical_lasso: need a square matrix, p >= 2");
  if (!(lambda >= 0.0)) throw ValidationError("graphical_lasso: lambda must be non-negative");
  const Index p = s.rows();
  MatrixXd w = s;
  MatrixXd betas = MatrixXd::Zero(p - 1, p);
  bool converged = false;
  int sweep = 0;
  for (; sweep < config.max_sweeps; ++sweep) {
    double change = 0.0;
    for (Index j = 0; j < p; ++j) {
      const auto idx = others(p, j);
      MatrixXd w11 = w(idx, idx);
      VectorXd s12 = s(idx, j);
      VectorXd beta = betas.col(j);
      lasso_cd(w11, s12, lambda, beta, config.tol, config.max_inner);
      betas.col(j) = beta;
      const VectorXd w12 = w11 * beta;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        change = std::max(change, std::abs(w(idx[i], j) - w12(static_cast<Index>(i))));
        w(idx[i], j) = w12(static_cast<Index>(i));
        w(j, idx[i]) = w12(static_cast<Index>(i));
      }
    }
    if (change < config.tol) {
      converged = true;
      ++sweep;
      break;
    }
  }

  MatrixXd theta = MatrixXd::Zero(p, p);
  for (Index j = 0; j < p; ++j) {
    const auto idx = others(p, j);
    const VectorXd beta = betas.col(j);
    const VectorXd w12 = w(idx, j);
    const double t22 = 1.0 / (w(j, j) - w12.dot(beta));
    theta(j, j) = t22;
    for (std::size_t i = 0; i < idx.size(); ++i) theta(idx[i], j) = -beta(static_cast<Index>(i)) * t22;
  }
  theta = symmetrize(theta);

  double objective = std::numeric_limits<double>::infinity();
  try {
    objective = penalized_objective(s, theta, PenaltySpec::lasso(lambda));
  } catch (const DomainError&) {
  }
  return make_fit(std::move(theta), converged, sweep, objective);
}

BicPathResult glasso_bic(const MatrixXd& s, const std::vector<double>& grid, long m, const GlassoConfig& config) {
  if (grid.empty()) throw ValidationError("glasso_bic: empty lambda grid");
  BicPathResult best;
  double best_score = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    PrecisionFit fit = graphical_lasso(s, lambda, config);
    double score = std::numeric_limits<double>::infinity();
    try {
      score = bic_score(s, fit, m);
    } catch (const DomainError&) {
    }
    best.scores.push_back(score);
    if (score < best_score || (score == best_score && lambda < best.lambda)) {
      best_score = score;
      best.fit = std::move(fit);
      best.lambda = lambda;
    }
  }
  if (!std::isfinite(best_score)) throw DomainError("glasso_bic: no grid point produced a PD fit");
  return best;
}

}  // namespace egg

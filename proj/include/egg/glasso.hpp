#pragma once

#include <vector>

#include "egg/solver.hpp"

namespace egg {

struct GlassoConfig {
  double tol = 1e-8;
  int max_sweeps = 1000;
  int max_inner = 1000;
};

/// Graphical lasso by block coordinate descent on the covariance:
/// minimizes tr(SΘ) - log det Θ + λ Σ_{k≠s} |Θ_ks|, diagonal unpenalized.
PrecisionFit graphical_lasso(const MatrixXd& s, double lambda, const GlassoConfig& config = {});

struct BicPathResult {
  PrecisionFit fit;
  double lambda = 0.0;
  std::vector<double> scores;  // one per grid entry
};

/// Fits the graphical lasso along `grid` and keeps the BIC minimizer
/// (ties go to the smaller λ).
BicPathResult glasso_bic(const MatrixXd& s, const std::vector<double>& grid, long m, const GlassoConfig& config = {});

}  // namespace egg

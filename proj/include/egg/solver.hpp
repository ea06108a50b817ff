#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "egg/matrix_core.hpp"
#include "egg/penalty.hpp"

namespace egg {

using MatrixXd = Eigen::MatrixXd;
using VectorXd = Eigen::VectorXd;

/// How the Γ-step folds in its multiplier: Θ⁺ + Λ₂/ψ (stationarity of the
/// augmented Lagrangian) or Θ⁺ + ψΛ₂.
enum class GammaScaling { DivPsi, MulPsi };

struct AdmmConfig {
  double psi = 0.1;
  double delta = 0.01;
  double tol_primal = 1e-6;
  double tol_dual = 1e-6;
  int max_iter = 5000;
  /// Spectral floor applied to sigma before inverting it for the start point.
  double init_floor = 0.05;
  GammaScaling gamma_scaling = GammaScaling::DivPsi;
  bool record_history = false;

  void validate() const;
};

struct AdmmState {
  MatrixXd theta;
  MatrixXd omega;
  MatrixXd gamma_mat;
  MatrixXd lambda1;
  MatrixXd lambda2;
  int iter = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

/// Unordered pair (k, s) with k < s.
using TraitPair = std::pair<Index, Index>;

struct PrecisionFit {
  MatrixXd precision;
  std::vector<TraitPair> support;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  /// Primal residual after each iteration, when requested.
  std::vector<double> primal_history;
};

/// Pairs whose off-diagonal entry is nonzero.
std::vector<TraitPair> support_of(const MatrixXd& precision);

/// Builds a fit whose support is read off `precision`.
PrecisionFit make_fit(MatrixXd precision, bool converged, int iterations, double objective);

/// tr(ΣΘ) - log det(ΣΘ) - p.
double entropy_loss(const MatrixXd& sigma, const MatrixXd& theta);

/// tr{(ΣΘ - I)ᵀ(ΣΘ - I)}.
double quadratic_loss(const MatrixXd& sigma, const MatrixXd& theta);

/// Entropy loss plus the penalty summed over ordered off-diagonal entries.
double penalized_objective(const MatrixXd& sigma, const MatrixXd& theta, const PenaltySpec& penalty);

// Individual ADMM steps, exposed for testing.

/// Θ⁺ = (-Q + √(Q² + 8ψI)) / 4ψ with Q = Σ + Λ₁ + Λ₂ - ψΩ - ψΓ.
MatrixXd theta_update(const MatrixXd& sigma, const AdmmState& state, double psi);

/// Entrywise prox of Θ⁺ + Λ₁/ψ at tuning λ/ψ; diagonal passes through.
/// Entries outside `mask` (when given) are forced to zero.
MatrixXd omega_update(const MatrixXd& theta_plus, const MatrixXd& lambda1, double psi, const PenaltySpec& penalty,
                      const Eigen::MatrixX<bool>* mask = nullptr);

/// [Θ⁺ + Λ₂/ψ, δ]₊ (or Θ⁺ + ψΛ₂ under MulPsi).
MatrixXd gamma_update(const MatrixXd& theta_plus, const MatrixXd& lambda2, double psi, double delta,
                      GammaScaling scaling = GammaScaling::DivPsi);

/// Λᵢ += ψ (Θ - Ω) and ψ (Θ - Γ) from the state's current iterates.
std::pair<MatrixXd, MatrixXd> dual_update(const AdmmState& state, double psi);

/// Initial state: Θ = Ω = [Σ, init_floor]₊⁻¹, Γ floored at δ, zero multipliers.
AdmmState initial_state(const MatrixXd& sigma, const AdmmConfig& config);

struct SolveOptions {
  /// Start from this state instead of the default initialization.
  const AdmmState* warm_start = nullptr;
  /// Restrict the off-diagonal support to `mask` entries that are true.
  const Eigen::MatrixX<bool>* support_mask = nullptr;
  /// Receives the final state.
  AdmmState* final_state = nullptr;
};

/// Penalized entropy minimization subject to σ_min(Θ) ≥ δ, solved by ADMM.
/// Returns the final Ω iterate; non-convergence is reported, not thrown.
PrecisionFit solve_penalized_entropy(const MatrixXd& sigma, const PenaltySpec& penalty, const AdmmConfig& config,
                                     const SolveOptions& options = {});

/// m·(tr(ΣΘ) - log det Θ) + log(m)·(number of edges).
double bic_score(const MatrixXd& sigma, const PrecisionFit& fit, long m);

/// Counts of converged fits and of those whose σ_min fell below
/// δ - (tol_primal + tol_dual)·p, across the whole process.
struct PdAudit {
  std::uint64_t converged_fits = 0;
  std::uint64_t violations = 0;
};
PdAudit pd_audit();

}  // namespace egg

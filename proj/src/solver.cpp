#include "egg/solver.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>

namespace egg {

namespace {

std::atomic<std::uint64_t> g_converged_fits{0};
std::atomic<std::uint64_t> g_pd_violations{0};

void require_square_match(const MatrixXd& a, const MatrixXd& b, const char* what) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x" << b.cols()
        << ")";
    throw DimensionError(msg.str());
  }
}

// Positive root of 2ψθ² + qθ - 1 = 0, written to avoid cancellation for q > 0.
double theta_root(double q, double psi) {
  const double disc = std::sqrt(q * q + 8.0 * psi);
  if (q >= 0.0) return 2.0 / (q + disc);
  return (disc - q) / (4.0 * psi);
}

}  // namespace

void AdmmConfig::validate() const {
  if (!(psi > 0.0 && psi <= 0.2)) throw ValidationError("admm: psi must lie in (0, 0.2]");
  if (!(delta > 0.0)) throw ValidationError("admm: delta must be positive");
  if (!(tol_primal > 0.0) || !(tol_dual > 0.0)) throw ValidationError("admm: tolerances must be positive");
  if (max_iter < 1) throw ValidationError("admm: max_iter must be positive");
  if (!(init_floor > 0.0)) throw ValidationError("admm: init_floor must be positive");
}

std::vector<TraitPair> support_of(const MatrixXd& precision) {
  std::vector<TraitPair> out;
  for (Index k = 0; k < precision.rows(); ++k)
    for (Index s = k + 1; s < precision.cols(); ++s)
      if (precision(k, s) != 0.0 || precision(s, k) != 0.0) out.emplace_back(k, s);
  return out;
}

PrecisionFit make_fit(MatrixXd precision, bool converged, int iterations, double objective) {
  PrecisionFit fit;
  fit.support = support_of(precision);
  fit.precision = std::move(precision);
  fit.converged = converged;
  fit.iterations = iterations;
  fit.objective = objective;
  return fit;
}

double entropy_loss(const MatrixXd& sigma, const MatrixXd& theta) {
  require_square_match(sigma, theta, "entropy_loss");
  const MatrixXd product = sigma * theta;
  Eigen::PartialPivLU<MatrixXd> lu(product);
  const MatrixXd& packed = lu.matrixLU();
  double sign = lu.permutationP().determinant();
  double log_abs = 0.0;
  for (Index i = 0; i < packed.rows(); ++i) {
    const double u = packed(i, i);
    if (u == 0.0 || !std::isfinite(u)) throw DomainError("entropy_loss: sigma*theta is singular");
    if (u < 0.0) sign = -sign;
    log_abs += std::log(std::abs(u));
  }
  if (sign <= 0.0) throw DomainError("entropy_loss: det(sigma*theta) is not positive");
  return product.trace() - log_abs - static_cast<double>(sigma.rows());
}

double quadratic_loss(const MatrixXd& sigma, const MatrixXd& theta) {
  require_square_match(sigma, theta, "quadratic_loss");
  const MatrixXd r = sigma * theta - MatrixXd::Identity(sigma.rows(), sigma.cols());
  return (r.transpose() * r).trace();
}

double penalized_objective(const MatrixXd& sigma, const MatrixXd& theta, const PenaltySpec& penalty) {
  double value = entropy_loss(sigma, theta);
  for (Index k = 0; k < theta.rows(); ++k)
    for (Index s = 0; s < theta.cols(); ++s)
      if (k != s) value += penalty_value(theta(k, s), penalty);
  return value;
}

MatrixXd theta_update(const MatrixXd& sigma, const AdmmState& state, double psi) {
  if (!(psi > 0.0)) throw DomainError("theta_update: psi must be positive");
  const MatrixXd q = sigma + state.lambda1 + state.lambda2 - psi * state.omega - psi * state.gamma_mat;
  return spectral_map(symmetrize(q), [psi](double v) { return theta_root(v, psi); });
}

MatrixXd omega_update(const MatrixXd& theta_plus, const MatrixXd& lambda1, double psi, const PenaltySpec& penalty,
                      const Eigen::MatrixX<bool>* mask) {
  if (!(psi > 0.0)) throw DomainError("omega_update: psi must be positive");
  const Index p = theta_plus.rows();
  MatrixXd out(p, p);
  const double scale = 1.0 / psi;
  for (Index s = 0; s < p; ++s) {
    out(s, s) = theta_plus(s, s) + lambda1(s, s) / psi;
    for (Index k = s + 1; k < p; ++k) {
      double v = 0.0;
      if (mask == nullptr || (*mask)(k, s)) {
        const double target = 0.5 * ((theta_plus(k, s) + theta_plus(s, k)) + (lambda1(k, s) + lambda1(s, k)) / psi);
        v = penalty_prox(target, penalty, scale);
      }
      out(k, s) = v;
      out(s, k) = v;
    }
  }
  return out;
}

MatrixXd gamma_update(const MatrixXd& theta_plus, const MatrixXd& lambda2, double psi, double delta,
                      GammaScaling scaling) {
  if (!(psi > 0.0)) throw DomainError("gamma_update: psi must be positive");
  const MatrixXd target = scaling == GammaScaling::DivPsi ? MatrixXd(theta_plus + lambda2 / psi)
                                                          : MatrixXd(theta_plus + psi * lambda2);
  return clip_eigenvalues(symmetrize(target), delta);
}

std::pair<MatrixXd, MatrixXd> dual_update(const AdmmState& state, double psi) {
  MatrixXd l1 = symmetrize(state.lambda1 + psi * (state.theta - state.omega));
  MatrixXd l2 = symmetrize(state.lambda2 + psi * (state.theta - state.gamma_mat));
  return {std::move(l1), std::move(l2)};
}

AdmmState initial_state(const MatrixXd& sigma, const AdmmConfig& config) {
  const Index p = sigma.rows();
  AdmmState s;
  s.theta = inverse_spd(clip_eigenvalues(sigma, config.init_floor));
  s.omega = s.theta;
  s.gamma_mat = clip_eigenvalues(s.theta, config.delta);
  s.lambda1 = MatrixXd::Zero(p, p);
  s.lambda2 = MatrixXd::Zero(p, p);
  return s;
}

PrecisionFit solve_penalized_entropy(const MatrixXd& sigma, const PenaltySpec& penalty, const AdmmConfig& config,
                                     const SolveOptions& options) {
  penalty.validate();
  config.validate();
  if (sigma.rows() != sigma.cols() || sigma.rows() < 1) throw DimensionError("solve: sigma must be square");
  if (!is_symmetric(sigma)) throw DomainError("solve: sigma is not symmetric");
  if (!(min_eigenvalue(sigma) > 0.0)) throw DomainError("solve: sigma is not positive definite");

  const Index p = sigma.rows();
  AdmmState state = options.warm_start != nullptr ? *options.warm_start : initial_state(sigma, config);
  if (state.theta.rows() != p) throw DimensionError("solve: warm start has the wrong dimension");
  const double psi = config.psi;
  const double delta = config.delta;
  const MatrixXd identity = MatrixXd::Identity(p, p);

  // Same arithmetic as theta_update / omega_update / gamma_update /
  // dual_update, on preallocated buffers.
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(p);
  Eigen::LLT<MatrixXd> llt(p);
  MatrixXd q(p, p), omega(p, p), gamma(p, p), target(p, p);
  VectorXd mapped(p);

  std::vector<double> history;
  bool converged = false;
  int iter = 0;
  while (iter < config.max_iter) {
    ++iter;
    q.noalias() = sigma + state.lambda1 + state.lambda2 - psi * (state.omega + state.gamma_mat);
    eig.compute(q);
    if (eig.info() != Eigen::Success) throw DomainError("solve: eigensolver failed in the theta step");
    for (Index j = 0; j < p; ++j) mapped(j) = theta_root(eig.eigenvalues()(j), psi);
    state.theta.noalias() = eig.eigenvectors() * mapped.asDiagonal() * eig.eigenvectors().transpose();
    state.theta = symmetrize(state.theta);

    omega = omega_update(state.theta, state.lambda1, psi, penalty, options.support_mask);

    if (config.gamma_scaling == GammaScaling::DivPsi)
      target.noalias() = state.theta + state.lambda2 / psi;
    else
      target.noalias() = state.theta + psi * state.lambda2;
    target = symmetrize(target);
    // Cholesky of target - δI succeeds iff the floor is inactive.
    llt.compute(target - delta * identity);
    if (llt.info() == Eigen::Success) {
      gamma = target;
    } else {
      gamma = clip_eigenvalues(target, delta);
    }

    const double change = std::max(max_abs(omega - state.omega), max_abs(gamma - state.gamma_mat));
    state.omega.swap(omega);
    state.gamma_mat.swap(gamma);
    state.lambda1 += psi * (state.theta - state.omega);
    state.lambda2 += psi * (state.theta - state.gamma_mat);

    state.primal_residual = std::max(max_abs(state.theta - state.omega), max_abs(state.theta - state.gamma_mat));
    state.dual_residual = psi * change;
    state.iter = iter;
    if (config.record_history) history.push_back(state.primal_residual);
    if (state.primal_residual <= config.tol_primal && state.dual_residual <= config.tol_dual) {
      converged = true;
      break;
    }
  }

  double objective = std::numeric_limits<double>::infinity();
  try {
    objective = penalized_objective(sigma, state.omega, penalty);
  } catch (const DomainError&) {
    // Ω not PD: only possible for an unconverged run.
  }

  if (converged) {
    g_converged_fits.fetch_add(1, std::memory_order_relaxed);
    const double bound = config.delta - (config.tol_primal + config.tol_dual) * static_cast<double>(p);
    if (min_eigenvalue(state.omega) < bound) g_pd_violations.fetch_add(1, std::memory_order_relaxed);
  }

  PrecisionFit fit = make_fit(state.omega, converged, iter, objective);
  fit.primal_history = std::move(history);
  if (options.final_state != nullptr) *options.final_state = std::move(state);
  return fit;
}

double bic_score(const MatrixXd& sigma, const PrecisionFit& fit, long m) {
  if (m < 1) throw DomainError("bic_score: m must be positive");
  require_square_match(sigma, fit.precision, "bic_score");
  const double md = static_cast<double>(m);
  const double fit_term = (sigma * fit.precision).trace() - log_det_spd(fit.precision);
  Index nonzero = 0;
  for (Index k = 0; k < fit.precision.rows(); ++k)
    for (Index s = 0; s < fit.precision.cols(); ++s)
      if (k != s && fit.precision(k, s) != 0.0) ++nonzero;
  return md * fit_term + std::log(md) * static_cast<double>(nonzero) / 2.0;
}

PdAudit pd_audit() {
  return {g_converged_fits.load(std::memory_order_relaxed), g_pd_violations.load(std::memory_order_relaxed)};
}

}  // namespace egg

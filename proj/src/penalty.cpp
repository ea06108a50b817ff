#include "egg/penalty.hpp"

#include <cmath>

#include "egg/errors.hpp"

namespace egg {

const char* to_string(PenaltyFamily family) { return family == PenaltyFamily::Mcp ? "mcp" : "lasso"; }

PenaltyFamily penalty_from_string(const std::string& name) {
  if (name == "mcp") return PenaltyFamily::Mcp;
  if (name == "lasso") return PenaltyFamily::Lasso;
  throw ValidationError("unknown penalty '" + name + "' (expected mcp or lasso)");
}

void PenaltySpec::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("penalty: lambda must be non-negative");
  if (family == PenaltyFamily::Mcp && !(gamma > 1.0)) throw ValidationError("penalty: MCP gamma must exceed 1");
}

double soft_threshold(double x, double lambda) {
  const double shrunk = std::abs(x) - lambda;
  if (shrunk <= 0.0) return 0.0;
  return std::copysign(shrunk, x);
}

double mcp_penalty(double x, double lambda, double gamma) {
  const double a = std::abs(x);
  if (a <= gamma * lambda) return lambda * a - a * a / (2.0 * gamma);
  return 0.5 * gamma * lambda * lambda;
}

double mcp_prox(double x, double lambda, double gamma) {
  if (std::abs(x) > lambda * gamma) return x;
  return gamma / (gamma - 1.0) * soft_threshold(x, lambda);
}

double penalty_value(double x, const PenaltySpec& penalty) {
  if (penalty.family == PenaltyFamily::Lasso) return penalty.lambda * std::abs(x);
  return mcp_penalty(x, penalty.lambda, penalty.gamma);
}

double penalty_prox(double x, const PenaltySpec& penalty, double scale) {
  const double lambda = penalty.lambda * scale;
  if (penalty.family == PenaltyFamily::Lasso) return soft_threshold(x, lambda);
  return mcp_prox(x, lambda, penalty.gamma);
}

}  // namespace egg

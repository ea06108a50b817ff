#pragma once

#include <string>

#include "egg/errors.hpp"

namespace egg {

enum class PenaltyFamily { Mcp, Lasso };

const char* to_string(PenaltyFamily family);
PenaltyFamily penalty_from_string(const std::string& name);

struct PenaltySpec {
  PenaltyFamily family = PenaltyFamily::Mcp;
  double lambda = 0.0;
  double gamma = 3.0;  // concavity, MCP only

  static PenaltySpec mcp(double lambda, double gamma = 3.0) { return {PenaltyFamily::Mcp, lambda, gamma}; }
  static PenaltySpec lasso(double lambda) { return {PenaltyFamily::Lasso, lambda, 3.0}; }

  PenaltySpec with_lambda(double l) const { return {family, l, gamma}; }

  /// Throws ValidationError unless lambda >= 0 and, for MCP, gamma > 1.
  void validate() const;
};

/// sign(x) · max(|x| - λ, 0)
double soft_threshold(double x, double lambda);

/// MCP value λ∫₀^|x| (1 - t/(γλ))₊ dt.
double mcp_penalty(double x, double lambda, double gamma);

/// argmin_θ ½(x - θ)² + P^MCP_{λ,γ}(θ).
double mcp_prox(double x, double lambda, double gamma);

double penalty_value(double x, const PenaltySpec& penalty);

/// argmin_θ ½(x - θ)² + P_{λ·scale}(θ), with γ held fixed for MCP.
double penalty_prox(double x, const PenaltySpec& penalty, double scale = 1.0);

}  // namespace egg

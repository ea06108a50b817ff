#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

namespace egg::stats {

/// Regularized upper incomplete gamma Q(a, x) = Γ(a, x) / Γ(a).
double gamma_q(double a, double x);

/// Regularized lower incomplete gamma P(a, x) = 1 - Q(a, x).
double gamma_p(double a, double x);

/// Upper tail P(X > x) for X ~ χ²(dof).
double chi_square_sf(double x, double dof);

/// Two-sided normal p-value 2·(1 - Φ(|z|)).
double normal_two_sided_p(double z);

/// Median; even lengths take the midpoint of the two central order statistics.
double median(std::span<const double> x);

/// 1.483 · median |x_j - median(x)|.
double mad_scale(std::span<const double> x);

inline constexpr double kMadConstant = 1.483;

/// Ranks 1..m with ties given their average rank.
std::vector<double> midranks(std::span<const double> x);

}  // namespace egg::stats

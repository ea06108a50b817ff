#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "egg/covariance.hpp"
#include "egg/glasso.hpp"
#include "egg/selection.hpp"
#include "egg/solver.hpp"

namespace egg::sim {

enum class ArStructure { Ar1, Ar3 };

const char* to_string(ArStructure s);
ArStructure structure_from_string(const std::string& name);
std::vector<double> default_band(ArStructure s);

struct ArPrecision {
  MatrixXd matrix;
  /// Factor applied to the off-diagonal band to reach σ_min ≥ 0.05 (1 if none).
  double scale = 1.0;
};

/// Unit diagonal, band[l-1] on the lag-l diagonals, zero beyond the band.
ArPrecision build_ar_precision(Index p, const std::vector<double>& band);

/// Unit diagonal; `within` inside blocks and `between` across them.
MatrixXd build_overlap_matrix(const std::vector<Index>& block_sizes, double within, double between);

struct SimulationDesign {
  Index p = 10;
  ArStructure structure = ArStructure::Ar1;
  /// Empty means default_band(structure).
  std::vector<double> band_coefficients;
  /// Replaces the AR construction when set.
  std::optional<MatrixXd> precision_override;
  Index m = 1000;
  /// Null variants; 0 means 5·m.
  Index null_count = 0;
  long n = 200000;
  /// Per-trait sample sizes; empty means n for every trait.
  std::vector<long> sample_sizes;
  double heritability = 0.2;
  /// Per-trait heritabilities; empty means `heritability` for every trait.
  std::vector<double> heritabilities;
  /// Empty means two equal blocks, 0.9 within and 0.3 between.
  MatrixXd overlap;
  double phenotypic_cov = 0.5;
  double pleiotropy_fraction = 0.0;
  double pleiotropy_shift_multiplier = 5.0;
  std::uint64_t seed = 1;

  Index nulls() const { return null_count > 0 ? null_count : 5 * m; }
  std::vector<long> trait_sample_sizes() const;
  std::vector<double> trait_heritabilities() const;
  MatrixXd overlap_matrix() const;
  MatrixXd base_precision() const;
  void validate() const;
};

struct SimulatedData {
  SummaryPanel panel;
  NullPanel nulls;
  /// Correlation-scale precision with the exact zero pattern of the design.
  MatrixXd truth_precision;
  MatrixXd truth_correlation;
  MatrixXd sigma_beta;
  /// Error covariance on the Z scale (unit diagonal).
  MatrixXd error_correlation;
  /// sd of √n_k β_k, the Z-scale effect size per trait.
  VectorXd effect_sd;
  /// True when the base precision's inverse had a non-constant diagonal.
  bool per_trait_rescaled = false;
};

SimulatedData simulate_summary_panel(const SimulationDesign& design);

struct PleiotropyResult {
  SummaryPanel panel;
  std::vector<Index> rows;  // sorted
};

/// Adds ±multiplier·effect_sd_k to every trait of ⌊fraction·m⌋ random rows,
/// one sign per row.
PleiotropyResult inject_pleiotropy(const SummaryPanel& panel, const SimulationDesign& design, const VectorXd& effect_sd);

struct EdgeErrors {
  double t1 = 0.0;
  double t2 = 0.0;
};

/// False-positive and false-negative ordered off-diagonal counts over p².
EdgeErrors edge_error_rates(const PrecisionFit& estimate, const MatrixXd& truth);

struct SimMetrics {
  double entropy = 0.0;
  double quadratic = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
};

SimMetrics score(const PrecisionFit& estimate, const MatrixXd& truth_correlation, const MatrixXd& truth_precision);

enum class Method { EggPearson, EggSpearman, GlassoPearson, GlassoSpearman };

const char* to_string(Method m);
Method method_from_string(const std::string& name);

struct MethodConfig {
  SelectionConfig selection;
  AdmmConfig admm;
  PenaltySpec penalty = PenaltySpec::mcp(0.0, 3.0);
  std::vector<double> glasso_grid;
  GlassoConfig glasso;
  double sigma_floor = 0.05;
};

/// Desk-scale defaults used by the simulation CLI and acceptance runs.
MethodConfig default_method_config();

struct MethodOutcome {
  PrecisionFit fit;
  double lambda = 0.0;
};

/// Runs one estimator on one simulated data set.
MethodOutcome run_method(Method method, const SimulatedData& data, const MethodConfig& config, std::uint64_t seed);

struct ReplicationRow {
  Method method = Method::EggPearson;
  int rep = 0;
  Index m = 0;
  long n = 0;
  double pleiotropy = 0.0;
  SimMetrics metrics;
  bool converged = false;
  double lambda = 0.0;
};

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

struct MethodSummary {
  Method method = Method::EggPearson;
  Quartiles entropy, quadratic, t1, t2;
  int unconverged = 0;
};

struct ReplicationTable {
  std::vector<ReplicationRow> rows;
  std::vector<MethodSummary> summaries;

  const MethodSummary& summary(Method m) const;
};

/// Linear-interpolation quantile of `values` at probability q.
double quantile(std::vector<double> values, double q);

/// Per-rep seed: seed ⊕ rep, with simulation and method seeds derived from it.
std::uint64_t rep_seed(std::uint64_t seed, int rep);

ReplicationTable run_replication(const SimulationDesign& design, const std::vector<Method>& methods, int reps,
                                 std::uint64_t seed, const MethodConfig& config);

/// Tab-separated, one row per (method, rep).
void write_results_tsv(const ReplicationTable& table, std::ostream& out);

}  // namespace egg::sim

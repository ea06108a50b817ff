#include "egg/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "egg/rng.hpp"

namespace egg::sim {

namespace {

constexpr std::uint64_t kPanelStream = 0x50414e;  // "PAN"
constexpr std::uint64_t kPleioStream = 0x504c45;  // "PLE"
constexpr std::uint64_t kMethodStream = 0x4d4554;  // "MET"
constexpr double kMinPrecisionEigen = 0.05;

MatrixXd lower_cholesky(const MatrixXd& a, const char* what) {
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw DomainError(std::string(what) + " is not positive definite");
  return llt.matrixL();
}

MatrixXd standard_normals(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  MatrixXd out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < cols; ++k) out(i, k) = normal(rng);
  return out;
}

}  // namespace

const char* to_string(ArStructure s) { return s == ArStructure::Ar1 ? "ar1" : "ar3"; }

ArStructure structure_from_string(const std::string& name) {
  if (name == "ar1") return ArStructure::Ar1;
  if (name == "ar3") return ArStructure::Ar3;
  throw ValidationError("unknown structure '" + name + "' (expected ar1 or ar3)");
}

std::vector<double> default_band(ArStructure s) {
  if (s == ArStructure::Ar1) return {0.5};
  return {0.4, 0.2, 0.1};
}

ArPrecision build_ar_precision(Index p, const std::vector<double>& band) {
  if (p < 1) throw ValidationError("build_ar_precision: p must be positive");
  if (band.empty()) throw ValidationError("build_ar_precision: need at least one band coefficient");
  MatrixXd offdiag = MatrixXd::Zero(p, p);
  for (std::size_t lag = 1; lag <= band.size(); ++lag)
    for (Index k = 0; k + static_cast<Index>(lag) < p; ++k) {
      offdiag(k, k + static_cast<Index>(lag)) = band[lag - 1];
      offdiag(k + static_cast<Index>(lag), k) = band[lag - 1];
    }
  ArPrecision out;
  const MatrixXd identity = MatrixXd::Identity(p, p);
  out.matrix = identity + offdiag;
  const double lowest = min_eigenvalue(out.matrix);
  if (lowest < kMinPrecisionEigen) {
    // σ_min(I + cB) = 1 + c·σ_min(B), so the required factor is closed form.
    out.scale = (1.0 - kMinPrecisionEigen) / (1.0 - lowest);
    out.matrix = identity + out.scale * offdiag;
  }
  for (double c : band)
    if (std::abs(c * out.scale) >= 1.0)
      throw DomainError("build_ar_precision: band coefficient cannot be rescaled below 1 in magnitude");
  return out;
}

MatrixXd build_overlap_matrix(const std::vector<Index>& block_sizes, double within, double between) {
  if (!(within >= 0.0 && within <= 1.0) || !(between >= 0.0 && between <= 1.0))
    throw ValidationError("build_overlap_matrix: fractions must lie in [0, 1]");
  if (block_sizes.empty()) throw ValidationError("build_overlap_matrix: no blocks");
  std::vector<Index> block_of;
  for (std::size_t b = 0; b < block_sizes.size(); ++b) {
    if (block_sizes[b] < 1) throw ValidationError("build_overlap_matrix: block sizes must be positive");
    block_of.insert(block_of.end(), static_cast<std::size_t>(block_sizes[b]), static_cast<Index>(b));
  }
  const auto p = static_cast<Index>(block_of.size());
  MatrixXd out(p, p);
  for (Index k = 0; k < p; ++k)
    for (Index s = 0; s < p; ++s) {
      if (k == s)
        out(k, s) = 1.0;
      else
        out(k, s) = block_of[static_cast<std::size_t>(k)] == block_of[static_cast<std::size_t>(s)] ? within : between;
    }
  return out;
}

std::vector<long> SimulationDesign::trait_sample_sizes() const {
  if (!sample_sizes.empty()) return sample_sizes;
  return std::vector<long>(static_cast<std::size_t>(p), n);
}

std::vector<double> SimulationDesign::trait_heritabilities() const {
  if (!heritabilities.empty()) return heritabilities;
  return std::vector<double>(static_cast<std::size_t>(p), heritability);
}

MatrixXd SimulationDesign::overlap_matrix() const {
  if (overlap.size() > 0) return overlap;
  const Index first = p / 2;
  if (first == 0) return build_overlap_matrix({p}, 0.9, 0.3);
  return build_overlap_matrix({first, p - first}, 0.9, 0.3);
}

MatrixXd SimulationDesign::base_precision() const {
  if (precision_override) return *precision_override;
  const auto band = band_coefficients.empty() ? default_band(structure) : band_coefficients;
  const std::size_t order = structure == ArStructure::Ar1 ? 1 : 3;
  if (band.size() != order) throw ValidationError("design: band coefficient count must equal the AR order");
  return build_ar_precision(p, band).matrix;
}

void SimulationDesign::validate() const {
  if (p < 2) throw ValidationError("design: need at least 2 traits");
  if (m < 3) throw ValidationError("design: need at least 3 causal variants");
  if (n < 1) throw ValidationError("design: sample size must be positive");
  if (!sample_sizes.empty() && static_cast<Index>(sample_sizes.size()) != p)
    throw ValidationError("design: sample size count must equal p");
  for (long v : trait_sample_sizes())
    if (v < 1) throw ValidationError("design: sample sizes must be positive");
  if (!heritabilities.empty() && static_cast<Index>(heritabilities.size()) != p)
    throw ValidationError("design: heritability count must equal p");
  for (double h : trait_heritabilities())
    if (!(h > 0.0 && h < 1.0)) throw ValidationError("design: heritability must lie in (0, 1)");
  const MatrixXd o = overlap_matrix();
  if (o.rows() != p || o.cols() != p) throw ValidationError("design: overlap matrix must be p x p");
  if (!is_symmetric(o)) throw ValidationError("design: overlap matrix must be symmetric");
  for (Index k = 0; k < p; ++k) {
    if (o(k, k) != 1.0) throw ValidationError("design: overlap matrix must have a unit diagonal");
    for (Index s = 0; s < p; ++s)
      if (!(o(k, s) >= 0.0 && o(k, s) <= 1.0)) throw ValidationError("design: overlap fractions must lie in [0, 1]");
  }
  if (precision_override && (precision_override->rows() != p || precision_override->cols() != p))
    throw ValidationError("design: precision override must be p x p");
  if (!(pleiotropy_fraction >= 0.0 && pleiotropy_fraction < 1.0))
    throw ValidationError("design: pleiotropy fraction must lie in [0, 1)");
}

SimulatedData simulate_summary_panel(const SimulationDesign& design) {
  design.validate();
  const Index p = design.p;
  const Index m = design.m;
  const auto sizes = design.trait_sample_sizes();
  const auto h2 = design.trait_heritabilities();

  const MatrixXd theta = design.base_precision();
  const MatrixXd cov = inverse_spd(theta);
  const VectorXd cov_diag = cov.diagonal();
  const bool rescaled = (cov_diag.array() != cov_diag(0)).any();
  const MatrixXd corr = cov2cor(cov);

  // Θ_corr = S⁻¹ Θ S⁻¹ with S = diag(1/√diag(Θ⁻¹)); keeps Θ's exact zeros.
  const VectorXd root_diag = cov_diag.cwiseSqrt();
  MatrixXd truth_precision = symmetrize(root_diag.asDiagonal() * theta * root_diag.asDiagonal());
  for (Index k = 0; k < p; ++k)
    for (Index s = 0; s < p; ++s)
      if (theta(k, s) == 0.0) truth_precision(k, s) = 0.0;

  VectorXd beta_sd(p);
  for (Index k = 0; k < p; ++k) beta_sd(k) = std::sqrt(h2[static_cast<std::size_t>(k)] / static_cast<double>(m));
  MatrixXd sigma_beta = symmetrize(beta_sd.asDiagonal() * corr * beta_sd.asDiagonal());
  for (Index k = 0; k < p; ++k) sigma_beta(k, k) = beta_sd(k) * beta_sd(k);

  const MatrixXd overlap = design.overlap_matrix();
  MatrixXd error_corr = MatrixXd::Identity(p, p);
  for (Index k = 0; k < p; ++k)
    for (Index s = 0; s < p; ++s)
      if (k != s) error_corr(k, s) = overlap(k, s) * design.phenotypic_cov;

  VectorXd root_n(p);
  for (Index k = 0; k < p; ++k) root_n(k) = std::sqrt(static_cast<double>(sizes[static_cast<std::size_t>(k)]));

  auto rng = make_rng(design.seed, kPanelStream, 0);
  const MatrixXd l_beta = lower_cholesky(sigma_beta, "genetic covariance");
  const MatrixXd l_err = lower_cholesky(error_corr, "error correlation");
  const MatrixXd beta = standard_normals(m, p, rng) * l_beta.transpose();
  const MatrixXd err = standard_normals(m, p, rng) * l_err.transpose();
  MatrixXd z = beta * root_n.asDiagonal();
  z += err;
  const MatrixXd nulls = standard_normals(design.nulls(), p, rng) * l_err.transpose();

  std::vector<std::string> traits;
  for (Index k = 0; k < p; ++k) traits.push_back("T" + std::to_string(k + 1));

  SimulatedData out{SummaryPanel(std::move(z), traits, sizes),
                    NullPanel(nulls),
                    std::move(truth_precision),
                    corr,
                    std::move(sigma_beta),
                    std::move(error_corr),
                    beta_sd.cwiseProduct(root_n),
                    rescaled};
  return out;
}

PleiotropyResult inject_pleiotropy(const SummaryPanel& panel, const SimulationDesign& design,
                                   const VectorXd& effect_sd) {
  if (!(design.pleiotropy_fraction >= 0.0 && design.pleiotropy_fraction < 1.0))
    throw ValidationError("inject_pleiotropy: fraction must lie in [0, 1)");
  if (effect_sd.size() != panel.dim()) throw DimensionError("inject_pleiotropy: effect_sd length must equal p");
  const Index m = panel.variants();
  const auto count = static_cast<Index>(std::floor(design.pleiotropy_fraction * static_cast<double>(m)));
  if (count == 0) return {panel, {}};
  auto rng = make_rng(design.seed, kPleioStream, 0);
  auto rows = sample_without_replacement(m, count, rng);
  MatrixXd z = panel.z();
  std::bernoulli_distribution coin(0.5);
  for (Index row : rows) {
    const double sign = coin(rng) ? 1.0 : -1.0;
    z.row(row) += (sign * design.pleiotropy_shift_multiplier * effect_sd).transpose();
  }
  return {SummaryPanel(std::move(z), panel.traits(), panel.sample_sizes()), std::move(rows)};
}

EdgeErrors edge_error_rates(const PrecisionFit& estimate, const MatrixXd& truth) {
  const Index p = truth.rows();
  if (estimate.precision.rows() != p || estimate.precision.cols() != p || truth.cols() != p)
    throw DimensionError("edge_error_rates: dimension mismatch");
  Eigen::MatrixX<bool> selected = Eigen::MatrixX<bool>::Constant(p, p, false);
  for (const auto& [k, s] : estimate.support) {
    selected(k, s) = true;
    selected(s, k) = true;
  }
  Index false_pos = 0;
  Index false_neg = 0;
  for (Index k = 0; k < p; ++k)
    for (Index s = 0; s < p; ++s) {
      if (k == s) continue;
      const bool edge = truth(k, s) != 0.0;
      if (selected(k, s) && !edge) ++false_pos;
      if (!selected(k, s) && edge) ++false_neg;
    }
  const double denom = static_cast<double>(p * p);
  return {static_cast<double>(false_pos) / denom, static_cast<double>(false_neg) / denom};
}

SimMetrics score(const PrecisionFit& estimate, const MatrixXd& truth_correlation, const MatrixXd& truth_precision) {
  SimMetrics out;
  try {
    out.entropy = entropy_loss(truth_correlation, estimate.precision);
  } catch (const DomainError&) {
    out.entropy = std::numeric_limits<double>::infinity();
  }
  out.quadratic = quadratic_loss(truth_correlation, estimate.precision);
  const auto e = edge_error_rates(estimate, truth_precision);
  out.t1 = e.t1;
  out.t2 = e.t2;
  return out;
}

const char* to_string(Method m) {
  switch (m) {
    case Method::EggPearson: return "EGG-Pearson";
    case Method::EggSpearman: return "EGG-Spearman";
    case Method::GlassoPearson: return "Glasso-Pearson";
    case Method::GlassoSpearman: return "Glasso-Spearman";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  for (Method m : {Method::EggPearson, Method::EggSpearman, Method::GlassoPearson, Method::GlassoSpearman}) {
    std::string label = to_string(m);
    std::string lower;
    for (char c : label) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (name == label || name == lower) return m;
  }
  throw ValidationError("unknown method '" + name + "'");
}

MethodConfig default_method_config() {
  MethodConfig c;
  c.selection.lambda_grid = linear_grid(0.02, 0.4, 10);
  c.selection.subsamples = 100;
  c.selection.cv_splits = 5;
  c.glasso_grid = linear_grid(0.01, 0.3, 15);
  return c;
}

MethodOutcome run_method(Method method, const SimulatedData& data, const MethodConfig& config, std::uint64_t seed) {
  const bool spearman = method == Method::EggSpearman || method == Method::GlassoSpearman;
  const EstimatorKind kind = spearman ? EstimatorKind::Spearman : EstimatorKind::Pearson;
  if (method == Method::EggPearson || method == Method::EggSpearman) {
    CovarianceSource source{data.panel.z(), estimate_error_covariance(data.nulls).matrix, kind, config.sigma_floor,
                            true};
    SelectionConfig selection = config.selection;
    selection.seed = seed;
    const CvResult cv = cross_validate_lambda(source, selection, config.penalty, config.admm);
    StabilityResult st = stability_select(source, cv.lambda_cv, selection, config.penalty, config.admm);
    return {std::move(st.pruned_fit), cv.lambda_cv};
  }
  const MatrixXd sigma = correlation_input(data.panel.z(), nullptr, kind, config.sigma_floor);
  BicPathResult best = glasso_bic(sigma, config.glasso_grid, static_cast<long>(data.panel.variants()), config.glasso);
  return {std::move(best.fit), best.lambda};
}

const MethodSummary& ReplicationTable::summary(Method m) const {
  for (const auto& s : summaries)
    if (s.method == m) return s;
  throw ValidationError(std::string("no summary for method ") + to_string(m));
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::uint64_t rep_seed(std::uint64_t seed, int rep) { return seed ^ static_cast<std::uint64_t>(rep); }

ReplicationTable run_replication(const SimulationDesign& design, const std::vector<Method>& methods, int reps,
                                 std::uint64_t seed, const MethodConfig& config) {
  if (reps < 1) throw ValidationError("run_replication: reps must be positive");
  if (methods.empty()) throw ValidationError("run_replication: no methods");
  ReplicationTable table;
  for (int rep = 0; rep < reps; ++rep) {
    SimulationDesign d = design;
    d.seed = rep_seed(seed, rep);
    SimulatedData data = simulate_summary_panel(d);
    if (d.pleiotropy_fraction > 0.0) {
      auto contaminated = inject_pleiotropy(data.panel, d, data.effect_sd);
      data.panel = std::move(contaminated.panel);
    }
    const std::uint64_t method_seed = splitmix64(d.seed ^ kMethodStream);
    for (Method method : methods) {
      ReplicationRow row;
      row.method = method;
      row.rep = rep;
      row.m = d.m;
      row.n = d.n;
      row.pleiotropy = d.pleiotropy_fraction;
      try {
        MethodOutcome outcome = run_method(method, data, config, method_seed);
        row.metrics = score(outcome.fit, data.truth_correlation, data.truth_precision);
        row.converged = outcome.fit.converged;
        row.lambda = outcome.lambda;
      } catch (const std::exception&) {
        const double inf = std::numeric_limits<double>::infinity();
        row.metrics = {inf, inf, 1.0, 1.0};
        row.converged = false;
      }
      table.rows.push_back(row);
    }
  }
  for (Method method : methods) {
    MethodSummary s;
    s.method = method;
    std::vector<double> e, q, a, b;
    for (const auto& row : table.rows) {
      if (row.method != method) continue;
      e.push_back(row.metrics.entropy);
      q.push_back(row.metrics.quadratic);
      a.push_back(row.metrics.t1);
      b.push_back(row.metrics.t2);
      if (!row.converged) ++s.unconverged;
    }
    auto quart = [](const std::vector<double>& v) { return Quartiles{quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75)}; };
    s.entropy = quart(e);
    s.quadratic = quart(q);
    s.t1 = quart(a);
    s.t2 = quart(b);
    table.summaries.push_back(s);
  }
  return table;
}

void write_results_tsv(const ReplicationTable& table, std::ostream& out) {
  out << "method\trep\tm\tn\tpleio\tentropy\tquadratic\tt1\tt2\tconverged\n";
  for (const auto& r : table.rows) {
    out << to_string(r.method) << '\t' << r.rep << '\t' << r.m << '\t' << r.n << '\t' << r.pleiotropy << '\t'
        << r.metrics.entropy << '\t' << r.metrics.quadratic << '\t' << r.metrics.t1 << '\t' << r.metrics.t2 << '\t'
        << (r.converged ? 1 : 0) << '\n';
  }
}

}  // namespace egg::sim

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "egg/errors.hpp"
#include "egg/fixture.hpp"
#include "egg/pipeline.hpp"
#include "egg/report.hpp"
#include "egg/simulation.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kData = 2, kNotConverged = 3 };

// Options shared by several subcommands. Optional fields keep each
// subcommand's own default unless the user (or the config file) sets them.
struct Options {
  std::vector<std::string> trait_files;
  std::vector<std::string> trait_labels;
  double null_p_threshold = 0.05;
  double joint_p_threshold = 5e-8;
  long long prune_window_bp = 1'000'000;
  std::string estimator = "spearman";
  double sigma_floor = 0.05;
  std::string out_dir = "egg_out";
  bool strict = false;

  std::string penalty = "mcp";
  double mcp_gamma = 3.0;

  double psi = 0.1;
  double delta = 0.01;
  double tol_primal = 1e-6;
  double tol_dual = 1e-6;
  int max_iter = 5000;
  std::string gamma_update_scaling = "div-psi";

  std::optional<std::vector<double>> lambda_grid;
  std::optional<int> subsamples;
  std::optional<int> cv_splits;
  double c_s = 0.5;
  double c_t = 0.95;
  std::uint64_t seed = 1;

  long long p = 10;
  std::string structure = "ar1";
  std::vector<double> band;
  long long m = 1000;
  long long null_count = 0;
  long n = 200000;
  double heritability = 0.2;
  double phenotypic_cov = 0.5;
  double overlap_within = 0.9;
  double overlap_between = 0.3;
  double pleiotropy_fraction = 0.0;
  double shift_multiplier = 5.0;
  int reps = 1;
  std::vector<std::string> methods{"EGG-Pearson", "EGG-Spearman", "Glasso-Pearson", "Glasso-Spearman"};
  std::string results;
  std::string write_gwas;
};

egg::AdmmConfig admm_config(const Options& o) {
  egg::AdmmConfig a;
  a.psi = o.psi;
  a.delta = o.delta;
  a.tol_primal = o.tol_primal;
  a.tol_dual = o.tol_dual;
  a.max_iter = o.max_iter;
  if (o.gamma_update_scaling == "div-psi")
    a.gamma_scaling = egg::GammaScaling::DivPsi;
  else if (o.gamma_update_scaling == "mul-psi")
    a.gamma_scaling = egg::GammaScaling::MulPsi;
  else
    throw egg::ValidationError("gamma-update-scaling must be div-psi or mul-psi");
  return a;
}

egg::PenaltySpec penalty_spec(const Options& o) {
  egg::PenaltySpec spec;
  spec.family = egg::penalty_from_string(o.penalty);
  spec.gamma = o.mcp_gamma;
  return spec;
}

void apply_selection(const Options& o, egg::SelectionConfig& sel) {
  if (o.lambda_grid) sel.lambda_grid = *o.lambda_grid;
  if (o.subsamples) sel.subsamples = *o.subsamples;
  if (o.cv_splits) sel.cv_splits = *o.cv_splits;
  sel.c_s = o.c_s;
  sel.c_t = o.c_t;
  sel.seed = o.seed;
}

egg::AnalysisConfig analysis_config(const Options& o) {
  egg::AnalysisConfig c;
  c.trait_files = o.trait_files;
  c.trait_labels = o.trait_labels;
  c.null_p_threshold = o.null_p_threshold;
  c.joint_p_threshold = o.joint_p_threshold;
  c.prune_window_bp = o.prune_window_bp;
  c.estimator = egg::estimator_from_string(o.estimator);
  c.penalty = penalty_spec(o);
  c.admm = admm_config(o);
  c.selection.lambda_grid = egg::default_lambda_grid();
  apply_selection(o, c.selection);
  c.sigma_floor = o.sigma_floor;
  c.out_dir = o.out_dir;
  c.strict = o.strict;
  c.validate();
  return c;
}

int run_fit(const Options& o) {
  const egg::AnalysisConfig config = analysis_config(o);
  const egg::PipelineResult result = egg::run_pipeline(config, &std::cerr);
  std::filesystem::create_directories(config.out_dir);
  egg::report::emit_network(result, config, egg::report::OutputPaths::in_dir(config.out_dir));
  std::cerr << "[egg] wrote " << config.out_dir << '\n';
  if (config.strict && !result.stability.pruned_fit.converged) {
    std::cerr << "egg: solver did not converge\n";
    return kNotConverged;
  }
  return kOk;
}

int run_cve(const Options& o) {
  const egg::AnalysisConfig config = analysis_config(o);
  const egg::PreparedData data = egg::prepare_data(config, &std::cerr);
  const egg::CovarianceSource source{data.analysis.z(), data.error.matrix, config.estimator, config.sigma_floor, true};
  const egg::CvResult cv = egg::cross_validate_lambda(source, config.selection, config.penalty, config.admm);
  egg::report::write_cve_table(std::cout, cv);
  std::cerr << "[egg] lambda_cv: " << cv.lambda_cv << '\n';
  return kOk;
}

int run_reliability(const Options& o) {
  const egg::AnalysisConfig config = analysis_config(o);
  const egg::PreparedData data = egg::prepare_data(config, &std::cerr);
  const egg::VectorXd ratio = egg::reliability_ratio(data.analysis);
  std::cout << "trait\treliability\n" << std::setprecision(6);
  for (std::size_t k = 0; k < data.traits.size(); ++k)
    std::cout << data.traits[k] << '\t' << ratio(static_cast<egg::Index>(k)) << '\n';
  return kOk;
}

int run_simulate(const Options& o) {
  namespace sim = egg::sim;
  sim::SimulationDesign design;
  design.p = o.p;
  design.structure = sim::structure_from_string(o.structure);
  design.band_coefficients = o.band;
  design.m = o.m;
  design.null_count = o.null_count;
  design.n = o.n;
  design.heritability = o.heritability;
  design.phenotypic_cov = o.phenotypic_cov;
  const egg::Index first = o.p / 2;
  design.overlap = first == 0 ? sim::build_overlap_matrix({o.p}, o.overlap_within, o.overlap_between)
                              : sim::build_overlap_matrix({first, o.p - first}, o.overlap_within, o.overlap_between);
  design.pleiotropy_fraction = o.pleiotropy_fraction;
  design.pleiotropy_shift_multiplier = o.shift_multiplier;
  design.seed = o.seed;
  design.validate();

  if (!o.write_gwas.empty()) {
    sim::SimulatedData data = sim::simulate_summary_panel(design);
    if (design.pleiotropy_fraction > 0.0)
      data.panel = sim::inject_pleiotropy(data.panel, design, data.effect_sd).panel;
    const sim::FixtureFiles files = sim::write_gwas_fixture(data, o.write_gwas);
    for (const auto& f : files.trait_files) std::cerr << "[egg] wrote " << f << '\n';
    std::cerr << "[egg] wrote " << files.truth << '\n';
    return kOk;
  }

  if (o.reps < 1) throw egg::ValidationError("reps must be positive");
  sim::MethodConfig config = sim::default_method_config();
  config.admm = admm_config(o);
  config.penalty = penalty_spec(o);
  config.sigma_floor = o.sigma_floor;
  apply_selection(o, config.selection);
  std::vector<sim::Method> methods;
  for (const auto& name : o.methods) methods.push_back(sim::method_from_string(name));

  const sim::ReplicationTable table = sim::run_replication(design, methods, o.reps, o.seed, config);
  if (o.results.empty()) {
    sim::write_results_tsv(table, std::cout);
  } else {
    std::ofstream out(o.results);
    if (!out) throw egg::DataError("cannot write " + o.results);
    sim::write_results_tsv(table, out);
  }
  std::cerr << std::setprecision(4);
  for (const auto& s : table.summaries)
    std::cerr << "[egg] " << sim::to_string(s.method) << ": median entropy " << s.entropy.median << ", median t1 "
              << s.t1.median << ", median t2 " << s.t2.median << ", unconverged " << s.unconverged << '\n';
  if (o.strict)
    for (const auto& s : table.summaries)
      if (s.unconverged > 0) return kNotConverged;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Sparse genetic networks from GWAS summary statistics"};
  app.set_config("--config", "", "key=value file; command-line flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  auto* data = "Data";
  app.add_option("--trait-file", o.trait_files, "GWAS summary file (repeat once per trait)")->group(data);
  app.add_option("--trait-label", o.trait_labels, "Trait label (repeat, same order as --trait-file)")->group(data);
  app.add_option("--null-p-threshold", o.null_p_threshold, "Null screen: keep variants with P above this for every trait")
      ->group(data)->capture_default_str();
  app.add_option("--joint-p-threshold", o.joint_p_threshold, "Joint chi-square significance threshold")
      ->group(data)->capture_default_str();
  app.add_option("--prune-window-bp", o.prune_window_bp, "Distance pruning window")->group(data)->capture_default_str();
  app.add_option("--estimator", o.estimator, "pearson or spearman")->group(data)->capture_default_str();
  app.add_option("--sigma-floor", o.sigma_floor, "Spectral floor of the genetic correlation")
      ->group(data)->capture_default_str();
  app.add_option("--out-dir", o.out_dir, "Output directory for fit")->group(data)->capture_default_str();
  app.add_flag("--strict", o.strict, "Exit with status 3 when the solver does not converge");

  auto* solver = "Solver";
  app.add_option("--penalty", o.penalty, "mcp or lasso")->group(solver)->capture_default_str();
  app.add_option("--mcp-gamma", o.mcp_gamma, "MCP concavity")->group(solver)->capture_default_str();
  app.add_option("--psi", o.psi, "ADMM step size, in (0, 0.2]")->group(solver)->capture_default_str();
  app.add_option("--delta", o.delta, "Eigenvalue floor of the estimate")->group(solver)->capture_default_str();
  app.add_option("--tol-primal", o.tol_primal)->group(solver)->capture_default_str();
  app.add_option("--tol-dual", o.tol_dual)->group(solver)->capture_default_str();
  app.add_option("--max-iter", o.max_iter)->group(solver)->capture_default_str();
  app.add_option("--gamma-update-scaling", o.gamma_update_scaling, "div-psi or mul-psi")
      ->group(solver)->capture_default_str();

  auto* selection = "Selection";
  app.add_option("--lambda-grid", o.lambda_grid, "Ascending lambda values")->group(selection)->delimiter(',');
  app.add_option("--subsamples", o.subsamples, "Stability-selection subsamples (H)")->group(selection);
  app.add_option("--cv-splits", o.cv_splits, "Cross-validation splits")->group(selection);
  app.add_option("--c-s", o.c_s, "Subsample fraction")->group(selection)->capture_default_str();
  app.add_option("--c-t", o.c_t, "Selection-frequency threshold")->group(selection)->capture_default_str();
  app.add_option("--seed", o.seed)->group(selection)->capture_default_str();

  auto* simulation = "Simulation";
  app.add_option("--p", o.p, "Trait count")->group(simulation)->capture_default_str();
  app.add_option("--structure", o.structure, "ar1 or ar3")->group(simulation)->capture_default_str();
  app.add_option("--band", o.band, "AR band coefficients")->group(simulation)->delimiter(',');
  app.add_option("--m", o.m, "Causal variants")->group(simulation)->capture_default_str();
  app.add_option("--null-count", o.null_count, "Null variants (0 means 5m)")->group(simulation)->capture_default_str();
  app.add_option("--n", o.n, "Per-trait sample size")->group(simulation)->capture_default_str();
  app.add_option("--heritability", o.heritability)->group(simulation)->capture_default_str();
  app.add_option("--phenotypic-cov", o.phenotypic_cov)->group(simulation)->capture_default_str();
  app.add_option("--overlap-within", o.overlap_within)->group(simulation)->capture_default_str();
  app.add_option("--overlap-between", o.overlap_between)->group(simulation)->capture_default_str();
  app.add_option("--pleiotropy-fraction", o.pleiotropy_fraction)->group(simulation)->capture_default_str();
  app.add_option("--shift-multiplier", o.shift_multiplier)->group(simulation)->capture_default_str();
  app.add_option("--reps", o.reps)->group(simulation)->capture_default_str();
  app.add_option("--methods", o.methods)->group(simulation)->delimiter(',');
  app.add_option("--results", o.results, "Results table path (default: stdout)")->group(simulation);
  app.add_option("--write-gwas", o.write_gwas, "Write one replicate as GWAS files into this directory")
      ->group(simulation);

  auto* fit = app.add_subcommand("fit", "Run the full pipeline and write the network");
  auto* cve = app.add_subcommand("cve", "Print the cross-validation table");
  auto* reliability = app.add_subcommand("reliability", "Print per-trait reliability ratios");
  auto* simulate = app.add_subcommand("simulate", "Run a simulation design");
  for (auto* sub : {fit, cve, reliability, simulate}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (fit->parsed()) return run_fit(o);
    if (cve->parsed()) return run_cve(o);
    if (reliability->parsed()) return run_reliability(o);
    return run_simulate(o);
  } catch (const egg::ValidationError& e) {
    std::cerr << "egg: " << e.what() << '\n';
    return kValidation;
  } catch (const egg::DimensionError& e) {
    std::cerr << "egg: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "egg: " << e.what() << '\n';
    return kData;
  }
}

#include "egg/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include <json.hpp>

namespace egg::report {

namespace {

using nlohmann::ordered_json;

ordered_json to_json(const MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd from_json(const ordered_json& rows) {
  const auto n = static_cast<Index>(rows.size());
  MatrixXd m(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Index>(row.size()) != n) throw DataError("matrix document: matrix is not square");
    for (Index j = 0; j < n; ++j) m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
  }
  return m;
}

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

}  // namespace

MatrixXd partial_correlation(const MatrixXd& precision) {
  const Index p = precision.rows();
  MatrixXd out = MatrixXd::Identity(p, p);
  for (Index k = 0; k < p; ++k) {
    if (!(precision(k, k) > 0.0)) throw DomainError("partial_correlation: non-positive diagonal");
    for (Index s = 0; s < p; ++s)
      if (k != s) out(k, s) = -precision(k, s) / std::sqrt(precision(k, k) * precision(s, s));
  }
  return out;
}

OutputPaths OutputPaths::in_dir(const std::string& dir) {
  const std::filesystem::path d(dir);
  return {(d / "edges.tsv").string(), (d / "matrices.json").string(), (d / "metadata.json").string(),
          (d / "cve.tsv").string()};
}

void write_edge_list(std::ostream& out, const std::vector<std::string>& traits, const StabilityResult& result,
                     const PrecisionFit& fit) {
  const MatrixXd pc = partial_correlation(fit.precision);
  out << "trait_a\ttrait_b\tpartial_corr\tprecision_entry\tselection_freq\tempirical_p\n";
  out << std::setprecision(6);
  for (const auto& [k, s] : fit.support) {
    out << traits[static_cast<std::size_t>(k)] << '\t' << traits[static_cast<std::size_t>(s)] << '\t' << pc(k, s)
        << '\t' << fit.precision(k, s) << '\t' << result.frequencies(k, s) << '\t' << result.pvalues(k, s) << '\n';
  }
}

void write_cve_table(std::ostream& out, const CvResult& cv) {
  out << "lambda\tmean_cve\tsd_cve\n";
  out << std::setprecision(10);
  for (const auto& row : cv.table) out << row.lambda << '\t' << row.mean_cve << '\t' << row.sd_cve << '\n';
}

void write_matrix_document(std::ostream& out, const MatrixDocument& doc) {
  ordered_json j;
  j["traits"] = doc.traits;
  j["genetic_correlation"] = to_json(doc.genetic_correlation);
  j["precision"] = to_json(doc.precision);
  j["selection_frequency"] = to_json(doc.frequencies);
  out << j.dump(1) << '\n';
}

MatrixDocument read_matrix_document(std::istream& in) {
  ordered_json j;
  try {
    in >> j;
    return {j.at("traits").get<std::vector<std::string>>(), from_json(j.at("genetic_correlation")),
            from_json(j.at("precision")), from_json(j.at("selection_frequency"))};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("matrix document: ") + e.what());
  }
}

MatrixDocument read_matrix_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_matrix_document(in);
}

void emit_network(const PipelineResult& result, const AnalysisConfig& config, const OutputPaths& paths) {
  const auto& traits = result.data.traits;
  const PrecisionFit& fit = result.stability.pruned_fit;
  {
    auto out = open_out(paths.edges);
    write_edge_list(out, traits, result.stability, fit);
  }
  {
    auto out = open_out(paths.matrices);
    write_matrix_document(out, {traits, result.correlation.matrix, fit.precision, result.stability.frequencies});
  }
  {
    auto out = open_out(paths.cve);
    write_cve_table(out, result.cv);
  }
  ordered_json meta;
  meta["seed"] = config.selection.seed;
  ordered_json cfg;
  cfg["trait_files"] = config.trait_files;
  cfg["trait_labels"] = traits;
  cfg["null_p_threshold"] = config.null_p_threshold;
  cfg["joint_p_threshold"] = config.joint_p_threshold;
  cfg["prune_window_bp"] = config.prune_window_bp;
  cfg["estimator"] = to_string(config.estimator);
  cfg["penalty"] = to_string(config.penalty.family);
  cfg["gamma"] = config.penalty.gamma;
  cfg["lambda_grid"] = config.selection.lambda_grid;
  cfg["subsamples"] = config.selection.subsamples;
  cfg["cv_splits"] = config.selection.cv_splits;
  cfg["c_s"] = config.selection.c_s;
  cfg["c_t"] = config.selection.c_t;
  cfg["psi"] = config.admm.psi;
  cfg["delta"] = config.admm.delta;
  cfg["tol_primal"] = config.admm.tol_primal;
  cfg["tol_dual"] = config.admm.tol_dual;
  cfg["max_iter"] = config.admm.max_iter;
  cfg["gamma_update_scaling"] = config.admm.gamma_scaling == GammaScaling::DivPsi ? "div-psi" : "mul-psi";
  cfg["sigma_floor"] = config.sigma_floor;
  meta["config"] = std::move(cfg);
  ordered_json stages = ordered_json::object();
  for (const auto& [name, count] : result.data.stage_counts) stages[name] = count;
  meta["stage_counts"] = std::move(stages);
  meta["sample_sizes"] = result.data.sample_sizes;
  meta["lambda_cv"] = result.cv.lambda_cv;
  meta["converged"] = fit.converged;
  meta["iterations"] = fit.iterations;
  meta["refit_after_pruning"] = result.stability.refit;
  meta["edges"] = fit.support.size();
  meta["error_covariance"] = to_json(result.data.error.matrix);
  meta["warnings"] = result.data.warnings;
  auto out = open_out(paths.metadata);
  out << meta.dump(1) << '\n';
}

}  // namespace egg::report

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "egg/pipeline.hpp"

namespace egg::report {

/// -Θ_ks / √(Θ_kk Θ_ss) off the diagonal, 1 on it.
MatrixXd partial_correlation(const MatrixXd& precision);

struct OutputPaths {
  std::string edges;
  std::string matrices;
  std::string metadata;
  std::string cve;

  static OutputPaths in_dir(const std::string& dir);
};

/// One row per selected pair: trait_a, trait_b, partial_corr,
/// precision_entry, selection_freq, empirical_p (6 significant digits).
void write_edge_list(std::ostream& out, const std::vector<std::string>& traits, const StabilityResult& result,
                     const PrecisionFit& fit);

void write_cve_table(std::ostream& out, const CvResult& cv);

struct MatrixDocument {
  std::vector<std::string> traits;
  MatrixXd genetic_correlation;
  MatrixXd precision;
  MatrixXd frequencies;
};

void write_matrix_document(std::ostream& out, const MatrixDocument& doc);
MatrixDocument read_matrix_document(std::istream& in);
MatrixDocument read_matrix_document(const std::string& path);

/// Writes the edge list, matrix document, metadata and CV table.
void emit_network(const PipelineResult& result, const AnalysisConfig& config, const OutputPaths& paths);

}  // namespace egg::report

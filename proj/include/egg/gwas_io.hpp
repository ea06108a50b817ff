#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "egg/covariance.hpp"

namespace egg::io {

struct GwasRecord {
  std::string variant_id;
  std::string chromosome;
  long long position = 0;
  std::string effect_allele;
  std::string other_allele;
  double beta = 0.0;
  double se = 1.0;
  long n = 1;
};

struct GwasFile {
  std::string path;
  std::vector<GwasRecord> records;
  std::vector<std::string> warnings;
};

/// Tab-separated with header SNP CHR POS A1 A2 BETA SE N (any order, any
/// case, extra columns ignored). Duplicated SNP ids keep the first row.
GwasFile parse_gwas_file(const std::string& path);
GwasFile parse_gwas_stream(std::istream& in, const std::string& name);

void write_gwas_file(const std::string& path, const std::vector<GwasRecord>& records);

struct VariantInfo {
  std::string variant_id;
  std::string chromosome;
  long long position = 0;
};

struct AlignedPanel {
  SummaryPanel panel;
  std::vector<VariantInfo> variants;
  /// Rows whose alleles matched neither directly nor as an A1/A2 swap.
  Index allele_mismatches = 0;
  /// Rows with alleles other than single A/C/G/T bases.
  Index rejected_alleles = 0;
  /// Cells whose sign was flipped to the first trait's allele coding.
  Index swapped = 0;
};

/// Z = beta / se on the variants shared by every trait, coded to the first
/// trait's effect allele.
AlignedPanel align_traits(const std::vector<std::string>& labels, const std::vector<GwasFile>& files);

}  // namespace egg::io

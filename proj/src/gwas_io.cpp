#include "egg/gwas_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace egg::io {

namespace {

constexpr std::array<const char*, 8> kColumns = {"SNP", "CHR", "POS", "A1", "A2", "BETA", "SE", "N"};

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

[[noreturn]] void fail(const std::string& name, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << name << ":" << line << ": " << what;
  throw DataError(msg.str());
}

double parse_double(const std::string& field, const std::string& name, std::size_t line, const char* column) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    fail(name, line, std::string("cannot parse ") + column + " value '" + field + "'");
  return v;
}

long long parse_integer(const std::string& field, const std::string& name, std::size_t line, const char* column) {
  long long v = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    // Sample sizes are sometimes written as reals.
    const double d = parse_double(field, name, line, column);
    if (d != std::floor(d)) fail(name, line, std::string("non-integer ") + column + " value '" + field + "'");
    v = static_cast<long long>(d);
  }
  return v;
}

bool plain_base(const std::string& a) {
  return a.size() == 1 && (a[0] == 'A' || a[0] == 'C' || a[0] == 'G' || a[0] == 'T');
}

}  // namespace

GwasFile parse_gwas_stream(std::istream& in, const std::string& name) {
  GwasFile out;
  out.path = name;
  std::string line;
  if (!std::getline(in, line)) throw DataError(name + ": empty file");
  const auto header = split_tabs(line);
  std::array<std::size_t, kColumns.size()> col{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) { return upper(h) == kColumns[c]; });
    if (it == header.end()) throw DataError(name + ": missing required column " + kColumns[c]);
    col[c] = static_cast<std::size_t>(it - header.begin());
  }
  const std::size_t needed = *std::max_element(col.begin(), col.end()) + 1;

  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_tabs(line);
    if (f.size() < needed) fail(name, line_no, "expected at least " + std::to_string(needed) + " fields");
    GwasRecord r;
    r.variant_id = f[col[0]];
    r.chromosome = f[col[1]];
    r.position = parse_integer(f[col[2]], name, line_no, "POS");
    r.effect_allele = upper(f[col[3]]);
    r.other_allele = upper(f[col[4]]);
    r.beta = parse_double(f[col[5]], name, line_no, "BETA");
    r.se = parse_double(f[col[6]], name, line_no, "SE");
    const long long n = parse_integer(f[col[7]], name, line_no, "N");
    if (r.variant_id.empty()) fail(name, line_no, "empty SNP id");
    if (r.position < 0) fail(name, line_no, "negative POS");
    if (!(r.se > 0.0)) fail(name, line_no, "SE must be positive");
    if (n <= 0) fail(name, line_no, "N must be positive");
    r.n = static_cast<long>(n);
    if (!seen.insert(r.variant_id).second) {
      out.warnings.push_back(name + ":" + std::to_string(line_no) + ": duplicate SNP " + r.variant_id + " ignored");
      continue;
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

GwasFile parse_gwas_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return parse_gwas_stream(in, path);
}

void write_gwas_file(const std::string& path, const std::vector<GwasRecord>& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "SNP\tCHR\tPOS\tA1\tA2\tBETA\tSE\tN\n";
  out << std::setprecision(17);
  for (const auto& r : records)
    out << r.variant_id << '\t' << r.chromosome << '\t' << r.position << '\t' << r.effect_allele << '\t'
        << r.other_allele << '\t' << r.beta << '\t' << r.se << '\t' << r.n << '\n';
  if (!out) throw DataError("failed writing " + path);
}

AlignedPanel align_traits(const std::vector<std::string>& labels, const std::vector<GwasFile>& files) {
  if (files.size() < 2) throw ValidationError("align_traits: need at least two traits");
  if (labels.size() != files.size()) throw ValidationError("align_traits: one label per trait file");
  const std::size_t p = files.size();

  std::vector<std::unordered_map<std::string, std::size_t>> index(p);
  for (std::size_t t = 1; t < p; ++t)
    for (std::size_t i = 0; i < files[t].records.size(); ++i) index[t].emplace(files[t].records[i].variant_id, i);

  struct Row {
    std::size_t ref;
    std::vector<double> z;
  };
  std::vector<Row> rows;
  Index mismatches = 0, rejected = 0, swapped = 0;
  bool any_shared = false;
  for (std::size_t i = 0; i < files[0].records.size(); ++i) {
    const auto& ref = files[0].records[i];
    std::vector<std::size_t> hit(p);
    hit[0] = i;
    bool shared = true;
    for (std::size_t t = 1; t < p && shared; ++t) {
      auto it = index[t].find(ref.variant_id);
      if (it == index[t].end())
        shared = false;
      else
        hit[t] = it->second;
    }
    if (!shared) continue;
    any_shared = true;
    bool ok = plain_base(ref.effect_allele) && plain_base(ref.other_allele) && ref.effect_allele != ref.other_allele;
    for (std::size_t t = 1; t < p && ok; ++t) {
      const auto& r = files[t].records[hit[t]];
      ok = plain_base(r.effect_allele) && plain_base(r.other_allele);
    }
    if (!ok) {
      ++rejected;
      continue;
    }
    Row row{i, std::vector<double>(p)};
    bool matched = true;
    Index row_swaps = 0;
    for (std::size_t t = 0; t < p; ++t) {
      const auto& r = files[t].records[hit[t]];
      double sign = 1.0;
      if (r.effect_allele == ref.effect_allele && r.other_allele == ref.other_allele) {
        sign = 1.0;
      } else if (r.effect_allele == ref.other_allele && r.other_allele == ref.effect_allele) {
        sign = -1.0;
        ++row_swaps;
      } else {
        matched = false;
        break;
      }
      row.z[t] = sign * r.beta / r.se;
    }
    if (!matched) {
      ++mismatches;
      continue;
    }
    swapped += row_swaps;
    rows.push_back(std::move(row));
  }
  if (!any_shared) throw DataError("align_traits: the trait files share no variants");
  if (rows.size() < 2) throw DataError("align_traits: fewer than two variants survive allele alignment");

  MatrixXd z(static_cast<Index>(rows.size()), static_cast<Index>(p));
  std::vector<VariantInfo> info;
  info.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t t = 0; t < p; ++t) z(static_cast<Index>(r), static_cast<Index>(t)) = rows[r].z[t];
    const auto& ref = files[0].records[rows[r].ref];
    info.push_back({ref.variant_id, ref.chromosome, ref.position});
  }

  // Per-trait sample size: median N over the aligned variants.
  std::vector<long> sizes(p);
  for (std::size_t t = 0; t < p; ++t) {
    std::vector<long> ns;
    ns.reserve(rows.size());
    for (const auto& row : rows) {
      const auto& id = files[0].records[row.ref].variant_id;
      const std::size_t at = t == 0 ? row.ref : index[t].at(id);
      ns.push_back(files[t].records[at].n);
    }
    std::nth_element(ns.begin(), ns.begin() + static_cast<std::ptrdiff_t>(ns.size() / 2), ns.end());
    sizes[t] = ns[ns.size() / 2];
  }
  return {SummaryPanel(std::move(z), labels, sizes), std::move(info), mismatches, rejected, swapped};
}

}  // namespace egg::io

#include "egg/fixture.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "egg/errors.hpp"
#include "egg/gwas_io.hpp"

namespace egg::sim {

namespace {

using nlohmann::ordered_json;

constexpr long long kSpacing = 2'000'000;
constexpr int kChromosomes = 22;

}  // namespace

FixtureFiles write_gwas_fixture(const SimulatedData& data, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const Index p = data.panel.dim();
  const Index m = data.panel.variants();
  const Index nulls = data.nulls.variants();
  const auto& sizes = data.panel.sample_sizes();

  FixtureFiles files;
  for (Index k = 0; k < p; ++k) {
    const double n = static_cast<double>(sizes[static_cast<std::size_t>(k)]);
    const double se = 1.0 / std::sqrt(n);
    std::vector<io::GwasRecord> records;
    records.reserve(static_cast<std::size_t>(m + nulls));
    for (Index j = 0; j < m + nulls; ++j) {
      const double z = j < m ? data.panel.z()(j, k) : data.nulls.b()(j - m, k);
      io::GwasRecord r;
      r.variant_id = "rs" + std::to_string(j + 1);
      r.chromosome = std::to_string(1 + j % kChromosomes);
      r.position = kSpacing / 2 + kSpacing * (j / kChromosomes);
      r.effect_allele = "A";
      r.other_allele = "G";
      r.beta = z * se;
      r.se = se;
      r.n = sizes[static_cast<std::size_t>(k)];
      if (k % 2 == 1 && j % 7 == 0) {
        std::swap(r.effect_allele, r.other_allele);
        r.beta = -r.beta;
      }
      records.push_back(std::move(r));
    }
    const std::string label = data.panel.traits()[static_cast<std::size_t>(k)];
    const std::string path = (std::filesystem::path(dir) / (label + ".tsv")).string();
    io::write_gwas_file(path, records);
    files.trait_files.push_back(path);
    files.trait_labels.push_back(label);
  }

  ordered_json truth;
  truth["traits"] = files.trait_labels;
  ordered_json rows = ordered_json::array();
  for (Index k = 0; k < p; ++k) {
    std::vector<double> row(static_cast<std::size_t>(p));
    for (Index s = 0; s < p; ++s) row[static_cast<std::size_t>(s)] = data.truth_precision(k, s);
    rows.push_back(row);
  }
  truth["precision"] = rows;
  ordered_json support = ordered_json::array();
  for (const auto& [k, s] : support_of(data.truth_precision)) support.push_back({k, s});
  truth["support"] = support;
  files.truth = (std::filesystem::path(dir) / "truth.json").string();
  std::ofstream out(files.truth);
  if (!out) throw DataError("cannot write " + files.truth);
  out << truth.dump(1) << '\n';
  return files;
}

FixtureTruth read_fixture_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    const ordered_json j = ordered_json::parse(in);
    FixtureTruth t;
    t.traits = j.at("traits").get<std::vector<std::string>>();
    const auto& rows = j.at("precision");
    const Index p = static_cast<Index>(rows.size());
    t.precision.resize(p, p);
    for (Index k = 0; k < p; ++k)
      for (Index s = 0; s < p; ++s) t.precision(k, s) = rows.at(static_cast<std::size_t>(k)).at(static_cast<std::size_t>(s)).get<double>();
    for (const auto& pair : j.at("support")) t.support.emplace_back(pair.at(0).get<Index>(), pair.at(1).get<Index>());
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace egg::sim

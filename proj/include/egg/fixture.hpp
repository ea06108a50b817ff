#pragma once

#include <string>
#include <vector>

#include "egg/simulation.hpp"

namespace egg::sim {

struct FixtureFiles {
  std::vector<std::string> trait_files;
  std::vector<std::string> trait_labels;
  std::string truth;
};

/// Writes the signal and null rows of `data` as one GWAS file per trait,
/// variants 2 Mb apart, plus truth.json holding the generating precision
/// and its support. Every seventh row of even-numbered traits is written
/// with A1/A2 swapped and the effect negated.
FixtureFiles write_gwas_fixture(const SimulatedData& data, const std::string& dir);

struct FixtureTruth {
  std::vector<std::string> traits;
  MatrixXd precision;
  std::vector<TraitPair> support;
};

FixtureTruth read_fixture_truth(const std::string& path);

}  // namespace egg::sim

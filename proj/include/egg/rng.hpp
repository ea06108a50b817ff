#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace egg {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for (seed, stream, index); the same triple always
/// yields the same sequence regardless of call order.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed ^ splitmix64(stream)) ^ index));
}

/// `size` distinct indices from [0, n), uniformly without replacement, sorted.
std::vector<Eigen::Index> sample_without_replacement(Eigen::Index n, Eigen::Index size, std::mt19937_64& rng);

/// Indices in [0, n) not present in the sorted list `taken`.
std::vector<Eigen::Index> complement(Eigen::Index n, const std::vector<Eigen::Index>& taken);

}  // namespace egg

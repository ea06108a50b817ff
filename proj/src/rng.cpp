#include "egg/rng.hpp"

#include <algorithm>
#include <numeric>

#include "egg/errors.hpp"

namespace egg {

std::vector<Eigen::Index> sample_without_replacement(Eigen::Index n, Eigen::Index size, std::mt19937_64& rng) {
  if (size < 0 || size > n) throw DomainError("sample_without_replacement: size out of range");
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < size; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(size));
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<Eigen::Index> complement(Eigen::Index n, const std::vector<Eigen::Index>& taken) {
  std::vector<Eigen::Index> out;
  out.reserve(static_cast<std::size_t>(n) - taken.size());
  auto it = taken.begin();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (it != taken.end() && *it == i) {
      ++it;
      continue;
    }
    out.push_back(i);
  }
  return out;
}

}  // namespace egg

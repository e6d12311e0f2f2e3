#include "cglo/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace cglo {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Matrix latin_hypercube(std::size_t n, const Box& box, Rng& rng) {
  const auto d = box.dim();
  Matrix out(to_index(n), to_index(d));
  if (n == 0) return out;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const double lo = box.lower[to_index(j)];
    const double w = box.upper[to_index(j)] - lo;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (static_cast<double>(perm[i]) + unif(rng)) / static_cast<double>(n);
      out(to_index(i), to_index(j)) = lo + w * u;
    }
  }
  return out;
}

Matrix uniform_sample(std::size_t n, const Box& box, Rng& rng) {
  const auto d = box.dim();
  Matrix out(to_index(n), to_index(d));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const auto jj = to_index(j);
      out(to_index(i), jj) = box.lower[jj] + (box.upper[jj] - box.lower[jj]) * unif(rng);
    }
  }
  return out;
}

}  // namespace cglo

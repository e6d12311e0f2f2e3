#pragma once

#include "cglo/types.hpp"

#include <cstdint>
#include <random>

namespace cglo {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent seeds from tuples of integers.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Latin hypercube sample of n points inside `box`: along every axis each of the
/// n equal-width strata holds exactly one point.
Matrix latin_hypercube(std::size_t n, const Box& box, Rng& rng);

/// Uniform sample of n points inside `box`.
Matrix uniform_sample(std::size_t n, const Box& box, Rng& rng);

}  // namespace cglo

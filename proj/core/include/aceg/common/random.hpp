#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace aceg {

using Rng = std::mt19937_64;

/// Mixes a parent seed with a list of stream tags into an independent child
/// seed (splitmix64 finalizer chained over the tags). Every stochastic stage
/// derives its stream from the run seed this way so that streams do not
/// depend on how many draws another stage consumed.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  return Rng(derive_seed(seed, tags));
}

inline double normal(Rng& rng, double mean = 0.0, double stddev = 1.0) {
  return std::normal_distribution<double>(mean, stddev)(rng);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Uniform integer in the closed range [lo, hi].
inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

}  // namespace aceg

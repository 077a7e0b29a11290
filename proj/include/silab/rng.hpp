#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace silab {

using Rng = std::mt19937_64;
/// Standard normal sampler (ziggurat).
using Normal = boost::random::normal_distribution<double>;

/// splitmix64 finaliser: a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of replica `index` under `root`:  mix64(root XOR mix64(index)).
/// The map is a bijection in `index` for fixed `root` and in `root` for fixed
/// `index`, so seeds never collide along either axis.
constexpr std::uint64_t derive_replica_seed(std::uint64_t root, std::uint64_t index) {
  return mix64(root ^ mix64(index));
}

/// Independent sub-stream of a replica (stream 0 = main, 1 = landscape clock, ...).
inline Rng make_stream(std::uint64_t replica_seed, std::uint64_t stream = 0) {
  return Rng(derive_replica_seed(replica_seed, stream + 0x5151u));
}

}  // namespace silab

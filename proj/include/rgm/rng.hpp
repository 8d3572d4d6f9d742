#pragma once

#include <cstdint>
#include <random>

namespace rgm {

using Rng = std::mt19937_64;

/// Independent randomness streams derived from one master seed.
enum class Stream : std::uint64_t {
  instance = 1,
  noise = 2,
  beta = 3,
  corruption = 4,
  control = 5,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Split function: seed_s = splitmix64(master ^ splitmix64(tag)).
/// Distinct tags give statistically independent mt19937_64 streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) noexcept;

inline std::uint64_t derive_seed(std::uint64_t master, Stream s) noexcept {
  return derive_seed(master, static_cast<std::uint64_t>(s));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace rgm

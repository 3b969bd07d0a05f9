#pragma once

#include <cstdint>
#include <random>

namespace ergolab {

using Rng = std::mt19937_64;

// Deterministic child seed for task `index` under `master`. Used so that
// Monte Carlo results do not depend on how tasks are scheduled.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

inline Rng make_rng(std::uint64_t master, std::uint64_t index) {
  return Rng(derive_seed(master, index));
}

// Uniform double in [0, 1) built from the top 53 bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace ergolab

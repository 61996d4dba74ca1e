#pragma once

#include <cstdint>
#include <random>

#include "fmsync/types.hpp"

namespace fmsync {

/// Uniform draw in [0, 1) built from the top 53 bits, identical on every platform.
[[nodiscard]] inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/**
 * signal + n with each n_k uniform on [-a, a], a = percent * ||signal|| / 100.
 * Draws exactly `signal.size()` numbers from `rng`, even when percent = 0.
 */
[[nodiscard]] SmallVec inject_noise(const SmallVec& signal, double percent, std::mt19937_64& rng);

/// Seed of the independent stream `stream` derived from a base seed (splitmix64 finalizer).
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

}  // namespace fmsync

#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "fmsync/types.hpp"

namespace fmsync {

struct SamplingOptions {
    int samples = 4096;
    std::uint64_t seed = 7;
    double safety_factor = 1.25;
    int refine_top = 8;  // best samples polished by pattern search
};

/// Scrambled Halton points in [0, 1)^dims; the Cranley-Patterson shift is drawn from `seed`.
class HaltonSequence {
  public:
    HaltonSequence(int dims, std::uint64_t seed);

    /// Writes point `index` into `out` (size dims).
    void point(std::uint64_t index, std::span<double> out) const;
    [[nodiscard]] int dims() const noexcept { return static_cast<int>(shift_.size()); }

  private:
    Eigen::VectorXd shift_;
};

/// Number of unit-cube coordinates used by `unit_direction` for a q-dimensional direction.
[[nodiscard]] int direction_coords(int q) noexcept;

/// Maps uniform coordinates to a unit vector in R^q (Box-Muller, then normalize).
[[nodiscard]] SmallVec unit_direction(std::span<const double> u, int q);

using SampledObjective = std::function<double(std::span<const double>)>;

/**
 * Deterministic estimate of sup over [0,1]^dims of `objective`: the maximum
 * over `options.samples` Halton points, with the best `refine_top` points
 * polished by a compass search. No safety factor is applied.
 */
[[nodiscard]] double sampled_supremum(int dims, const SamplingOptions& options, const SampledObjective& objective);

}  // namespace fmsync

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fmsync/netgraph.hpp"
#include "fmsync/types.hpp"

namespace fmsync {

/// A p-vector attributed to a neighbor: an estimate sigma_hat_j^i or a transmitted sigma_j.
struct NeighborSignal {
    int source = 0;
    SmallVec sigma;
};

/**
 * chi_i = -M sum_{j in N_i} a_ij (sigma_i - sigma_hat_j^i).
 *
 * The only inputs are the agent's own state and its own observers' outputs.
 * Throws `ErrorKind::Wiring` when a neighbor has no estimate.
 */
[[nodiscard]] SmallVec control_modulated(const SmallVec& sigma_i, std::span<const NeighborSignal> estimates,
                                         std::span<const Neighbor> neighbors, const SmallMat& M);

/// chi_i = -M sum a_ij (sigma_i - sigma_j - n_j^i); `noise` is indexed like `neighbors` when present.
[[nodiscard]] SmallVec control_ideal(const SmallVec& sigma_i, std::span<const NeighborSignal> neighbor_sigmas,
                                     std::span<const Neighbor> neighbors, const SmallMat& M,
                                     std::span<const SmallVec> noise = {});

/// phi_i = sum a_ij (sigma_hat_j^i - sigma_j).
[[nodiscard]] SmallVec perturbation(std::span<const NeighborSignal> estimates,
                                    std::span<const NeighborSignal> true_sigmas, std::span<const Neighbor> neighbors);

struct PerturbationDiag {
    std::vector<SmallVec> phi_i;
    Vec phi;  // stacked col(phi_1, ..., phi_n)
};

/// Network-wide phi from per-agent estimate lists and true states.
[[nodiscard]] PerturbationDiag network_perturbation(const NetworkTopology& topology,
                                                    std::span<const std::vector<NeighborSignal>> estimates,
                                                    std::span<const SmallVec> sigmas);

}  // namespace fmsync

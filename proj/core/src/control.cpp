#include "fmsync/control.hpp"

#include <sstream>

#include "fmsync/errors.hpp"

namespace fmsync {

namespace {

const SmallVec& find_signal(std::span<const NeighborSignal> signals, int source, const char* what) {
    for (const NeighborSignal& s : signals) {
        if (s.source == source) return s.sigma;
    }
    std::ostringstream os;
    os << "no " << what << " for neighbor " << source + 1;
    throw Error(ErrorKind::Wiring, os.str());
}

}  // namespace

SmallVec control_modulated(const SmallVec& sigma_i, std::span<const NeighborSignal> estimates,
                           std::span<const Neighbor> neighbors, const SmallMat& M) {
    SmallVec disagreement = SmallVec::Zero(sigma_i.size());
    for (const Neighbor& nb : neighbors) {
        disagreement += nb.weight * (sigma_i - find_signal(estimates, nb.index, "estimate"));
    }
    return -M * disagreement;
}

SmallVec control_ideal(const SmallVec& sigma_i, std::span<const NeighborSignal> neighbor_sigmas,
                       std::span<const Neighbor> neighbors, const SmallMat& M, std::span<const SmallVec> noise) {
    if (!noise.empty() && noise.size() != neighbors.size()) {
        throw Error(ErrorKind::DimensionMismatch, "noise must have one entry per neighbor");
    }
    SmallVec disagreement = SmallVec::Zero(sigma_i.size());
    for (std::size_t k = 0; k < neighbors.size(); ++k) {
        const Neighbor& nb = neighbors[k];
        SmallVec term = sigma_i - find_signal(neighbor_sigmas, nb.index, "transmitted state");
        if (!noise.empty()) term -= noise[k];
        disagreement += nb.weight * term;
    }
    return -M * disagreement;
}

SmallVec perturbation(std::span<const NeighborSignal> estimates, std::span<const NeighborSignal> true_sigmas,
                      std::span<const Neighbor> neighbors) {
    Eigen::Index p = 0;
    if (!true_sigmas.empty()) p = true_sigmas.front().sigma.size();
    else if (!estimates.empty()) p = estimates.front().sigma.size();
    SmallVec phi = SmallVec::Zero(p);
    for (const Neighbor& nb : neighbors) {
        phi += nb.weight * (find_signal(estimates, nb.index, "estimate") - find_signal(true_sigmas, nb.index, "state"));
    }
    return phi;
}

PerturbationDiag network_perturbation(const NetworkTopology& topology,
                                      std::span<const std::vector<NeighborSignal>> estimates,
                                      std::span<const SmallVec> sigmas) {
    const int n = topology.size();
    if (static_cast<int>(estimates.size()) != n || static_cast<int>(sigmas.size()) != n) {
        throw Error(ErrorKind::DimensionMismatch, "network_perturbation needs one entry per agent");
    }
    const Eigen::Index p = sigmas.front().size();

    PerturbationDiag diag;
    diag.phi = Vec::Zero(n * p);
    for (int i = 0; i < n; ++i) {
        SmallVec phi_i = SmallVec::Zero(p);
        for (const Neighbor& nb : topology.neighbors(i)) {
            phi_i += nb.weight * (find_signal(estimates[i], nb.index, "estimate") - sigmas[nb.index]);
        }
        diag.phi.segment(i * p, p) = phi_i;
        diag.phi_i.push_back(phi_i);
    }
    return diag;
}

}  // namespace fmsync

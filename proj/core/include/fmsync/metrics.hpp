#pragma once

#include <vector>

#include "fmsync/simulate.hpp"

namespace fmsync {

/// Per-record diagnostics recomputed from a trajectory's stored columns.
struct SyncMetrics {
    std::vector<double> t;
    std::vector<double> sync_err;     // max_{i<j} |omega_i - omega_j|
    std::vector<double> max_obs_err;  // max over edges |omega_hat_j^i - omega_j|
    std::vector<double> phi_norm;
    std::vector<double> chi_norm;
    std::vector<double> edge_obs_tail;  // per-edge tail sup of |omega_hat_j^i - omega_j|
    double tail_start = 0.0;
    double tail_sync_err = 0.0;
    double tail_max_obs_err = 0.0;
    double tail_phi_norm = 0.0;
    double tail_chi_norm = 0.0;
};

/// Tail suprema are taken over recorded samples with t >= (1 - tail_fraction) * t_final.
[[nodiscard]] SyncMetrics sync_metrics(const Trajectory& traj, double tail_fraction = 0.2);

}  // namespace fmsync

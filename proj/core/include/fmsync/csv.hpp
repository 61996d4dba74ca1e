#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "fmsync/metrics.hpp"
#include "fmsync/simulate.hpp"

namespace fmsync {

/// Writes `content` to a sibling temporary file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view content);

/// Format of every numeric CSV cell: "%.17e".
[[nodiscard]] std::string format_double(double v);

/// t,agent,sigma_1..sigma_p,x_1..x_q,omega (agents are 1-based).
[[nodiscard]] std::string agents_csv(const Trajectory& traj);
/// t,observer_agent,source_agent,sigma_hat_1..p,x_hat_1..q,omega_hat.
[[nodiscard]] std::string edges_csv(const Trajectory& traj);
/// t,sync_err,max_obs_err,phi_norm,chi_norm.
[[nodiscard]] std::string metrics_csv(const SyncMetrics& metrics);

struct TrajectoryFiles {
    std::filesystem::path agents;
    std::filesystem::path edges;
    std::filesystem::path metrics;
};

/// Writes agents.csv, edges.csv and metrics.csv into `dir` (created if missing), each with `prefix`.
TrajectoryFiles write_trajectory(const std::filesystem::path& dir, const Trajectory& traj, const SyncMetrics& metrics,
                                 const std::string& prefix = "");

}  // namespace fmsync

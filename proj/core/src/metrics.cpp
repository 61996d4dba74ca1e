#include "fmsync/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fmsync/errors.hpp"

namespace fmsync {

SyncMetrics sync_metrics(const Trajectory& traj, double tail_fraction) {
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw Error(ErrorKind::Config, "tail_fraction must be in (0, 1]");
    SyncMetrics out;
    const std::size_t recs = traj.records();
    const std::size_t ne = traj.edges.size();
    out.edge_obs_tail.assign(ne, 0.0);
    if (recs == 0) return out;
    out.tail_start = traj.t.back() * (1.0 - tail_fraction);

    out.t = traj.t;
    out.sync_err.resize(recs);
    out.max_obs_err.resize(recs);
    out.phi_norm.resize(recs);
    out.chi_norm.resize(recs);
    const auto n = static_cast<std::size_t>(traj.n);
    const auto p = static_cast<std::size_t>(traj.p);
    const auto m = static_cast<std::size_t>(traj.m);
    for (std::size_t k = 0; k < recs; ++k) {
        const auto w = traj.omega.begin() + static_cast<std::ptrdiff_t>(k * n);
        const auto [lo, hi] = std::minmax_element(w, w + static_cast<std::ptrdiff_t>(n));
        out.sync_err[k] = *hi - *lo;

        double obs = 0.0;
        for (std::size_t e = 0; e < ne; ++e) {
            const double err = std::abs(traj.omega_hat_at(k, e) - traj.omega_at(k, traj.edges[e].source));
            obs = std::max(obs, err);
            if (traj.t[k] >= out.tail_start) out.edge_obs_tail[e] = std::max(out.edge_obs_tail[e], err);
        }
        out.max_obs_err[k] = obs;

        double phi2 = 0.0;
        for (std::size_t c = 0; c < n * p; ++c) phi2 += traj.phi[k * n * p + c] * traj.phi[k * n * p + c];
        double chi2 = 0.0;
        for (std::size_t c = 0; c < n * m; ++c) chi2 += traj.chi[k * n * m + c] * traj.chi[k * n * m + c];
        out.phi_norm[k] = std::sqrt(phi2);
        out.chi_norm[k] = std::sqrt(chi2);

        if (traj.t[k] >= out.tail_start) {
            out.tail_sync_err = std::max(out.tail_sync_err, out.sync_err[k]);
            out.tail_max_obs_err = std::max(out.tail_max_obs_err, obs);
            out.tail_phi_norm = std::max(out.tail_phi_norm, out.phi_norm[k]);
            out.tail_chi_norm = std::max(out.tail_chi_norm, out.chi_norm[k]);
        }
    }
    return out;
}

}  // namespace fmsync

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fmsync/netgraph.hpp"
#include "fmsync/plant.hpp"
#include "fmsync/types.hpp"

namespace fmsync {

using Derivative = std::function<void(double t, const Vec& y, Vec& dy)>;

struct Rk4Workspace {
    Vec k1, k2, k3, k4, stage;
};

/// Classical RK4 update of `y` in place. Throws IntegrationFailure when a stage derivative is not finite.
void rk4_step(double t, Vec& y, double dt, const Derivative& f, Rk4Workspace& ws);
[[nodiscard]] Vec rk4_step(double t, const Vec& y, double dt, const Derivative& f);

enum class Scenario { Modulated, Ideal, IdealNoisy, ModulatedNoisy };

[[nodiscard]] std::string_view to_string(Scenario s) noexcept;
[[nodiscard]] std::optional<Scenario> parse_scenario(std::string_view name) noexcept;
[[nodiscard]] bool is_noisy(Scenario s) noexcept;

/// sigma_hat(0) rule; x_hat(0) is always the source's x(0).
enum class ObserverInit { Zero, Exact };

struct SimConfig {
    NetworkTopology topology;
    AgentParams agent;
    CarrierPtr carrier;
    SmallMat M;
    SmallVec K_o;
    double beta = 10.0;
    double f_min = 1e-9;
    std::vector<AgentState> initial;
    ObserverInit observer_init = ObserverInit::Zero;
    Scenario scenario = Scenario::Modulated;
    double noise_percent = 1.0;  // used by the noisy scenarios only
    std::uint64_t seed = 1;
    double dt = 1e-3;
    double horizon = 300.0;
    int record_stride = 100;
    double tail_fraction = 0.2;
    bool record = true;
    std::optional<double> b_x;  // observer-region bound to monitor

    void validate() const;
};

struct SimEvent {
    double t = 0.0;
    std::string kind;
    std::string detail;
};

/// Suprema over the last `tail_fraction` of the horizon, evaluated on every step.
struct TailSummary {
    double start_time = 0.0;
    double sync_err = 0.0;
    double max_obs_err = 0.0;
    std::vector<double> edge_obs_err;
    double sigma_err = 0.0;  // max over edges of ||sigma_hat - sigma_j||
    double phi_norm = 0.0;
    double chi_norm = 0.0;
};

/// Whole-run extremes used by conservation and exactness checks.
struct RunExtremes {
    double x_norm_drift = 0.0;  // max_i | ||x_i(t)|| / ||x_i(0)|| - 1 |
    double sigma_err = 0.0;
    double x_err = 0.0;
    double x_norm_min = 0.0;
    double x_norm_max = 0.0;
};

/**
 * Recorded samples of a closed-loop run. Series are row-major flat arrays:
 * `sigma` holds [record][agent][p], `sigma_hat` holds [record][edge][p], and so on.
 * Edges follow topology().edges() order.
 */
struct Trajectory {
    int n = 0;
    int p = 0;
    int q = 0;
    int m = 0;
    std::vector<Edge> edges;
    std::vector<double> t;
    std::vector<double> sigma, x, omega;
    std::vector<double> sigma_hat, x_hat, omega_hat;
    std::vector<double> chi, phi;
    std::vector<SimEvent> events;
    TailSummary tail;
    RunExtremes extremes;
    std::uint64_t steps = 0;

    [[nodiscard]] std::size_t records() const noexcept { return t.size(); }
    [[nodiscard]] double omega_at(std::size_t k, int agent) const { return omega[k * n + agent]; }
    [[nodiscard]] double omega_hat_at(std::size_t k, std::size_t edge) const { return omega_hat[k * edges.size() + edge]; }
};

/// Integrates agents and all edge observers on one clock with fixed-step RK4.
[[nodiscard]] Trajectory simulate(const SimConfig& config);

/// Runs each agent open loop (chi = 0) and returns [min, max] of ||x_i(t)|| over all agents and steps.
[[nodiscard]] Envelope measure_envelope(const AgentParams& agent, const Carrier& carrier,
                                        const std::vector<AgentState>& initial, double dt, double horizon);

}  // namespace fmsync

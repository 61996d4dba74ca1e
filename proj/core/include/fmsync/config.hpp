#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fmsync/netgraph.hpp"
#include "fmsync/plant.hpp"
#include "fmsync/sampling.hpp"
#include "fmsync/simulate.hpp"

namespace fmsync {

/// Gains taken from the config; an empty optional means "synthesize".
struct GainSpec {
    std::optional<SmallMat> M;
    std::optional<SmallVec> K_o;
    std::optional<double> rho;  // when set, K_o is the two-state closed form for this rho
    std::optional<double> beta;
    double epsilon = 1.0;
    std::vector<double> observer_poles;
    double margin_factor = 0.9;
    double slack_factor = 1.1;
};

/// Seeded layout for the default initial conditions.
struct InitialLayout {
    std::uint64_t seed = 11;
    SmallVec sigma_center;
    double sigma_spread = 0.0;
    std::optional<double> x_radius;  // q = 2: points on a circle at spread phases
    SmallVec x_center;
    double x_spread = 0.0;
};

struct SimulationSpec {
    double dt = 1e-3;
    double horizon = 300.0;
    int record_stride = 100;
    double tail_fraction = 0.2;
    Scenario scenario = Scenario::Modulated;
    double noise_percent = 1.0;
    std::uint64_t seed = 1;
};

/// Tail tolerances applied by the verification suite.
struct VerifySpec {
    double sync_tol = 0.01;
    double obs_tol = 0.02;
};

/// Fully resolved run description. `to_json` emits explicit initial states, so it round-trips.
struct RunConfig {
    std::string name = "run";
    AgentParams agent;
    std::string carrier_name = "rotational";
    CarrierPtr carrier;
    int n = 0;
    std::vector<Edge> edges;
    NetworkTopology topology;
    GainSpec gains;
    std::optional<InitialLayout> layout;
    std::vector<AgentState> initial;
    ObserverInit observer_init = ObserverInit::Zero;
    std::optional<Envelope> envelope;
    SamplingOptions sampling;
    SimulationSpec simulation;
    VerifySpec verify;
    double f_min = 1e-9;
};

/// Built-in parameter sets: "example1" (rotational) and "hindmarsh_rose".
[[nodiscard]] nlohmann::json preset_json(const std::string& name);
[[nodiscard]] std::vector<std::string> preset_names();

/// Parses a config document; a "preset" key supplies defaults that the remaining keys override.
/// Throws Error(Config) with the offending key on malformed input.
[[nodiscard]] RunConfig parse_config(const nlohmann::json& doc);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

[[nodiscard]] nlohmann::json to_json(const RunConfig& config);

/// Initial states generated from the seeded layout.
[[nodiscard]] std::vector<AgentState> layout_initial(const InitialLayout& layout, int n, int p, int q);

/// Recursive object merge: keys of `patch` replace those of `base`.
[[nodiscard]] nlohmann::json merge_json(nlohmann::json base, const nlohmann::json& patch);

}  // namespace fmsync

#include "fmsync/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "fmsync/errors.hpp"
#include "fmsync/gains.hpp"
#include "fmsync/noise.hpp"

namespace fmsync {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw Error(ErrorKind::Config, where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(where, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!ok.count(key)) fail(where, "unknown key '" + key + "'");
    }
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(where, "must be finite");
    return d;
}

std::uint64_t seed_of(const json& v, const std::string& where) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        fail(where, "expected a nonnegative integer seed");
    }
    return v.get<std::uint64_t>();
}

SmallVec vector_of(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty() || v.size() > static_cast<std::size_t>(kMaxDim)) {
        fail(where, "expected an array of 1.." + std::to_string(kMaxDim) + " numbers");
    }
    SmallVec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) out(static_cast<Eigen::Index>(k)) = number(v[k], where);
    return out;
}

// Array of rows; a flat array is read as a single row unless `flat_is_column`.
SmallMat matrix_of(const json& v, const std::string& where, bool flat_is_column) {
    if (!v.is_array() || v.empty()) fail(where, "expected a nonempty array");
    if (!v.front().is_array()) {
        const SmallVec flat = vector_of(v, where);
        if (flat_is_column) return SmallMat(flat);
        return SmallMat(flat.transpose());
    }
    const std::size_t rows = v.size();
    const std::size_t cols = v.front().size();
    if (rows > static_cast<std::size_t>(kMaxDim) || cols == 0 || cols > static_cast<std::size_t>(kMaxDim)) {
        fail(where, "matrix dimensions exceed " + std::to_string(kMaxDim));
    }
    SmallMat out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!v[r].is_array() || v[r].size() != cols) fail(where, "rows must have equal length");
        for (std::size_t c = 0; c < cols; ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(v[r][c], where);
        }
    }
    return out;
}

json to_json_matrix(const SmallMat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

json to_json_vector(const SmallVec& v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
    return out;
}

void parse_topology(const json& t, RunConfig& cfg) {
    if (t.is_string()) {
        if (t.get<std::string>() != "default") fail("topology", "the only named topology is \"default\"");
        cfg.topology = default_topology();
        cfg.n = cfg.topology.size();
        cfg.edges = cfg.topology.edges();
        return;
    }
    check_keys(t, "topology", {"n", "edges", "adjacency"});
    if (t.contains("adjacency")) {
        const json& a = t["adjacency"];
        if (!a.is_array() || a.empty()) fail("topology.adjacency", "expected a square array of rows");
        const auto n = static_cast<Eigen::Index>(a.size());
        Mat adj(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!a[i].is_array() || static_cast<Eigen::Index>(a[i].size()) != n) {
                fail("topology.adjacency", "matrix must be square");
            }
            for (Eigen::Index j = 0; j < n; ++j) adj(i, j) = number(a[i][j], "topology.adjacency");
        }
        try {
            cfg.topology = build_topology(adj);
        } catch (const Error& e) {
            fail("topology.adjacency", e.what());
        }
    } else {
        if (!t.contains("n") || !t.contains("edges")) fail("topology", "needs 'n' and 'edges' or 'adjacency'");
        const json& nv = t["n"];
        if (!nv.is_number_integer() || nv.get<int>() < 1) fail("topology.n", "expected a positive integer");
        const int n = nv.get<int>();
        std::vector<Edge> edges;
        for (const json& e : t["edges"]) {
            if (!e.is_array() || e.size() < 2 || e.size() > 3 || !e[0].is_number_integer() ||
                !e[1].is_number_integer()) {
                fail("topology.edges", "each edge is [receiver, source] or [receiver, source, weight], 1-based");
            }
            Edge edge{e[0].get<int>() - 1, e[1].get<int>() - 1, e.size() == 3 ? number(e[2], "topology.edges") : 1.0};
            if (edge.receiver < 0 || edge.receiver >= n || edge.source < 0 || edge.source >= n) {
                fail("topology.edges", "agent index out of range 1.." + std::to_string(n));
            }
            edges.push_back(edge);
        }
        try {
            cfg.topology = topology_from_edges(n, edges);
        } catch (const Error& e) {
            fail("topology.edges", e.what());
        }
    }
    cfg.n = cfg.topology.size();
    cfg.edges = cfg.topology.edges();
}

}  // namespace

std::vector<std::string> preset_names() { return {"example1", "hindmarsh_rose"}; }

json preset_json(const std::string& name) {
    if (name == "example1") {
        return json::parse(R"({
  "name": "example1",
  "agent": {"S": [[0.0, 0.1], [-0.1, 0.0]], "B": [[1.0], [1.0]], "E": [4.5, 0.0], "omega_c": 3.0},
  "carrier": "rotational",
  "topology": "default",
  "gains": {"M": [[0.01, 0.005]], "K_o": [1.8, 1.76], "beta": 10.0, "epsilon": 1.0},
  "initial": {"seed": 11, "sigma_center": [0.2, 0.0], "sigma_spread": 0.003, "x_radius": 1.0,
              "observer_sigma": "zero"},
  "certificate": {"samples": 4096, "seed": 7, "safety_factor": 1.25, "refine_top": 8},
  "simulation": {"dt": 0.001, "horizon": 300.0, "record_stride": 100, "tail_fraction": 0.2,
                 "scenario": "modulated", "noise_percent": 1.0, "seed": 1},
  "verify": {"sync_tol": 0.01, "obs_tol": 0.02}
})");
    }
    if (name == "hindmarsh_rose") {
        return json::parse(R"({
  "name": "hindmarsh_rose",
  "agent": {"S": [[0.0, 0.015707963267948967], [-0.015707963267948967, 0.0]], "B": [[1.0], [1.0]],
            "E": [0.4, 0.0], "omega_c": 0.9},
  "carrier": "hindmarsh_rose",
  "topology": "default",
  "gains": {"M": [[0.01, 0.005]], "K_o": [20.039269908169873, 19.960730091830127], "beta": 10.0, "epsilon": 1.0},
  "initial": {"seed": 11, "sigma_center": [0.2, 0.0], "sigma_spread": 0.1,
              "x_center": [-1.0, -4.0, 2.0], "x_spread": 0.3, "observer_sigma": "zero"},
  "certificate": {"samples": 4096, "seed": 7, "safety_factor": 1.25, "refine_top": 8},
  "simulation": {"dt": 0.001, "horizon": 3000.0, "record_stride": 1000, "tail_fraction": 0.2,
                 "scenario": "modulated", "noise_percent": 1.0, "seed": 1},
  "verify": {"sync_tol": 0.02, "obs_tol": 0.05}
})");
    }
    throw Error(ErrorKind::Config, "unknown preset '" + name + "'");
}

json merge_json(json base, const json& patch) {
    if (!base.is_object() || !patch.is_object()) return patch;
    for (const auto& [key, value] : patch.items()) {
        if (base.contains(key) && base[key].is_object() && value.is_object()) {
            base[key] = merge_json(base[key], value);
        } else {
            base[key] = value;
        }
    }
    return base;
}

std::vector<AgentState> layout_initial(const InitialLayout& layout, int n, int p, int q) {
    if (layout.sigma_center.size() != p) throw Error(ErrorKind::Config, "initial.sigma_center must have p entries");
    if (!layout.x_radius && layout.x_center.size() != q) {
        throw Error(ErrorKind::Config, "initial.x_center must have q entries");
    }
    if (layout.x_radius && q != 2) throw Error(ErrorKind::Config, "initial.x_radius needs a 2-dimensional carrier");
    std::mt19937_64 rng(layout.seed);
    auto centered = [&] { return 2.0 * unit_uniform(rng) - 1.0; };
    std::vector<AgentState> out(n);
    for (int i = 0; i < n; ++i) {
        AgentState& s = out[i];
        s.sigma = layout.sigma_center;
        for (int k = 0; k < p; ++k) s.sigma(k) += layout.sigma_spread * centered();
        if (layout.x_radius) {
            const double phase = 2.0 * std::numbers::pi * (i + 0.25 * centered()) / n;
            s.x.resize(2);
            s.x << *layout.x_radius * std::cos(phase), *layout.x_radius * std::sin(phase);
        } else {
            s.x = layout.x_center;
            for (int k = 0; k < q; ++k) s.x(k) += layout.x_spread * centered();
        }
    }
    return out;
}

RunConfig parse_config(const json& input) {
    json doc = input;
    if (!doc.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
    if (doc.contains("preset")) {
        if (!doc["preset"].is_string()) fail("preset", "expected a string");
        const std::string preset = doc["preset"].get<std::string>();
        doc.erase("preset");
        doc = merge_json(preset_json(preset), doc);
    }
    check_keys(doc, "config",
               {"name", "agent", "carrier", "topology", "gains", "initial", "envelope", "certificate", "simulation",
                "verify", "f_min"});

    RunConfig cfg;
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) fail("name", "expected a string");
        cfg.name = doc["name"].get<std::string>();
    }

    if (!doc.contains("agent")) fail("config", "missing 'agent'");
    const json& a = doc["agent"];
    check_keys(a, "agent", {"S", "B", "E", "omega_c"});
    for (const char* key : {"S", "B", "E", "omega_c"}) {
        if (!a.contains(key)) fail("agent", std::string("missing '") + key + "'");
    }
    cfg.agent.S = matrix_of(a["S"], "agent.S", false);
    cfg.agent.B = matrix_of(a["B"], "agent.B", true);
    cfg.agent.E = SmallRow(vector_of(a["E"], "agent.E").transpose());
    cfg.agent.omega_c = number(a["omega_c"], "agent.omega_c");
    try {
        cfg.agent.validate();
    } catch (const Error& e) {
        fail("agent", e.what());
    }

    if (doc.contains("carrier")) {
        if (!doc["carrier"].is_string()) fail("carrier", "expected a carrier name");
        cfg.carrier_name = doc["carrier"].get<std::string>();
    }
    try {
        cfg.carrier = make_carrier(cfg.carrier_name);
    } catch (const Error& e) {
        fail("carrier", e.what());
    }
    const int p = cfg.agent.p();
    const int q = cfg.carrier->dim();

    if (!doc.contains("topology")) fail("config", "missing 'topology'");
    parse_topology(doc["topology"], cfg);

    if (doc.contains("gains")) {
        const json& g = doc["gains"];
        check_keys(g, "gains", {"M", "K_o", "rho", "beta", "epsilon", "observer_poles", "margin_factor", "slack_factor"});
        auto synth = [](const json& v) { return v.is_string() && v.get<std::string>() == "synthesize"; };
        if (g.contains("M") && !synth(g["M"])) {
            cfg.gains.M = matrix_of(g["M"], "gains.M", false);
            if (cfg.gains.M->rows() != cfg.agent.m() || cfg.gains.M->cols() != p) fail("gains.M", "must be m x p");
        }
        if (g.contains("K_o") && !synth(g["K_o"])) {
            cfg.gains.K_o = vector_of(g["K_o"], "gains.K_o");
            if (cfg.gains.K_o->size() != p) fail("gains.K_o", "must have p entries");
        }
        if (g.contains("rho") && !g["rho"].is_null()) {
            const double rho = number(g["rho"], "gains.rho");
            if (!(rho > 0.0)) fail("gains.rho", "must be positive");
            if (!is_rotation_form(cfg.agent)) fail("gains.rho", "needs the two-state rotation agent form");
            cfg.gains.rho = rho;
            cfg.gains.K_o = closed_form_k_o(cfg.agent, rho);
        }
        if (g.contains("beta")) {
            const json& b = g["beta"];
            if (!(b.is_string() && b.get<std::string>() == "certificate")) {
                cfg.gains.beta = number(b, "gains.beta");
                if (!(*cfg.gains.beta > 0.0)) fail("gains.beta", "must be positive");
            }
        }
        if (g.contains("epsilon")) cfg.gains.epsilon = number(g["epsilon"], "gains.epsilon");
        if (!(cfg.gains.epsilon > 0.0)) fail("gains.epsilon", "must be positive");
        if (g.contains("observer_poles")) {
            for (const json& v : g["observer_poles"]) cfg.gains.observer_poles.push_back(number(v, "gains.observer_poles"));
        }
        if (g.contains("margin_factor")) cfg.gains.margin_factor = number(g["margin_factor"], "gains.margin_factor");
        if (!(cfg.gains.margin_factor > 0.0 && cfg.gains.margin_factor < 1.0)) fail("gains.margin_factor", "must be in (0, 1)");
        if (g.contains("slack_factor")) cfg.gains.slack_factor = number(g["slack_factor"], "gains.slack_factor");
        if (!(cfg.gains.slack_factor > 1.0)) fail("gains.slack_factor", "must exceed 1");
    }

    if (!doc.contains("initial")) fail("config", "missing 'initial'");
    const json& ini = doc["initial"];
    check_keys(ini, "initial",
               {"agents", "seed", "sigma_center", "sigma_spread", "x_radius", "x_center", "x_spread", "observer_sigma"});
    if (ini.contains("observer_sigma")) {
        const json& o = ini["observer_sigma"];
        if (o == "zero") {
            cfg.observer_init = ObserverInit::Zero;
        } else if (o == "exact") {
            cfg.observer_init = ObserverInit::Exact;
        } else {
            fail("initial.observer_sigma", "expected \"zero\" or \"exact\"");
        }
    }
    if (ini.contains("sigma_center")) {
        InitialLayout layout;
        if (ini.contains("seed")) layout.seed = seed_of(ini["seed"], "initial.seed");
        layout.sigma_center = vector_of(ini["sigma_center"], "initial.sigma_center");
        if (ini.contains("sigma_spread")) layout.sigma_spread = number(ini["sigma_spread"], "initial.sigma_spread");
        if (ini.contains("x_radius")) layout.x_radius = number(ini["x_radius"], "initial.x_radius");
        if (ini.contains("x_center")) layout.x_center = vector_of(ini["x_center"], "initial.x_center");
        if (ini.contains("x_spread")) layout.x_spread = number(ini["x_spread"], "initial.x_spread");
        cfg.layout = layout;
    }
    if (ini.contains("agents")) {
        const json& list = ini["agents"];
        if (!list.is_array() || static_cast<int>(list.size()) != cfg.n) {
            fail("initial.agents", "expected one entry per agent (" + std::to_string(cfg.n) + ")");
        }
        for (const json& s : list) {
            check_keys(s, "initial.agents[]", {"sigma", "x"});
            AgentState st{vector_of(s.at("sigma"), "initial.agents[].sigma"), vector_of(s.at("x"), "initial.agents[].x")};
            if (st.sigma.size() != p || st.x.size() != q) fail("initial.agents[]", "sigma needs p entries and x needs q");
            cfg.initial.push_back(st);
        }
    } else if (cfg.layout) {
        try {
            cfg.initial = layout_initial(*cfg.layout, cfg.n, p, q);
        } catch (const Error& e) {
            fail("initial", e.what());
        }
    } else {
        fail("initial", "needs 'agents' or a seeded layout ('sigma_center', ...)");
    }

    if (doc.contains("envelope")) {
        const json& e = doc["envelope"];
        if (!(e.is_string() && e.get<std::string>() == "measure")) {
            check_keys(e, "envelope", {"lo", "hi"});
            Envelope env{number(e.at("lo"), "envelope.lo"), number(e.at("hi"), "envelope.hi")};
            if (!(env.lo > 0.0 && env.hi >= env.lo)) fail("envelope", "need 0 < lo <= hi");
            cfg.envelope = env;
        }
    }

    if (doc.contains("certificate")) {
        const json& c = doc["certificate"];
        check_keys(c, "certificate", {"samples", "seed", "safety_factor", "refine_top"});
        if (c.contains("samples")) {
            if (!c["samples"].is_number_integer() || c["samples"].get<int>() < 1) fail("certificate.samples", "expected a positive integer");
            cfg.sampling.samples = c["samples"].get<int>();
        }
        if (c.contains("seed")) cfg.sampling.seed = seed_of(c["seed"], "certificate.seed");
        if (c.contains("safety_factor")) cfg.sampling.safety_factor = number(c["safety_factor"], "certificate.safety_factor");
        if (!(cfg.sampling.safety_factor >= 1.0)) fail("certificate.safety_factor", "must be at least 1");
        if (c.contains("refine_top")) {
            if (!c["refine_top"].is_number_integer() || c["refine_top"].get<int>() < 0) fail("certificate.refine_top", "expected a nonnegative integer");
            cfg.sampling.refine_top = c["refine_top"].get<int>();
        }
    }

    if (doc.contains("simulation")) {
        const json& s = doc["simulation"];
        check_keys(s, "simulation", {"dt", "horizon", "record_stride", "tail_fraction", "scenario", "noise_percent", "seed"});
        SimulationSpec& sim = cfg.simulation;
        if (s.contains("dt")) sim.dt = number(s["dt"], "simulation.dt");
        if (s.contains("horizon")) sim.horizon = number(s["horizon"], "simulation.horizon");
        if (s.contains("record_stride")) {
            if (!s["record_stride"].is_number_integer() || s["record_stride"].get<int>() < 1) fail("simulation.record_stride", "expected a positive integer");
            sim.record_stride = s["record_stride"].get<int>();
        }
        if (s.contains("tail_fraction")) sim.tail_fraction = number(s["tail_fraction"], "simulation.tail_fraction");
        if (s.contains("scenario")) {
            const json& v = s["scenario"];
            const auto sc = v.is_string() ? parse_scenario(v.get<std::string>()) : std::nullopt;
            if (!sc) fail("simulation.scenario", "expected modulated, ideal, ideal_noisy or modulated_noisy");
            sim.scenario = *sc;
        }
        if (s.contains("noise_percent")) sim.noise_percent = number(s["noise_percent"], "simulation.noise_percent");
        if (s.contains("seed")) sim.seed = seed_of(s["seed"], "simulation.seed");
    }
    const SimulationSpec& sim = cfg.simulation;
    if (!(sim.dt > 0.0)) fail("simulation.dt", "must be positive");
    if (!(sim.horizon >= sim.dt)) fail("simulation.horizon", "must be at least dt");
    if (!(sim.tail_fraction > 0.0 && sim.tail_fraction <= 1.0)) fail("simulation.tail_fraction", "must be in (0, 1]");
    if (!(sim.noise_percent >= 0.0)) fail("simulation.noise_percent", "must be nonnegative");

    if (doc.contains("verify")) {
        const json& v = doc["verify"];
        check_keys(v, "verify", {"sync_tol", "obs_tol"});
        if (v.contains("sync_tol")) cfg.verify.sync_tol = number(v["sync_tol"], "verify.sync_tol");
        if (v.contains("obs_tol")) cfg.verify.obs_tol = number(v["obs_tol"], "verify.obs_tol");
        if (!(cfg.verify.sync_tol > 0.0 && cfg.verify.obs_tol > 0.0)) fail("verify", "tolerances must be positive");
    }

    if (doc.contains("f_min")) cfg.f_min = number(doc["f_min"], "f_min");
    if (!(cfg.f_min > 0.0)) fail("f_min", "must be positive");
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot read config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Config, path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
    json doc;
    doc["name"] = cfg.name;
    doc["agent"] = {{"S", to_json_matrix(cfg.agent.S)},
                    {"B", to_json_matrix(cfg.agent.B)},
                    {"E", to_json_vector(SmallVec(cfg.agent.E.transpose()))},
                    {"omega_c", cfg.agent.omega_c}};
    doc["carrier"] = cfg.carrier_name;
    json edges = json::array();
    for (const Edge& e : cfg.edges) edges.push_back({e.receiver + 1, e.source + 1, e.weight});
    doc["topology"] = {{"n", cfg.n}, {"edges", edges}};

    json g;
    g["M"] = cfg.gains.M ? to_json_matrix(*cfg.gains.M) : json("synthesize");
    g["K_o"] = cfg.gains.K_o ? to_json_vector(*cfg.gains.K_o) : json("synthesize");
    if (cfg.gains.rho) g["rho"] = *cfg.gains.rho;
    g["beta"] = cfg.gains.beta ? json(*cfg.gains.beta) : json("certificate");
    g["epsilon"] = cfg.gains.epsilon;
    g["observer_poles"] = cfg.gains.observer_poles;
    g["margin_factor"] = cfg.gains.margin_factor;
    g["slack_factor"] = cfg.gains.slack_factor;
    doc["gains"] = g;

    json ini;
    json agents = json::array();
    for (const AgentState& s : cfg.initial) agents.push_back({{"sigma", to_json_vector(s.sigma)}, {"x", to_json_vector(s.x)}});
    ini["agents"] = agents;
    ini["observer_sigma"] = cfg.observer_init == ObserverInit::Exact ? "exact" : "zero";
    doc["initial"] = ini;

    if (cfg.envelope) doc["envelope"] = {{"lo", cfg.envelope->lo}, {"hi", cfg.envelope->hi}};
    doc["certificate"] = {{"samples", cfg.sampling.samples},
                          {"seed", cfg.sampling.seed},
                          {"safety_factor", cfg.sampling.safety_factor},
                          {"refine_top", cfg.sampling.refine_top}};
    const SimulationSpec& sim = cfg.simulation;
    doc["simulation"] = {{"dt", sim.dt},
                         {"horizon", sim.horizon},
                         {"record_stride", sim.record_stride},
                         {"tail_fraction", sim.tail_fraction},
                         {"scenario", std::string(to_string(sim.scenario))},
                         {"noise_percent", sim.noise_percent},
                         {"seed", sim.seed}};
    doc["verify"] = {{"sync_tol", cfg.verify.sync_tol}, {"obs_tol", cfg.verify.obs_tol}};
    doc["f_min"] = cfg.f_min;
    return doc;
}

}  // namespace fmsync

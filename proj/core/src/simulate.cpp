#include "fmsync/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "fmsync/control.hpp"
#include "fmsync/errors.hpp"
#include "fmsync/noise.hpp"
#include "fmsync/observer.hpp"

namespace fmsync {

namespace {

void check_finite(const Vec& v, double t, const char* stage) {
    if (!v.allFinite()) {
        std::ostringstream os;
        os << "non-finite derivative at t = " << t << " (" << stage << ")";
        throw Error(ErrorKind::IntegrationFailure, os.str());
    }
}

}  // namespace

void rk4_step(double t, Vec& y, double dt, const Derivative& f, Rk4Workspace& ws) {
    if (!(dt > 0.0)) throw Error(ErrorKind::Config, "dt must be positive");
    const Eigen::Index n = y.size();
    ws.k1.resize(n);
    ws.k2.resize(n);
    ws.k3.resize(n);
    ws.k4.resize(n);
    ws.stage.resize(n);
    const double h = 0.5 * dt;

    f(t, y, ws.k1);
    check_finite(ws.k1, t, "k1");
    ws.stage = y + h * ws.k1;
    f(t + h, ws.stage, ws.k2);
    check_finite(ws.k2, t, "k2");
    ws.stage = y + h * ws.k2;
    f(t + h, ws.stage, ws.k3);
    check_finite(ws.k3, t, "k3");
    ws.stage = y + dt * ws.k3;
    f(t + dt, ws.stage, ws.k4);
    check_finite(ws.k4, t, "k4");
    y += (dt / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
}

Vec rk4_step(double t, const Vec& y, double dt, const Derivative& f) {
    Rk4Workspace ws;
    Vec out = y;
    rk4_step(t, out, dt, f, ws);
    return out;
}

std::string_view to_string(Scenario s) noexcept {
    switch (s) {
        case Scenario::Modulated: return "modulated";
        case Scenario::Ideal: return "ideal";
        case Scenario::IdealNoisy: return "ideal_noisy";
        case Scenario::ModulatedNoisy: return "modulated_noisy";
    }
    return "unknown";
}

std::optional<Scenario> parse_scenario(std::string_view name) noexcept {
    for (Scenario s : {Scenario::Modulated, Scenario::Ideal, Scenario::IdealNoisy, Scenario::ModulatedNoisy}) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

bool is_noisy(Scenario s) noexcept { return s == Scenario::IdealNoisy || s == Scenario::ModulatedNoisy; }

void SimConfig::validate() const {
    agent.validate();
    if (!carrier) throw Error(ErrorKind::Config, "no carrier");
    const int n = topology.size();
    if (n == 0) throw Error(ErrorKind::Config, "empty topology");
    if (!(dt > 0.0)) throw Error(ErrorKind::Config, "dt must be positive");
    if (!(horizon >= dt)) throw Error(ErrorKind::Config, "horizon must be at least one step");
    if (!(noise_percent >= 0.0)) throw Error(ErrorKind::Config, "noise percent must be nonnegative");
    if (record_stride < 1) throw Error(ErrorKind::Config, "record_stride must be at least 1");
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw Error(ErrorKind::Config, "tail_fraction must be in (0, 1]");
    if (!(beta > 0.0)) throw Error(ErrorKind::Config, "beta must be positive");
    if (M.rows() != agent.m() || M.cols() != agent.p()) throw Error(ErrorKind::DimensionMismatch, "M must be m x p");
    if (K_o.size() != agent.p()) throw Error(ErrorKind::DimensionMismatch, "K_o must have p entries");
    if (static_cast<int>(initial.size()) != n) {
        throw Error(ErrorKind::DimensionMismatch, "need one initial condition per agent");
    }
    for (const AgentState& s : initial) {
        if (s.sigma.size() != agent.p() || s.x.size() != carrier->dim()) {
            throw Error(ErrorKind::DimensionMismatch, "initial condition has the wrong shape");
        }
        if (!s.sigma.allFinite() || !s.x.allFinite()) throw Error(ErrorKind::Config, "initial condition is not finite");
    }
}

namespace {

// Closed-loop vector field over the flat state [agents..., edges...], each block [sigma; x].
class ClosedLoop {
  public:
    explicit ClosedLoop(const SimConfig& cfg)
        : cfg_(cfg),
          obs_(cfg.K_o, cfg.beta, cfg.agent, cfg.carrier, cfg.f_min),
          n_(cfg.topology.size()),
          p_(cfg.agent.p()),
          q_(cfg.carrier->dim()),
          block_(p_ + q_),
          edges_(cfg.topology.edges()),
          agent_edges_(n_),
          signals_(n_),
          x_noise_(edges_.size(), SmallVec::Zero(q_)),
          sigma_noise_(n_),
          chi_(n_),
          phi_(n_) {
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            const Edge& edge = edges_[e];
            agent_edges_[edge.receiver].push_back(e);
            signals_[edge.receiver].push_back({edge.source, SmallVec::Zero(p_)});
            sigma_noise_[edge.receiver].push_back(SmallVec::Zero(p_));
        }
    }

    [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>((n_ + edges_.size()) * block_); }
    [[nodiscard]] Eigen::Index agent_offset(int i) const { return static_cast<Eigen::Index>(i) * block_; }
    [[nodiscard]] Eigen::Index edge_offset(std::size_t e) const {
        return static_cast<Eigen::Index>(n_ + e) * block_;
    }

    [[nodiscard]] SmallVec sigma(const Vec& y, int i) const { return y.segment(agent_offset(i), p_); }
    [[nodiscard]] SmallVec x(const Vec& y, int i) const { return y.segment(agent_offset(i) + p_, q_); }
    [[nodiscard]] SmallVec sigma_hat(const Vec& y, std::size_t e) const { return y.segment(edge_offset(e), p_); }
    [[nodiscard]] SmallVec x_hat(const Vec& y, std::size_t e) const { return y.segment(edge_offset(e) + p_, q_); }

    Vec initial_state() const {
        Vec y(size());
        for (int i = 0; i < n_; ++i) {
            y.segment(agent_offset(i), p_) = cfg_.initial[i].sigma;
            y.segment(agent_offset(i) + p_, q_) = cfg_.initial[i].x;
        }
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            const AgentState& src = cfg_.initial[edges_[e].source];
            y.segment(edge_offset(e), p_) =
                cfg_.observer_init == ObserverInit::Exact ? Vec(src.sigma) : Vec::Zero(p_);
            y.segment(edge_offset(e) + p_, q_) = src.x;
        }
        return y;
    }

    // Redraws the per-step noise from the state at the start of the step.
    void draw_noise(const Vec& y, std::mt19937_64& rng) {
        if (cfg_.scenario == Scenario::ModulatedNoisy) {
            for (std::size_t e = 0; e < edges_.size(); ++e) {
                const SmallVec xj = x(y, edges_[e].source);
                x_noise_[e] = inject_noise(xj, cfg_.noise_percent, rng) - xj;
            }
        } else if (cfg_.scenario == Scenario::IdealNoisy) {
            for (int i = 0; i < n_; ++i) {
                for (std::size_t k = 0; k < agent_edges_[i].size(); ++k) {
                    const SmallVec sj = sigma(y, edges_[agent_edges_[i][k]].source);
                    sigma_noise_[i][k] = inject_noise(sj, cfg_.noise_percent, rng) - sj;
                }
            }
        }
    }

    // chi_i for every agent; the modulated path reads only sigma_i and the agent's own observers.
    void controls(const Vec& y) {
        const bool modulated = cfg_.scenario == Scenario::Modulated || cfg_.scenario == Scenario::ModulatedNoisy;
        for (int i = 0; i < n_; ++i) {
            auto& sig = signals_[i];
            for (std::size_t k = 0; k < sig.size(); ++k) {
                sig[k].sigma = modulated ? sigma_hat(y, agent_edges_[i][k]) : sigma(y, sig[k].source);
            }
            const SmallVec si = sigma(y, i);
            if (modulated) {
                chi_[i] = control_modulated(si, sig, cfg_.topology.neighbors(i), cfg_.M);
            } else if (cfg_.scenario == Scenario::IdealNoisy) {
                chi_[i] = control_ideal(si, sig, cfg_.topology.neighbors(i), cfg_.M, sigma_noise_[i]);
            } else {
                chi_[i] = control_ideal(si, sig, cfg_.topology.neighbors(i), cfg_.M);
            }
        }
    }

    void perturbations(const Vec& y) {
        for (int i = 0; i < n_; ++i) {
            SmallVec acc = SmallVec::Zero(p_);
            for (std::size_t e : agent_edges_[i]) {
                acc += edges_[e].weight * (sigma_hat(y, e) - sigma(y, edges_[e].source));
            }
            phi_[i] = acc;
        }
    }

    void derivative(const Vec& y, Vec& dy) {
        dy.resize(size());
        controls(y);
        for (int i = 0; i < n_; ++i) {
            const AgentState d = agent_derivative({sigma(y, i), x(y, i)}, chi_[i], cfg_.agent, *cfg_.carrier);
            dy.segment(agent_offset(i), p_) = d.sigma;
            dy.segment(agent_offset(i) + p_, q_) = d.x;
        }
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            SmallVec xj = x(y, edges_[e].source);
            if (cfg_.scenario == Scenario::ModulatedNoisy) xj += x_noise_[e];
            const ObserverState d = observer_derivative({sigma_hat(y, e), x_hat(y, e)}, xj, obs_);
            dy.segment(edge_offset(e), p_) = d.sigma_hat;
            dy.segment(edge_offset(e) + p_, q_) = d.x_hat;
        }
    }

    [[nodiscard]] const std::vector<SmallVec>& chi() const { return chi_; }
    [[nodiscard]] const std::vector<SmallVec>& phi() const { return phi_; }
    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] int p() const { return p_; }
    [[nodiscard]] int q() const { return q_; }
    [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }

  private:
    const SimConfig& cfg_;
    ObserverParams obs_;
    int n_;
    int p_;
    int q_;
    int block_;
    const std::vector<Edge>& edges_;
    std::vector<std::vector<std::size_t>> agent_edges_;
    std::vector<std::vector<NeighborSignal>> signals_;
    std::vector<SmallVec> x_noise_;
    std::vector<std::vector<SmallVec>> sigma_noise_;
    std::vector<SmallVec> chi_;
    std::vector<SmallVec> phi_;
};

double stacked_norm(const std::vector<SmallVec>& parts) {
    double s = 0.0;
    for (const SmallVec& v : parts) s += v.squaredNorm();
    return std::sqrt(s);
}

}  // namespace

Trajectory simulate(const SimConfig& cfg) {
    cfg.validate();
    ClosedLoop loop(cfg);
    const int n = loop.n();
    const int p = loop.p();
    const int q = loop.q();
    const std::vector<Edge>& edges = loop.edges();
    const AgentParams& agent = cfg.agent;

    Trajectory traj;
    traj.n = n;
    traj.p = p;
    traj.q = q;
    traj.m = agent.m();
    traj.edges = edges;
    traj.tail.edge_obs_err.assign(edges.size(), 0.0);

    const auto steps = static_cast<std::uint64_t>(std::llround(cfg.horizon / cfg.dt));
    traj.tail.start_time = cfg.horizon * (1.0 - cfg.tail_fraction);
    if (cfg.record) {
        const std::size_t recs = steps / cfg.record_stride + 2;
        traj.t.reserve(recs);
        traj.sigma.reserve(recs * n * p);
        traj.x.reserve(recs * n * q);
        traj.omega.reserve(recs * n);
    }

    Vec y = loop.initial_state();
    std::vector<double> x0_norm(n);
    for (int i = 0; i < n; ++i) x0_norm[i] = loop.x(y, i).norm();
    traj.extremes.x_norm_min = std::numeric_limits<double>::infinity();
    traj.extremes.x_norm_max = 0.0;

    std::mt19937_64 rng(cfg.seed);
    std::vector<bool> bound_flagged(edges.size(), false);
    std::vector<double> omega(n);

    // Scans the committed state at time t: tail suprema, extremes, bound monitor and recording.
    auto observe = [&](double t, std::uint64_t k) {
        loop.controls(y);
        loop.perturbations(y);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int i = 0; i < n; ++i) {
            omega[i] = agent.frequency(loop.sigma(y, i));
            lo = std::min(lo, omega[i]);
            hi = std::max(hi, omega[i]);
            const double xn = loop.x(y, i).norm();
            traj.extremes.x_norm_min = std::min(traj.extremes.x_norm_min, xn);
            traj.extremes.x_norm_max = std::max(traj.extremes.x_norm_max, xn);
            if (x0_norm[i] > 0.0) {
                traj.extremes.x_norm_drift = std::max(traj.extremes.x_norm_drift, std::abs(xn / x0_norm[i] - 1.0));
            }
        }
        const bool in_tail = t >= traj.tail.start_time - 0.5 * cfg.dt;
        if (in_tail) {
            traj.tail.sync_err = std::max(traj.tail.sync_err, hi - lo);
            traj.tail.phi_norm = std::max(traj.tail.phi_norm, stacked_norm(loop.phi()));
            traj.tail.chi_norm = std::max(traj.tail.chi_norm, stacked_norm(loop.chi()));
        }
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const int j = edges[e].source;
            const double sig_err = (loop.sigma_hat(y, e) - loop.sigma(y, j)).norm();
            const double x_err = (loop.x_hat(y, e) - loop.x(y, j)).norm();
            traj.extremes.sigma_err = std::max(traj.extremes.sigma_err, sig_err);
            traj.extremes.x_err = std::max(traj.extremes.x_err, x_err);
            if (in_tail) {
                const double oe = std::abs(agent.frequency(loop.sigma_hat(y, e)) - omega[j]);
                traj.tail.edge_obs_err[e] = std::max(traj.tail.edge_obs_err[e], oe);
                traj.tail.max_obs_err = std::max(traj.tail.max_obs_err, oe);
                traj.tail.sigma_err = std::max(traj.tail.sigma_err, sig_err);
            }
            if (cfg.b_x && x_err > *cfg.b_x && !bound_flagged[e]) {
                bound_flagged[e] = true;
                std::ostringstream os;
                os << "observer " << edges[e].receiver + 1 << "<-" << j + 1 << ": ||x_hat - x|| = " << x_err
                   << " exceeds b_x = " << *cfg.b_x;
                traj.events.push_back({t, "observer_region_exceeded", os.str()});
            }
        }
        if (!cfg.record || (k % static_cast<std::uint64_t>(cfg.record_stride) != 0 && k != steps)) return;
        traj.t.push_back(t);
        for (int i = 0; i < n; ++i) {
            const SmallVec s = loop.sigma(y, i);
            const SmallVec xi = loop.x(y, i);
            traj.sigma.insert(traj.sigma.end(), s.data(), s.data() + p);
            traj.x.insert(traj.x.end(), xi.data(), xi.data() + q);
            traj.omega.push_back(omega[i]);
            traj.chi.insert(traj.chi.end(), loop.chi()[i].data(), loop.chi()[i].data() + traj.m);
            traj.phi.insert(traj.phi.end(), loop.phi()[i].data(), loop.phi()[i].data() + p);
        }
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const SmallVec sh = loop.sigma_hat(y, e);
            const SmallVec xh = loop.x_hat(y, e);
            traj.sigma_hat.insert(traj.sigma_hat.end(), sh.data(), sh.data() + p);
            traj.x_hat.insert(traj.x_hat.end(), xh.data(), xh.data() + q);
            traj.omega_hat.push_back(agent.frequency(sh));
        }
    };

    const Derivative f = [&loop](double, const Vec& state, Vec& dy) { loop.derivative(state, dy); };
    Rk4Workspace ws;
    double t = 0.0;
    try {
        loop.draw_noise(y, rng);
        observe(0.0, 0);
        for (std::uint64_t k = 1; k <= steps; ++k) {
            t = static_cast<double>(k - 1) * cfg.dt;
            if (k > 1) loop.draw_noise(y, rng);
            rk4_step(t, y, cfg.dt, f, ws);
            t = static_cast<double>(k) * cfg.dt;
            observe(t, k);
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ObserverSingularity) {
            std::ostringstream os;
            os << e.what() << " (near t = " << t << ")";
            throw Error(ErrorKind::ObserverSingularity, os.str());
        }
        throw;
    }
    traj.steps = steps;
    return traj;
}

Envelope measure_envelope(const AgentParams& agent, const Carrier& carrier, const std::vector<AgentState>& initial,
                          double dt, double horizon) {
    agent.validate();
    if (initial.empty()) throw Error(ErrorKind::Config, "no initial conditions for the envelope run");
    const int p = agent.p();
    const int q = carrier.dim();
    const SmallVec zero_chi = SmallVec::Zero(agent.m());
    const Derivative f = [&](double, const Vec& y, Vec& dy) {
        const AgentState d = agent_derivative({y.head(p), y.tail(q)}, zero_chi, agent, carrier);
        dy.resize(p + q);
        dy.head(p) = d.sigma;
        dy.tail(q) = d.x;
    };
    Envelope env{std::numeric_limits<double>::infinity(), 0.0};
    const auto steps = static_cast<std::uint64_t>(std::llround(horizon / dt));
    Rk4Workspace ws;
    for (const AgentState& s : initial) {
        Vec y(p + q);
        y.head(p) = s.sigma;
        y.tail(q) = s.x;
        for (std::uint64_t k = 0; k <= steps; ++k) {
            const double xn = y.tail(q).norm();
            env.lo = std::min(env.lo, xn);
            env.hi = std::max(env.hi, xn);
            if (k < steps) rk4_step(static_cast<double>(k) * dt, y, dt, f, ws);
        }
    }
    return env;
}

}  // namespace fmsync

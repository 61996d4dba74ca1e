#include "fmsync/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <sstream>

#include "fmsync/csv.hpp"
#include "fmsync/errors.hpp"
#include "fmsync/noise.hpp"
#include "fmsync/observer.hpp"
#include "fmsync/pipeline.hpp"
#include "fmsync/report.hpp"

namespace fmsync::cli {

namespace {

using json = nlohmann::json;

class Suite {
  public:
    using Body = std::function<void(CheckResult&)>;

    void check(const std::string& module, const std::string& name, const Body& body) {
        CheckResult r;
        r.module = module;
        r.name = name;
        const auto start = std::chrono::steady_clock::now();
        try {
            body(r);
        } catch (const Error& e) {
            r.status = CheckStatus::Fail;
            r.message = e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        results_.push_back(std::move(r));
    }

    void skip(const std::string& module, const std::string& name, const std::string& reason) {
        CheckResult r;
        r.module = module;
        r.name = name;
        r.status = CheckStatus::Skip;
        r.message = reason;
        results_.push_back(std::move(r));
    }

    std::vector<CheckResult> take() { return std::move(results_); }

  private:
    std::vector<CheckResult> results_;
};

// Sets pass/fail from value < limit.
void below(CheckResult& r, double value, double limit) {
    r.value = value;
    r.limit = limit;
    r.status = value < limit ? CheckStatus::Pass : CheckStatus::Fail;
    if (r.status == CheckStatus::Fail) {
        std::ostringstream os;
        os << "measured " << value << ", limit " << limit;
        r.message = os.str();
    }
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// States with ||x|| spread over the shell [lo, hi].
std::vector<SmallVec> shell_samples(int q, const Envelope& env, std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<SmallVec> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        SmallVec u(q);
        for (int c = 0; c < q; ++c) u(c) = normal(rng);
        const double radius = env.lo + (env.hi - env.lo) * unit_uniform(rng);
        out.push_back(radius * u / u.norm());
    }
    return out;
}

double decomposition_residual(const NetworkTopology& topo, const LaplacianDecomposition& dec) {
    const auto n = static_cast<Eigen::Index>(topo.size());
    const Mat& L = topo.laplacian();
    const Vec ones = Vec::Ones(n);
    Mat block = Mat::Zero(n, n);
    block.bottomRightCorner(n - 1, n - 1) = dec.H;
    double res = (dec.r.transpose() * L).cwiseAbs().maxCoeff();
    res = std::max(res, std::abs(dec.r.dot(ones) - 1.0));
    if (n > 1) {
        res = std::max(res, (dec.W * ones).cwiseAbs().maxCoeff());
        res = std::max(res, (dec.r.transpose() * dec.U).cwiseAbs().maxCoeff());
    }
    res = std::max(res, (dec.T() * dec.T_inverse() - Mat::Identity(n, n)).cwiseAbs().maxCoeff());
    res = std::max(res, (dec.T() * L * dec.T_inverse() - block).cwiseAbs().maxCoeff());
    return res;
}

// Largest relative gap between K' and a central difference of K(x_hat) along the single-edge observer flow.
double k_prime_gap(const RunConfig& cfg, const DesignResult& d) {
    const AgentParams& agent = cfg.agent;
    const Carrier& carrier = *cfg.carrier;
    const ObserverParams params(d.observer.K_o, d.beta, agent, cfg.carrier, cfg.f_min);
    const int p = agent.p();
    const int q = carrier.dim();
    const int source = cfg.edges.empty() ? 0 : cfg.edges.front().source;

    Vec y(2 * (p + q));
    y << cfg.initial[source].sigma, cfg.initial[source].x, SmallVec::Zero(p), cfg.initial[source].x;
    const Derivative f = [&](double, const Vec& s, Vec& ds) {
        AgentState a{s.segment(0, p), s.segment(p, q)};
        ObserverState o{s.segment(p + q, p), s.segment(2 * p + q, q)};
        const AgentState da = agent_derivative(a, SmallVec::Zero(agent.m()), agent, carrier);
        const ObserverState dob = observer_derivative(o, a.x, params);
        ds.resize(s.size());
        ds << da.sigma, da.x, dob.sigma_hat, dob.x_hat;
    };
    const Derivative reversed = [&](double t, const Vec& s, Vec& ds) {
        f(-t, s, ds);
        ds = -ds;
    };

    const double dt = cfg.simulation.dt;
    const double h = dt / 16.0;
    const int steps = static_cast<int>(std::min(20.0, cfg.simulation.horizon) / dt);
    const int every = std::max(1, steps / 200);
    Rk4Workspace ws;
    double worst = 0.0;
    double t = 0.0;
    for (int k = 0; k < steps; ++k) {
        if (k % every == 0) {
            const SmallVec x = y.segment(p, q);
            const SmallVec sh = y.segment(p + q, p);
            const SmallVec xh = y.segment(2 * p + q, q);
            const double wh = agent.frequency(sh);
            const SmallMat analytic = k_prime(x, xh, wh, kappa(x, xh, wh, params), d.observer.K_o, carrier, cfg.f_min);
            Vec fwd = y;
            Vec bwd = y;
            rk4_step(t, fwd, h, f, ws);
            rk4_step(-t, bwd, h, reversed, ws);
            const SmallMat kf = k_of(fwd.segment(2 * p + q, q), d.observer.K_o, carrier, cfg.f_min);
            const SmallMat kb = k_of(bwd.segment(2 * p + q, q), d.observer.K_o, carrier, cfg.f_min);
            const SmallMat numeric = (kf - kb) / (2.0 * h);
            const double scale = analytic.norm();
            if (scale > 0.0) worst = std::max(worst, (numeric - analytic).norm() / scale);
        }
        rk4_step(t, y, dt, f, ws);
        t += dt;
    }
    return worst;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

const char* status_name(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::Skip: return "skip";
    }
    return "fail";
}

}  // namespace

std::vector<CheckResult> run_verify_suite(const RunConfig& cfg) {
    Suite suite;
    const NetworkTopology& topo = cfg.topology;

    suite.check("netgraph", "laplacian_row_sums", [&](CheckResult& r) {
        const Vec rows = topo.laplacian() * Vec::Ones(topo.size());
        r.value = rows.cwiseAbs().maxCoeff();
        r.status = r.value == 0.0 ? CheckStatus::Pass : CheckStatus::Fail;
        if (r.status == CheckStatus::Fail) r.message = "L 1 != 0 (max " + fmt(r.value) + ")";
    });

    const bool tree = has_spanning_tree(topo);
    suite.check("netgraph", "spanning_tree", [&](CheckResult& r) {
        r.status = tree ? CheckStatus::Pass : CheckStatus::Fail;
        if (!tree) r.message = "connectivity assumption violated: the graph has no spanning tree";
    });

    const std::string downstream_skip = "requires a spanning tree";
    const std::vector<std::pair<std::string, std::string>> downstream{
        {"netgraph", "decomposition"},     {"netgraph", "h_spectrum"},
        {"gains", "design"},               {"linsolve", "observer_lyapunov_residual"},
        {"gains", "closed_form_gain"}, {"linsolve", "riccati_residual"},
        {"gains", "a_zeta_hurwitz"},       {"linsolve", "q_lyapunov_residual"},
        {"gains", "small_gain"},           {"gains", "certificate"},
        {"plant", "jacobian_fd"},          {"fmobserver", "gain_identity"},
        {"fmobserver", "k_prime_fd"},      {"fmobserver", "exact_initialization"},
        {"simkit", "closed_loop_run"},     {"simkit", "omega_identity"},      {"fmcontrol", "consensus"},
        {"fmobserver", "convergence"},     {"plant", "norm_conservation"},
        {"simkit", "determinism"}};
    if (!tree) {
        for (const auto& [module, name] : downstream) suite.skip(module, name, downstream_skip);
        return suite.take();
    }

    const LaplacianDecomposition dec = decompose(topo);
    suite.check("netgraph", "decomposition", [&](CheckResult& r) { below(r, decomposition_residual(topo, dec), 1e-10); });
    suite.check("netgraph", "h_spectrum", [&](CheckResult& r) {
        r.value = lambda_star_of(dec.H);
        r.status = r.value > 0.0 ? CheckStatus::Pass : CheckStatus::Fail;
        r.message = "min Re lambda(H) = " + fmt(r.value);
    });

    std::optional<DesignResult> designed;
    suite.check("gains", "design", [&](CheckResult& r) {
        designed = design(cfg);
        r.status = CheckStatus::Pass;
    });
    if (!designed) {
        for (std::size_t k = 3; k < downstream.size(); ++k) {
            suite.skip(downstream[k].first, downstream[k].second, "gain design failed");
        }
        return suite.take();
    }
    const DesignResult& d = *designed;
    const AgentParams& agent = cfg.agent;
    const bool uncoupled = d.controller.M.isZero(0.0);

    suite.check("linsolve", "observer_lyapunov_residual", [&](CheckResult& r) {
        const Mat S_bar = agent.S - d.observer.K_o * agent.E;
        below(r, lyapunov_residual(d.observer.P.matrix(), S_bar, Mat::Identity(agent.p(), agent.p())), 1e-9);
    });

    if (is_rotation_form(agent) && std::isfinite(d.observer.rho) &&
        (closed_form_k_o(agent, d.observer.rho) - d.observer.K_o).norm() < 1e-12) {
        suite.check("gains", "closed_form_gain", [&](CheckResult& r) {
            const double s = agent.S(0, 1);
            const double rho = d.observer.rho;
            Mat closed(2, 2);
            closed << 1.0, -1.0, -1.0, (rho + 2.0 * s) / rho;
            closed /= 2.0 * s;
            below(r, (closed - d.observer.P.matrix()).norm(), 1e-10);
        });
    } else {
        suite.skip("gains", "closed_form_gain", "K_o is not the two-state closed form");
    }

    if (d.controller.synthesized) {
        suite.check("linsolve", "riccati_residual", [&](CheckResult& r) {
            below(r, riccati_residual(d.controller.G.matrix(), agent.S, agent.B, d.controller.lambda_star,
                                      d.controller.epsilon),
                  1e-8);
        });
    } else {
        suite.skip("linsolve", "riccati_residual", "M is supplied by the config");
    }

    if (uncoupled) {
        suite.skip("gains", "a_zeta_hurwitz", "M = 0: agents are uncoupled");
        suite.skip("linsolve", "q_lyapunov_residual", "M = 0: agents are uncoupled");
    } else {
        suite.check("gains", "a_zeta_hurwitz", [&](CheckResult& r) {
            r.value = spectral_abscissa(d.controller.A_zeta);
            r.limit = 0.0;
            r.status = r.value < 0.0 ? CheckStatus::Pass : CheckStatus::Fail;
            r.message = "spectral abscissa " + fmt(r.value);
        });
        suite.check("linsolve", "q_lyapunov_residual", [&](CheckResult& r) {
            const auto k = d.controller.A_zeta.rows();
            below(r, lyapunov_residual(d.controller.Q.matrix(), d.controller.A_zeta, 2.0 * Mat::Identity(k, k)), 1e-8);
            if (!(d.controller.Q.eig_min() > 0.0)) {
                r.status = CheckStatus::Fail;
                r.message = "Q is not positive definite";
            }
        });
    }

    suite.check("gains", "small_gain", [&](CheckResult& r) {
        below(r, d.certificate.small_gain_product, 1.0);
        if (uncoupled) r.message = "M = 0: product is zero";
    });

    suite.check("gains", "certificate", [&](CheckResult& r) {
        if (d.certificate.feasible) {
            r.status = CheckStatus::Pass;
            return;
        }
        std::string names;
        for (const Margin& m : d.certificate.margins) {
            if (!(m.value > 0.0)) names += (names.empty() ? "" : ", ") + m.name;
        }
        r.status = CheckStatus::Skip;
        r.message = "sufficient conditions not met (" + names + "); reported for diagnosis only";
    });

    const std::vector<SmallVec> states = shell_samples(cfg.carrier->dim(), d.envelope, cfg.sampling.seed, 1000);

    suite.check("plant", "jacobian_fd", [&](CheckResult& r) {
        double worst = 0.0;
        const double h = 1e-6;
        for (const SmallVec& x : states) {
            const SmallMat J = cfg.carrier->jac_f(x);
            SmallMat fd(J.rows(), J.cols());
            for (Eigen::Index c = 0; c < x.size(); ++c) {
                SmallVec xp = x;
                SmallVec xm = x;
                xp(c) += h;
                xm(c) -= h;
                fd.col(c) = (cfg.carrier->f(xp) - cfg.carrier->f(xm)) / (2.0 * h);
            }
            worst = std::max(worst, (fd - J).norm() / (1.0 + J.norm()));
        }
        below(r, worst, 1e-6);
    });

    suite.check("fmobserver", "gain_identity", [&](CheckResult& r) {
        double worst = 0.0;
        int used = 0;
        for (const SmallVec& x : states) {
            const SmallVec fx = cfg.carrier->f(x);
            if (fx.norm() <= cfg.f_min) continue;
            const SmallMat K = k_of(x, d.observer.K_o, *cfg.carrier, cfg.f_min);
            worst = std::max(worst, (K * fx - d.observer.K_o).norm());
            ++used;
        }
        below(r, worst, 1e-12);
        if (r.status == CheckStatus::Pass) r.message = std::to_string(used) + " states";
    });

    suite.check("fmobserver", "k_prime_fd", [&](CheckResult& r) { below(r, k_prime_gap(cfg, d), 1e-4); });

    suite.check("fmobserver", "exact_initialization", [&](CheckResult& r) {
        SimConfig sim = make_sim_config(cfg, d, Scenario::Modulated);
        sim.M = SmallMat::Zero(agent.m(), agent.p());
        sim.observer_init = ObserverInit::Exact;
        sim.horizon = std::min(100.0, cfg.simulation.horizon);
        sim.record = false;
        sim.b_x.reset();
        const Trajectory traj = simulate(sim);
        below(r, std::max(traj.extremes.sigma_err, traj.extremes.x_err), 1e-7);
    });

    SimConfig main_cfg = make_sim_config(cfg, d, Scenario::Modulated);
    std::optional<Trajectory> main_run;
    suite.check("simkit", "closed_loop_run", [&](CheckResult& r) {
        main_run = simulate(main_cfg);
        r.status = CheckStatus::Pass;
        r.message = std::to_string(main_run->steps) + " steps, " + std::to_string(main_run->events.size()) + " events";
    });

    if (main_run) {
        const Trajectory& traj = *main_run;
        suite.check("simkit", "omega_identity", [&](CheckResult& r) {
            double worst = 0.0;
            for (std::size_t k = 0; k < traj.records(); ++k) {
                for (int i = 0; i < traj.n; ++i) {
                    SmallVec sigma(traj.p);
                    for (int c = 0; c < traj.p; ++c) sigma(c) = traj.sigma[(k * traj.n + i) * traj.p + c];
                    worst = std::max(worst, std::abs(agent.frequency(sigma) - traj.omega_at(k, i)));
                }
            }
            below(r, worst, 1e-12);
        });

        if (uncoupled) {
            suite.skip("fmcontrol", "consensus", "M = 0: agents are uncoupled, synchronization is not expected");
        } else {
            suite.check("fmcontrol", "consensus", [&](CheckResult& r) { below(r, traj.tail.sync_err, cfg.verify.sync_tol); });
        }
        suite.check("fmobserver", "convergence", [&](CheckResult& r) { below(r, traj.tail.max_obs_err, cfg.verify.obs_tol); });

        if (cfg.carrier_name == "rotational") {
            suite.check("plant", "norm_conservation", [&](CheckResult& r) { below(r, traj.extremes.x_norm_drift, 1e-6); });
        } else {
            suite.skip("plant", "norm_conservation", "carrier does not preserve ||x||");
        }
    } else {
        const std::pair<const char*, const char*> after_run[] = {
            {"simkit", "omega_identity"}, {"fmcontrol", "consensus"}, {"fmobserver", "convergence"},
            {"plant", "norm_conservation"}};
        for (const auto& [module, name] : after_run) suite.skip(module, name, "closed-loop run failed");
    }

    suite.check("simkit", "determinism", [&](CheckResult& r) {
        SimConfig sim = make_sim_config(cfg, d, Scenario::ModulatedNoisy);
        sim.horizon = std::min(5.0, cfg.simulation.horizon);
        sim.record_stride = 10;
        const Trajectory a = simulate(sim);
        const Trajectory b = simulate(sim);
        const bool same = agents_csv(a) == agents_csv(b) && edges_csv(a) == edges_csv(b);
        r.status = same ? CheckStatus::Pass : CheckStatus::Fail;
        if (!same) r.message = "two runs with the same seed differ";
    });

    return suite.take();
}

bool all_passed(const std::vector<CheckResult>& results) noexcept {
    return std::none_of(results.begin(), results.end(), [](const CheckResult& r) { return r.status == CheckStatus::Fail; });
}

std::string junit_xml(const std::string& suite, const std::vector<CheckResult>& results) {
    int failures = 0;
    int skipped = 0;
    double total = 0.0;
    for (const CheckResult& r : results) {
        failures += r.status == CheckStatus::Fail;
        skipped += r.status == CheckStatus::Skip;
        total += r.seconds;
    }
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<testsuites name=\"fmsync verify\" tests=\"" << results.size() << "\" failures=\"" << failures
       << "\" skipped=\"" << skipped << "\" time=\"" << total << "\">\n";
    os << "  <testsuite name=\"" << xml_escape(suite) << "\" tests=\"" << results.size() << "\" failures=\"" << failures
       << "\" errors=\"0\" skipped=\"" << skipped << "\" time=\"" << total << "\">\n";
    for (const CheckResult& r : results) {
        os << "    <testcase classname=\"fmsync." << xml_escape(r.module) << "\" name=\"" << xml_escape(r.name)
           << "\" time=\"" << r.seconds << "\"";
        if (r.status == CheckStatus::Pass && r.message.empty()) {
            os << "/>\n";
            continue;
        }
        os << ">\n";
        if (r.status == CheckStatus::Fail) {
            os << "      <failure message=\"" << xml_escape(r.message) << "\"/>\n";
        } else if (r.status == CheckStatus::Skip) {
            os << "      <skipped message=\"" << xml_escape(r.message) << "\"/>\n";
        } else {
            os << "      <system-out>" << xml_escape(r.message) << "</system-out>\n";
        }
        os << "    </testcase>\n";
    }
    os << "  </testsuite>\n</testsuites>\n";
    return os.str();
}

json verify_json(const std::string& suite, const std::vector<CheckResult>& results) {
    json checks = json::array();
    int counts[3] = {0, 0, 0};
    for (const CheckResult& r : results) {
        ++counts[static_cast<int>(r.status)];
        checks.push_back({{"module", r.module},
                          {"name", r.name},
                          {"status", status_name(r.status)},
                          {"message", r.message},
                          {"value", json_number(r.value)},
                          {"limit", json_number(r.limit)},
                          {"seconds", r.seconds}});
    }
    return {{"suite", suite},
            {"passed", all_passed(results)},
            {"counts", {{"pass", counts[0]}, {"fail", counts[1]}, {"skip", counts[2]}}},
            {"checks", checks}};
}

}  // namespace fmsync::cli

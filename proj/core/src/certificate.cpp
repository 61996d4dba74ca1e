#include "fmsync/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fmsync/errors.hpp"
#include "fmsync/observer.hpp"

namespace fmsync {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kRadiusFloor = 1e-9;

void check_shell(double alpha_lo, double alpha_hi) {
    if (!(alpha_lo > 0.0) || !(alpha_hi >= alpha_lo) || !std::isfinite(alpha_hi)) {
        std::ostringstream os;
        os << "invalid envelope [" << alpha_lo << ", " << alpha_hi << "]";
        throw Error(ErrorKind::Config, os.str());
    }
}

// Decodes unit-cube coordinates into points of the shell and the perturbation ball.
struct ShellMap {
    int q;
    double lo;
    double hi;
    double ball;

    [[nodiscard]] int x_dims() const { return direction_coords(q) + 1; }
    [[nodiscard]] int dims() const { return 2 * x_dims(); }

    [[nodiscard]] SmallVec x(std::span<const double> u) const {
        const int d = direction_coords(q);
        return (lo + u[d] * (hi - lo)) * unit_direction(u.first(d), q);
    }
    [[nodiscard]] SmallVec dx(std::span<const double> u) const {
        const auto tail = u.subspan(x_dims());
        const int d = direction_coords(q);
        return std::max(tail[d], kRadiusFloor) * ball * unit_direction(tail.first(d), q);
    }
};

}  // namespace

LipschitzBounds lipschitz_estimate(const Carrier& carrier, const SmallRow& E, double alpha_lo, double alpha_hi,
                                   const SamplingOptions& sampling) {
    check_shell(alpha_lo, alpha_hi);
    const ShellMap map{carrier.dim(), alpha_lo, alpha_hi, alpha_lo / 2.0};
    const double e_norm = E.norm();

    const double f_min = -sampled_supremum(map.x_dims(), sampling, [&](std::span<const double> u) {
        return -carrier.f(map.x(u)).norm();
    });
    if (!(f_min > 1e-12)) {
        std::ostringstream os;
        os << "carrier '" << carrier.name() << "' vanishes inside the shell [" << alpha_lo << ", " << alpha_hi << "]";
        throw Error(ErrorKind::CarrierDegenerate, os.str());
    }

    const double quotient = sampled_supremum(map.dims(), sampling, [&](std::span<const double> u) {
        const SmallVec x = map.x(u);
        const SmallVec dx = map.dx(u);
        return (carrier.f(x + dx) - carrier.f(x)).norm() / dx.norm();
    });
    const double f_sup = sampled_supremum(map.x_dims(), sampling, [&](std::span<const double> u) {
        return carrier.f(map.x(u)).norm();
    });

    LipschitzBounds out;
    out.theta = sampling.safety_factor * quotient * e_norm;
    out.fe_bound = sampling.safety_factor * f_sup * e_norm;
    out.alpha = out.theta > 0.0 ? out.fe_bound / out.theta : kNaN;
    return out;
}

ObserverRegion bx_bk(const SymmetricPD& P, const SmallVec& K_o, double theta, const Carrier& carrier, double alpha_lo,
                     double alpha_hi, const SamplingOptions& sampling) {
    check_shell(alpha_lo, alpha_hi);
    const Mat& Pm = P.matrix();
    auto worst = [&](double b) {
        const ShellMap map{carrier.dim(), alpha_lo, alpha_hi, b};
        return sampled_supremum(map.dims(), sampling, [&](std::span<const double> u) {
            const SmallVec dx = map.dx(u);
            const SmallMat K = k_of(map.x(u) + dx, K_o, carrier);
            return 8.0 * theta * spectral_norm(Pm * K) * dx.norm();
        });
    };

    double lo = 0.0;
    double hi = alpha_lo / 2.0;
    double g_lo = 0.0;
    const double g_hi = worst(hi);
    if (g_hi <= 1.0) {
        lo = hi;
        g_lo = g_hi;
    } else {
        for (int it = 0; it < 48 && hi - lo > 1e-10 * alpha_lo; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double g = worst(mid);
            if (g <= 1.0) {
                lo = mid;
                g_lo = g;
            } else {
                hi = mid;
            }
        }
    }
    if (!(lo > 0.0)) throw Error(ErrorKind::CertificateInfeasible, "no positive b_x satisfies the observer region bound");

    ObserverRegion out;
    out.b_x = lo;
    out.slack = 1.0 - g_lo;
    const ShellMap map{carrier.dim(), alpha_lo, alpha_hi, lo};
    out.b_K = sampling.safety_factor * sampled_supremum(map.dims(), sampling, [&](std::span<const double> u) {
                  return spectral_norm(k_of(map.x(u) + map.dx(u), K_o, carrier));
              });
    return out;
}

BetaSelection beta_select(const SymmetricPD& P, double pb_norm, double b_o, double b_chi, double b_x, double b_K,
                          double theta_alpha, double slack_factor) {
    const double cond = condition_ratio(P);
    const double ta2 = theta_alpha * theta_alpha;
    const double lmin = P.eig_min();
    BetaSelection out;
    out.rhs_state = (cond * b_o * b_o + 8.0 * pb_norm * pb_norm * b_chi * b_chi * cond) / (4.0 * b_x * b_x) + ta2;
    out.rhs_gain = b_K * b_K / 4.0 + ta2;
    out.rhs_lyapunov = 1.0 / (4.0 * lmin) + lmin * ta2;
    out.beta = slack_factor * std::max({out.rhs_state, out.rhs_gain, out.rhs_lyapunov});
    return out;
}

const Margin* CertificateReport::margin(const std::string& name) const {
    for (const Margin& m : margins) {
        if (m.name == name) return &m;
    }
    return nullptr;
}

CertificateReport sync_certificate(const CertificateInputs& in) {
    if (!in.topology || !in.decomposition || !in.agent || !in.carrier || !in.controller || !in.observer) {
        throw Error(ErrorKind::Config, "certificate inputs are incomplete");
    }
    const NetworkTopology& topo = *in.topology;
    const LaplacianDecomposition& dec = *in.decomposition;
    const AgentParams& agent = *in.agent;
    const ControllerGain& ctrl = *in.controller;
    const ObserverGain& obs = *in.observer;
    const int n = topo.size();
    const Mat& A = topo.adjacency();
    const Mat& L = topo.laplacian();

    CertificateReport rep;
    rep.alpha_lo = in.alpha_lo;
    rep.alpha_hi = in.alpha_hi;
    rep.b_o = in.b_o;
    rep.b_zeta = in.b_zeta;
    rep.configured_beta = in.configured_beta;

    rep.gamma_zeta = gamma_zeta(ctrl.Q, dec.W, agent.B, ctrl.M);
    rep.gamma_chi = gamma_chi(ctrl.M, L, dec.U, rep.gamma_zeta);
    const GammaBound gb = gamma_bound(A, ctrl.M, L, dec.U, rep.gamma_zeta, n, in.margin_factor);
    rep.gamma = gb.gamma;
    rep.gamma_o = gb.gamma_o;
    const double a_norm = spectral_norm(A);
    rep.gamma_sigma = rep.gamma * a_norm;
    rep.small_gain_product = std::isfinite(rep.gamma) ? rep.gamma * a_norm * rep.gamma_chi : 0.0;

    rep.pb_norm = obs.pb_norm(agent);
    rep.cond_P = condition_ratio(obs.P);
    rep.cond_Q = condition_ratio(ctrl.Q);
    rep.observer_bound = rep.pb_norm * std::sqrt(rep.cond_P);

    const LipschitzBounds lip = lipschitz_estimate(*in.carrier, agent.E, in.alpha_lo, in.alpha_hi, in.sampling);
    rep.theta = lip.theta;
    rep.alpha = lip.alpha;
    const ObserverRegion region = bx_bk(obs.P, obs.K_o, lip.theta, *in.carrier, in.alpha_lo, in.alpha_hi, in.sampling);
    rep.b_x = region.b_x;
    rep.b_K = region.b_K;

    const double m_norm = spectral_norm(ctrl.M);
    const double a1_norm = (A * Vec::Ones(n)).norm();
    const double sqrt_cond_P = std::sqrt(rep.cond_P);
    const double sqrt_cond_Q = std::sqrt(rep.cond_Q);
    double ratio_max = 0.0;
    double pi_b_min = std::numeric_limits<double>::infinity();
    rep.pi_a.resize(n);
    rep.pi_b.resize(n);
    for (int i = 0; i < n; ++i) {
        const double liu = (L.row(i) * dec.U).norm();
        const double ai1 = std::abs(A.row(i).sum());
        const double c = liu * m_norm * a1_norm * rep.gamma_zeta + m_norm * ai1;
        rep.pi_a[i] = liu * m_norm * sqrt_cond_Q * in.b_zeta + c * (sqrt_cond_P * in.b_o + rep.b_x * rep.b_K);
        rep.pi_b[i] = 1.0 - c * std::sqrt(8.0) * rep.pb_norm * sqrt_cond_P;
        pi_b_min = std::min(pi_b_min, rep.pi_b[i]);
        if (rep.pi_b[i] <= 0.0) {
            if (!rep.violating_index) rep.violating_index = i;
        } else {
            ratio_max = std::max(ratio_max, rep.pi_a[i] / rep.pi_b[i]);
        }
    }

    auto add = [&](const char* name, double value) { rep.margins.push_back({name, value}); };
    add("small_gain", 1.0 - rep.small_gain_product);
    add("observer_bound", rep.gamma_o - rep.observer_bound);
    add("a_zeta_stability", -spectral_abscissa(ctrl.A_zeta));
    add("h_spectrum", lambda_star_of(dec.H));
    add("observer_region", region.slack);
    add("pi_b_min", pi_b_min);

    if (!rep.violating_index) {
        rep.b_chi = in.slack_factor * ratio_max;
        rep.beta_terms = beta_select(obs.P, rep.pb_norm, in.b_o, rep.b_chi, rep.b_x, rep.b_K, lip.theta_alpha(),
                                     in.slack_factor);
        rep.beta = rep.beta_terms.beta;
        rep.b_sigma = std::sqrt(rep.cond_P * in.b_o * in.b_o +
                                8.0 * rep.pb_norm * rep.pb_norm * rep.b_chi * rep.b_chi * rep.cond_P) +
                      rep.b_x * rep.b_K;
        add("b_chi", rep.b_chi - ratio_max);
        add("beta_state", rep.beta - rep.beta_terms.rhs_state);
        add("beta_gain", rep.beta - rep.beta_terms.rhs_gain);
        add("beta_lyapunov", rep.beta - rep.beta_terms.rhs_lyapunov);
        if (in.configured_beta) {
            const double cb = *in.configured_beta;
            rep.configured_beta_meets = cb > rep.beta_terms.rhs_state && cb > rep.beta_terms.rhs_gain &&
                                        cb >= rep.beta_terms.rhs_lyapunov;
        }
    } else {
        rep.b_chi = kNaN;
        rep.beta = kNaN;
        rep.b_sigma = kNaN;
        rep.beta_terms = {kNaN, kNaN, kNaN, kNaN};
        std::ostringstream os;
        os << "pi_b <= 0 at agent " << *rep.violating_index + 1 << "; b_chi and beta are undefined";
        rep.notes.push_back(os.str());
    }

    rep.feasible = true;
    for (const Margin& m : rep.margins) {
        if (!(m.value > 0.0)) rep.feasible = false;
    }

    rep.notes.push_back("the state-bound beta condition uses ||PB|| in place of the symbol rho");
    rep.notes.push_back("gamma_sigma is reported as gamma * ||A||");
    if (!std::isfinite(rep.alpha)) rep.notes.push_back("theta = 0: alpha is undefined, only theta * alpha is used");
    return rep;
}

}  // namespace fmsync

#include "fmsync/gains.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fmsync/errors.hpp"

namespace fmsync {

namespace {

constexpr double kTiny = 1e-14;

double eb_of(const AgentParams& agent) {
    if (agent.m() != 1) throw Error(ErrorKind::DimensionMismatch, "observer design expects a single-input agent");
    return (agent.E * agent.B.col(0)).value();
}

SymmetricPD observer_lyapunov(const AgentParams& agent, const SmallVec& K_o, const LyapunovOptions& options) {
    const Mat S_bar = agent.S - K_o * agent.E;
    return solve_lyapunov(S_bar, Mat::Identity(agent.p(), agent.p()), options);
}

double back_solve_rho(const AgentParams& agent, const SmallVec& K_o) {
    if (!is_rotation_form(agent)) return std::numeric_limits<double>::quiet_NaN();
    const SmallVec b = agent.B.col(0);
    const SmallVec r = eb_of(agent) * K_o - agent.S * b;
    return b.dot(r) / b.squaredNorm();
}

}  // namespace

double ObserverGain::pb_norm(const AgentParams& agent) const { return spectral_norm(P.matrix() * agent.B); }

double ObserverGain::bound(const AgentParams& agent) const { return pb_norm(agent) * std::sqrt(condition_ratio(P)); }

bool is_rotation_form(const AgentParams& agent) noexcept {
    if (agent.p() != 2 || agent.m() != 1 || agent.E.size() != 2) return false;
    const auto& S = agent.S;
    const double s = S(0, 1);
    return S(0, 0) == 0.0 && S(1, 1) == 0.0 && s > 0.0 && S(1, 0) == -s && agent.B(0, 0) == 1.0 &&
           agent.B(1, 0) == 1.0 && agent.E(1) == 0.0 && agent.E(0) != 0.0;
}

SmallVec closed_form_k_o(const AgentParams& agent, double rho) {
    const double eb = eb_of(agent);
    if (std::abs(eb) < kTiny) throw Error(ErrorKind::UnobservableDirection, "E B = 0: the frequency does not see the input");
    const SmallVec b = agent.B.col(0);
    return (rho * b + agent.S * b) / eb;
}

double closed_form_rho_start(double varsigma, double gamma_o) {
    if (!std::isfinite(gamma_o)) return 1.0;
    return std::max(1.0, (2.0 + 2.0 * varsigma * varsigma + 2.0 * varsigma) / (gamma_o * gamma_o * varsigma));
}

SmallVec place_observer_poles(const AgentParams& agent, const std::vector<double>& poles) {
    const int p = agent.p();
    if (static_cast<int>(poles.size()) != p) {
        throw Error(ErrorKind::DimensionMismatch, "pole placement needs exactly p poles");
    }
    const Mat S = agent.S;
    Mat O(p, p);
    Mat row = agent.E;
    for (int k = 0; k < p; ++k) {
        O.row(k) = row;
        row = row * S;
    }
    Eigen::FullPivLU<Mat> lu(O);
    if (lu.rank() < p) throw Error(ErrorKind::UnobservableDirection, "(S, E) is not observable");

    Mat phi = Mat::Identity(p, p);
    for (double pole : poles) phi = phi * (S - pole * Mat::Identity(p, p));
    Vec e_last = Vec::Zero(p);
    e_last(p - 1) = 1.0;
    const Vec k = phi * lu.solve(e_last);
    return SmallVec(k);
}

ObserverGain observer_gain(const AgentParams& agent, double gamma_o, const ObserverGainOptions& options) {
    agent.validate();
    if (!(gamma_o > 0.0)) throw Error(ErrorKind::Config, "gamma_o must be positive");
    const double eb = eb_of(agent);
    if (std::abs(eb) < kTiny) throw Error(ErrorKind::UnobservableDirection, "E B = 0: the frequency does not see the input");

    ObserverGain gain;
    gain.gamma_o = gamma_o;

    if (is_rotation_form(agent)) {
        double rho = closed_form_rho_start(agent.S(0, 1), gamma_o);
        while (rho <= options.rho_cap) {
            gain.K_o = closed_form_k_o(agent, rho);
            gain.P = observer_lyapunov(agent, gain.K_o, options.lyapunov);
            gain.rho = rho;
            if (gain.bound(agent) < gamma_o) return gain;
            rho *= 2.0;
        }
        std::ostringstream os;
        os << "no rho <= " << options.rho_cap << " meets ||PB|| sqrt(cond P) < " << gamma_o;
        throw Error(ErrorKind::InfeasibleGain, os.str());
    }

    std::vector<double> poles = options.poles;
    if (poles.empty()) {
        for (int k = 0; k < agent.p(); ++k) poles.push_back(-1.0 - k);
    }
    for (int attempt = 0; attempt <= options.max_pole_scalings; ++attempt) {
        gain.K_o = place_observer_poles(agent, poles);
        gain.P = observer_lyapunov(agent, gain.K_o, options.lyapunov);
        gain.rho = std::numeric_limits<double>::quiet_NaN();
        if (gain.bound(agent) < gamma_o) return gain;
        for (double& pole : poles) pole *= 2.0;
    }
    throw Error(ErrorKind::InfeasibleGain, "pole scaling did not reach the observer bound");
}

ObserverGain evaluate_observer_gain(const AgentParams& agent, const SmallVec& K_o, double gamma_o,
                                    const LyapunovOptions& options) {
    agent.validate();
    if (K_o.size() != agent.p()) throw Error(ErrorKind::DimensionMismatch, "K_o must have p entries");
    ObserverGain gain;
    gain.K_o = K_o;
    gain.P = observer_lyapunov(agent, K_o, options);
    gain.rho = back_solve_rho(agent, K_o);
    gain.gamma_o = gamma_o;
    return gain;
}

Mat build_a_zeta(const AgentParams& agent, const Mat& H, const SmallMat& M) {
    const Eigen::Index k = H.rows();
    const Mat BM = agent.B * M;
    return kron(Mat::Identity(k, k), agent.S) - kron(H, BM);
}

double lambda_star_of(const Mat& H) {
    const CVec ev = eigenvalues(H);
    double lo = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) lo = std::min(lo, ev(i).real());
    return lo;
}

namespace {

ControllerGain finish_controller(const AgentParams& agent, const Mat& H, ControllerGain gain) {
    gain.A_zeta = build_a_zeta(agent, H, gain.M);
    if (!is_hurwitz(gain.A_zeta)) {
        std::ostringstream os;
        os << "A_zeta is not Hurwitz (spectral abscissa " << spectral_abscissa(gain.A_zeta) << ")";
        throw Error(ErrorKind::NoStableSolution, os.str());
    }
    const Eigen::Index k = gain.A_zeta.rows();
    gain.Q = solve_lyapunov(gain.A_zeta, 2.0 * Mat::Identity(k, k), LyapunovOptions{1e-10});
    return gain;
}

}  // namespace

ControllerGain controller_gain(const AgentParams& agent, const Mat& H, double epsilon, const RiccatiOptions& options) {
    agent.validate();
    if (H.rows() == 0) throw Error(ErrorKind::DimensionMismatch, "controller synthesis needs at least two agents");
    if (!(epsilon > 0.0)) throw Error(ErrorKind::Config, "epsilon must be positive");
    const double ls = lambda_star_of(H);
    if (!(ls > 0.0)) throw Error(ErrorKind::DecompositionUndefined, "H has an eigenvalue with nonpositive real part");
    ControllerGain gain;
    gain.lambda_star = ls;
    gain.epsilon = epsilon;
    gain.G = solve_riccati(agent.S, agent.B, ls, epsilon, options);
    gain.M = SmallMat(0.5 * agent.B.transpose() * gain.G.matrix());
    gain.synthesized = true;
    try {
        return finish_controller(agent, H, std::move(gain));
    } catch (const Error& e) {
        throw Error(ErrorKind::NumericalConditioning, std::string("synthesized gain failed its own check: ") + e.what());
    }
}

ControllerGain controller_from_m(const AgentParams& agent, const Mat& H, const SmallMat& M) {
    agent.validate();
    if (H.rows() == 0) throw Error(ErrorKind::DimensionMismatch, "controller check needs at least two agents");
    if (M.rows() != agent.m() || M.cols() != agent.p()) throw Error(ErrorKind::DimensionMismatch, "M must be m x p");
    ControllerGain gain;
    gain.M = M;
    gain.lambda_star = lambda_star_of(H);
    if (M.isZero(0.0)) {
        // uncoupled agents: nothing to certify, Q is a placeholder
        gain.A_zeta = build_a_zeta(agent, H, M);
        gain.Q = SymmetricPD(Mat::Identity(gain.A_zeta.rows(), gain.A_zeta.rows()));
        return gain;
    }
    return finish_controller(agent, H, std::move(gain));
}

double gamma_zeta(const SymmetricPD& Q, const Mat& W, const SmallMat& B, const SmallMat& M) {
    const Mat BM = B * M;
    return std::sqrt(condition_ratio(Q)) * spectral_norm(Q.matrix() * kron(W, BM));
}

double gamma_chi(const SmallMat& M, const Mat& L, const Mat& U, double gamma_zeta) {
    return spectral_norm(M) * (spectral_norm(L * U) * gamma_zeta + 1.0);
}

GammaBound gamma_bound(const Mat& A, const SmallMat& M, const Mat& L, const Mat& U, double gamma_zeta, int n,
                       double margin_factor) {
    if (!(margin_factor > 0.0 && margin_factor < 1.0)) throw Error(ErrorKind::Config, "margin factor must be in (0, 1)");
    const double denom = spectral_norm(A) * spectral_norm(M) * (spectral_norm(L * U) * gamma_zeta + 1.0);
    GammaBound out;
    out.gamma = denom > 0.0 ? margin_factor / denom : std::numeric_limits<double>::infinity();
    out.gamma_o = std::min(out.gamma / 8.0, out.gamma / std::sqrt(8.0 * n));
    return out;
}

}  // namespace fmsync

#include "fmsync/observer.hpp"

#include <cmath>
#include <sstream>

#include "fmsync/errors.hpp"

namespace fmsync {

namespace {

double checked_norm2(const SmallVec& f, const SmallVec& x_hat, double f_min) {
    const double n2 = f.squaredNorm();
    if (!(std::sqrt(n2) > f_min)) {
        std::ostringstream os;
        os << "||f(x_hat)|| = " << std::sqrt(n2) << " at x_hat = [" << x_hat.transpose() << "] is below floor "
           << f_min;
        throw Error(ErrorKind::ObserverSingularity, os.str());
    }
    return n2;
}

// Every quantity of one observer evaluation, sharing f(x), f(x_hat) and K.
struct Terms {
    SmallVec x_tilde;
    SmallVec f_x;
    SmallVec f_xh;
    SmallVec f_diff;
    double fnorm2 = 0.0;
    double omega_hat = 0.0;
    SmallMat K;
    SmallVec kappa;
    SmallVec x_hat_dot;
};

Terms evaluate(const SmallVec& x, const SmallVec& x_hat, double omega_hat, const ObserverParams& params) {
    const Carrier& carrier = *params.carrier;
    Terms t;
    t.x_tilde = x_hat - x;
    t.f_x = carrier.f(x);
    t.f_xh = carrier.f(x_hat);
    t.f_diff = t.f_xh - t.f_x;
    t.fnorm2 = checked_norm2(t.f_xh, x_hat, params.f_min);
    t.omega_hat = omega_hat;
    t.K = params.K_o * t.f_xh.transpose() / t.fnorm2;
    const double e_k_xt = (params.agent.E * (t.K * t.x_tilde)).value();
    t.kappa = -params.beta * t.x_tilde - t.f_x * e_k_xt - t.f_diff * omega_hat;
    t.x_hat_dot = t.f_xh * omega_hat + carrier.f_o(x) + t.kappa;
    return t;
}

SmallMat k_prime_from(const Terms& t, const SmallVec& x_hat, const SmallVec& K_o, const Carrier& carrier) {
    const int q = static_cast<int>(t.f_xh.size());
    const SmallMat N = (t.fnorm2 * SmallMat::Identity(q, q) - 2.0 * t.f_xh * t.f_xh.transpose()) /
                       (t.fnorm2 * t.fnorm2);
    const SmallVec fdot = carrier.jac_f(x_hat) * t.x_hat_dot;
    return K_o * (N * fdot).transpose();
}

SmallVec mu_from(const Terms& t, const SmallVec& x_hat, const ObserverParams& params) {
    const SmallMat Kp = k_prime_from(t, x_hat, params.K_o, *params.carrier);
    const SmallVec K_xt = t.K * t.x_tilde;
    const double e_k_xt = (params.agent.E * K_xt).value();
    const SmallVec K_fdiff = t.K * t.f_diff;
    const SmallVec mu_bar = -params.S_bar * K_xt - K_fdiff * e_k_xt;
    return t.K * t.kappa + K_fdiff * t.omega_hat + Kp * t.x_tilde + mu_bar;
}

}  // namespace

ObserverParams::ObserverParams(SmallVec K_o_in, double beta_in, AgentParams agent_in, CarrierPtr carrier_in,
                               double f_min_in)
    : K_o(std::move(K_o_in)),
      beta(beta_in),
      agent(std::move(agent_in)),
      carrier(std::move(carrier_in)),
      f_min(f_min_in) {
    agent.validate();
    if (!carrier) throw Error(ErrorKind::Config, "observer requires a carrier");
    if (K_o.size() != agent.p()) {
        throw Error(ErrorKind::DimensionMismatch, "K_o must have p entries");
    }
    if (!(beta > 0.0)) throw Error(ErrorKind::Config, "observer beta must be positive");
    S_bar = agent.S - K_o * agent.E;
}

SmallMat k_of(const SmallVec& x_hat, const SmallVec& K_o, const Carrier& carrier, double f_min) {
    const SmallVec f = carrier.f(x_hat);
    const double n2 = checked_norm2(f, x_hat, f_min);
    return K_o * f.transpose() / n2;
}

SmallVec kappa(const SmallVec& x, const SmallVec& x_hat, double omega_hat, const ObserverParams& params) {
    return evaluate(x, x_hat, omega_hat, params).kappa;
}

SmallMat k_prime(const SmallVec& x, const SmallVec& x_hat, double omega_hat, const SmallVec& kappa_val,
                 const SmallVec& K_o, const Carrier& carrier, double f_min) {
    Terms t;
    t.f_xh = carrier.f(x_hat);
    t.fnorm2 = checked_norm2(t.f_xh, x_hat, f_min);
    t.x_hat_dot = t.f_xh * omega_hat + carrier.f_o(x) + kappa_val;
    return k_prime_from(t, x_hat, K_o, carrier);
}

SmallVec mu(const SmallVec& x, const SmallVec& x_hat, const SmallVec& sigma_hat, const ObserverParams& params) {
    const Terms t = evaluate(x, x_hat, params.agent.frequency(sigma_hat), params);
    return mu_from(t, x_hat, params);
}

ObserverState observer_derivative(const ObserverState& obs, const SmallVec& x_j, const ObserverParams& params) {
    if (obs.sigma_hat.size() != params.agent.p() || obs.x_hat.size() != params.carrier->dim() ||
        x_j.size() != params.carrier->dim()) {
        throw Error(ErrorKind::DimensionMismatch, "observer state does not match (p, q)");
    }
    const Terms t = evaluate(x_j, obs.x_hat, params.agent.frequency(obs.sigma_hat), params);
    ObserverState d;
    d.sigma_hat = params.agent.S * obs.sigma_hat + mu_from(t, obs.x_hat, params);
    d.x_hat = t.x_hat_dot;
    return d;
}

}  // namespace fmsync

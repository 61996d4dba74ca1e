#pragma once

#include "fmsync/plant.hpp"
#include "fmsync/types.hpp"

namespace fmsync {

/// Estimate held by agent i of a neighbor j: (sigma_hat_j^i, x_hat_j^i).
struct ObserverState {
    SmallVec sigma_hat;
    SmallVec x_hat;
};

/**
 * Parameters shared by every edge observer of a network.
 *
 * `S_bar = S - K_o E` is cached at construction. `f_min` is the floor on
 * ||f(x_hat)|| below which the gain K(x_hat) is treated as singular.
 */
struct ObserverParams {
    SmallVec K_o;
    double beta = 10.0;
    AgentParams agent;
    CarrierPtr carrier;
    double f_min = 1e-9;
    SmallMat S_bar;

    ObserverParams() = default;
    ObserverParams(SmallVec K_o, double beta, AgentParams agent, CarrierPtr carrier, double f_min = 1e-9);
};

/// K(x_hat) = K_o f^T(x_hat) / ||f(x_hat)||^2, so that K(x_hat) f(x_hat) = K_o.
[[nodiscard]] SmallMat k_of(const SmallVec& x_hat, const SmallVec& K_o, const Carrier& carrier,
                            double f_min = 1e-9);

/// kappa = -beta x~ - f(x) E K(x_hat) x~ - [f(x_hat) - f(x)] omega_hat, with x~ = x_hat - x.
[[nodiscard]] SmallVec kappa(const SmallVec& x, const SmallVec& x_hat, double omega_hat, const ObserverParams& params);

/**
 * Time derivative of K(x_hat) along the observer flow:
 *
 *   K' = K_o ( N(x_hat) J_f(x_hat) (f(x_hat) omega_hat + f_o(x) + kappa) )^T,
 *   N  = (||f||^2 I - 2 f f^T) / ||f||^4.
 */
[[nodiscard]] SmallMat k_prime(const SmallVec& x, const SmallVec& x_hat, double omega_hat, const SmallVec& kappa_val,
                               const SmallVec& K_o, const Carrier& carrier, double f_min = 1e-9);

/// mu = K kappa + K [f(x_hat) - f(x)] omega_hat + K' x~ + mu_bar,
/// mu_bar = -S_bar K x~ - K [f(x_hat) - f(x)] E K x~.
[[nodiscard]] SmallVec mu(const SmallVec& x, const SmallVec& x_hat, const SmallVec& sigma_hat,
                          const ObserverParams& params);

/// (S sigma_hat + mu, f(x_hat) omega_hat + f_o(x_j) + kappa) for the received signal x_j.
[[nodiscard]] ObserverState observer_derivative(const ObserverState& obs, const SmallVec& x_j,
                                                const ObserverParams& params);

}  // namespace fmsync

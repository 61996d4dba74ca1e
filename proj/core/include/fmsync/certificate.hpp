#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fmsync/gains.hpp"
#include "fmsync/sampling.hpp"

namespace fmsync {

/**
 * Sampled bounds on the shell alpha_lo <= ||x|| <= alpha_hi, ||x~|| <= alpha_lo/2:
 *
 *   ||[f(x + x~) - f(x)] E|| <= theta ||x~||,   ||f(x) E|| <= theta alpha.
 *
 * `fe_bound` is the bound on ||f(x) E|| itself, so it stays meaningful when
 * theta = 0 (alpha is then NaN).
 */
struct LipschitzBounds {
    double theta = 0.0;
    double alpha = 0.0;
    double fe_bound = 0.0;

    [[nodiscard]] double theta_alpha() const noexcept { return fe_bound; }
};

[[nodiscard]] LipschitzBounds lipschitz_estimate(const Carrier& carrier, const SmallRow& E, double alpha_lo,
                                                 double alpha_hi, const SamplingOptions& sampling = {});

struct ObserverRegion {
    double b_x = 0.0;
    double b_K = 0.0;
    double slack = 0.0;  // 1 - sampled max of 8 theta ||P K(x + x~)|| ||x~|| at b_x
};

/// Largest b <= alpha_lo/2 with 8 theta ||P K(x + x~)|| ||x~|| <= 1 on the shell, found by bisection.
[[nodiscard]] ObserverRegion bx_bk(const SymmetricPD& P, const SmallVec& K_o, double theta, const Carrier& carrier,
                                   double alpha_lo, double alpha_hi, const SamplingOptions& sampling = {});

struct BetaSelection {
    double beta = 0.0;
    double rhs_state = 0.0;    // (cond P b_o^2 + 8 ||PB||^2 b_chi^2 cond P) / (4 b_x^2) + (theta alpha)^2
    double rhs_gain = 0.0;     // b_K^2 / 4 + (theta alpha)^2
    double rhs_lyapunov = 0.0; // 1 / (4 lambda_min P) + lambda_min P (theta alpha)^2
};

[[nodiscard]] BetaSelection beta_select(const SymmetricPD& P, double pb_norm, double b_o, double b_chi, double b_x,
                                        double b_K, double theta_alpha, double slack_factor = 1.1);

struct Margin {
    std::string name;
    double value = 0.0;
};

struct CertificateInputs {
    const NetworkTopology* topology = nullptr;
    const LaplacianDecomposition* decomposition = nullptr;
    const AgentParams* agent = nullptr;
    CarrierPtr carrier;
    const ControllerGain* controller = nullptr;
    const ObserverGain* observer = nullptr;
    double b_o = 0.0;
    double b_zeta = 0.0;
    double alpha_lo = 0.0;
    double alpha_hi = 0.0;
    double margin_factor = 0.9;
    double slack_factor = 1.1;
    SamplingOptions sampling;
    std::optional<double> configured_beta;
};

struct CertificateReport {
    double gamma = 0.0;
    double gamma_o = 0.0;
    double gamma_zeta = 0.0;
    double gamma_chi = 0.0;
    double gamma_sigma = 0.0;
    double theta = 0.0;
    double alpha = 0.0;
    double alpha_lo = 0.0;
    double alpha_hi = 0.0;
    double b_x = 0.0;
    double b_K = 0.0;
    double b_o = 0.0;
    double b_zeta = 0.0;
    double b_chi = 0.0;
    double b_sigma = 0.0;
    double beta = 0.0;
    BetaSelection beta_terms;
    std::vector<double> pi_a;
    std::vector<double> pi_b;
    double small_gain_product = 0.0;
    double observer_bound = 0.0;  // ||PB|| sqrt(cond P)
    double pb_norm = 0.0;
    double cond_P = 0.0;
    double cond_Q = 0.0;
    bool feasible = false;
    std::optional<int> violating_index;  // first agent with pi_b <= 0
    std::optional<double> configured_beta;
    bool configured_beta_meets = false;
    std::vector<Margin> margins;
    std::vector<std::string> notes;

    [[nodiscard]] const Margin* margin(const std::string& name) const;
};

/// Evaluates every bound of the closed-loop certificate. Infeasibility is reported, not thrown.
[[nodiscard]] CertificateReport sync_certificate(const CertificateInputs& in);

}  // namespace fmsync

#pragma once

#include <vector>

#include "fmsync/linsolve.hpp"
#include "fmsync/netgraph.hpp"
#include "fmsync/plant.hpp"
#include "fmsync/types.hpp"

namespace fmsync {

/**
 * Observer injection gain with its Lyapunov certificate:
 * P (S - K_o E) + (S - K_o E)^T P = -I and ||PB|| sqrt(cond P) < gamma_o.
 *
 * `rho` is the closed-form parameter (K_o = (rho B + S B) / EB). For a
 * user-supplied K_o it is the least-squares back-solve, and NaN when the
 * agent is not in the two-state rotation form.
 */
struct ObserverGain {
    SmallVec K_o;
    SymmetricPD P;
    double rho = 0.0;
    double gamma_o = 0.0;

    [[nodiscard]] double pb_norm(const AgentParams& agent) const;
    /// ||PB|| sqrt(cond P).
    [[nodiscard]] double bound(const AgentParams& agent) const;
};

struct ObserverGainOptions {
    double rho_cap = 1e9;
    /// Target spectrum of S - K_o E for the pole-placement path (real, distinct not required).
    std::vector<double> poles;
    int max_pole_scalings = 40;
    LyapunovOptions lyapunov;
};

/// p = 2, m = 1, S = [[0, s], [-s, 0]] with s > 0, B = [1; 1], E = [e, 0] with e != 0.
[[nodiscard]] bool is_rotation_form(const AgentParams& agent) noexcept;

/// K_o = (rho B + S B) / (E B) for any rho; throws UnobservableDirection when EB = 0.
[[nodiscard]] SmallVec closed_form_k_o(const AgentParams& agent, double rho);

/// Smallest closed-form starting rho: max{1, (2 + 2s^2 + 2s) / (gamma_o^2 s)}.
[[nodiscard]] double closed_form_rho_start(double varsigma, double gamma_o);

/**
 * Synthesizes K_o so that ||PB|| sqrt(cond P) < gamma_o.
 *
 * Rotation-form agents double rho from the closed-form start until the check
 * passes (InfeasibleGain past `rho_cap`). Other agents place the poles of
 * S - K_o E at `options.poles` (default -1..-p) and scale them by 2 until the
 * check passes.
 */
[[nodiscard]] ObserverGain observer_gain(const AgentParams& agent, double gamma_o,
                                         const ObserverGainOptions& options = {});

/// Wraps a configured K_o: solves for P and records rho (see ObserverGain). Does not enforce gamma_o.
[[nodiscard]] ObserverGain evaluate_observer_gain(const AgentParams& agent, const SmallVec& K_o, double gamma_o,
                                                  const LyapunovOptions& options = {});

/// K_o placing eig(S - K_o E) at `poles` (Ackermann); throws UnobservableDirection for unobservable (S, E).
[[nodiscard]] SmallVec place_observer_poles(const AgentParams& agent, const std::vector<double>& poles);

struct ControllerGain {
    SmallMat M;
    SymmetricPD G;  // empty when M was supplied rather than synthesized
    double lambda_star = 0.0;
    double epsilon = 0.0;
    SymmetricPD Q;
    Mat A_zeta;
    bool synthesized = false;
};

/// I_{n-1} (x) S - H (x) B M.
[[nodiscard]] Mat build_a_zeta(const AgentParams& agent, const Mat& H, const SmallMat& M);

/// min_i Re lambda_i(H).
[[nodiscard]] double lambda_star_of(const Mat& H);

/// M = B^T G / 2 from the Riccati equation with lambda* = min Re lambda(H).
[[nodiscard]] ControllerGain controller_gain(const AgentParams& agent, const Mat& H, double epsilon,
                                             const RiccatiOptions& options = {});

/// Uses a supplied M; throws NoStableSolution when A_zeta is not Hurwitz.
/// M = 0 is accepted without the check (Q = I) so uncoupled runs can still be simulated.
[[nodiscard]] ControllerGain controller_from_m(const AgentParams& agent, const Mat& H, const SmallMat& M);

/// sqrt(cond Q) ||Q (W (x) B M)||.
[[nodiscard]] double gamma_zeta(const SymmetricPD& Q, const Mat& W, const SmallMat& B, const SmallMat& M);

/// ||M|| (||L U|| gamma_zeta + 1).
[[nodiscard]] double gamma_chi(const SmallMat& M, const Mat& L, const Mat& U, double gamma_zeta);

struct GammaBound {
    double gamma = 0.0;
    double gamma_o = 0.0;
};

/// gamma = margin / (||A|| ||M|| (||LU|| gamma_zeta + 1)), gamma_o = min(gamma/8, gamma/sqrt(8n)).
/// An unbounded gamma (M = 0 or A = 0) is reported as +inf.
[[nodiscard]] GammaBound gamma_bound(const Mat& A, const SmallMat& M, const Mat& L, const Mat& U, double gamma_zeta,
                                     int n, double margin_factor = 0.9);

}  // namespace fmsync

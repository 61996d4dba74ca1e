#pragma once

#include <optional>

#include "fmsync/certificate.hpp"
#include "fmsync/config.hpp"
#include "fmsync/gains.hpp"
#include "fmsync/simulate.hpp"

namespace fmsync {

/// Everything the synthesis chain produces for one config.
struct DesignResult {
    LaplacianDecomposition decomposition;
    ControllerGain controller;
    ObserverGain observer;
    double beta = 0.0;  // value used by the simulator
    Envelope envelope;
    bool envelope_measured = false;
    double b_o = 0.0;
    double b_zeta = 0.0;
    CertificateReport certificate;
};

struct InitialBounds {
    double b_o = 0.0;     // max over edges ||sigma_hat(0) - sigma_j(0)||
    double b_zeta = 0.0;  // ||(W (x) I_p) sigma(0)||
};

[[nodiscard]] InitialBounds initial_bounds(const RunConfig& config, const LaplacianDecomposition& dec);

/**
 * Decomposition, controller gain (configured M is re-checked, otherwise
 * synthesized), gamma bounds, observer gain, envelope and certificate.
 *
 * Throws DecompositionUndefined when the graph has no spanning tree and
 * SynthesisInfeasible when no beta is configured and the certificate cannot
 * provide one.
 */
[[nodiscard]] DesignResult design(const RunConfig& config);

[[nodiscard]] SimConfig make_sim_config(const RunConfig& config, const DesignResult& design);
[[nodiscard]] SimConfig make_sim_config(const RunConfig& config, const DesignResult& design, Scenario scenario);

}  // namespace fmsync

#include "fmsync/errors.hpp"

namespace fmsync {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidAdjacency: return "invalid-adjacency";
        case ErrorKind::DecompositionUndefined: return "decomposition-undefined";
        case ErrorKind::NumericalConditioning: return "numerical-conditioning";
        case ErrorKind::NoStableSolution: return "no-stable-solution";
        case ErrorKind::SynthesisInfeasible: return "synthesis-infeasible";
        case ErrorKind::ConvergenceFailure: return "convergence-failure";
        case ErrorKind::UnobservableDirection: return "unobservable-direction";
        case ErrorKind::InfeasibleGain: return "infeasible-gain";
        case ErrorKind::CarrierDegenerate: return "carrier-degenerate";
        case ErrorKind::CertificateInfeasible: return "certificate-infeasible";
        case ErrorKind::ObserverSingularity: return "observer-singularity";
        case ErrorKind::DimensionMismatch: return "dimension-mismatch";
        case ErrorKind::Wiring: return "wiring";
        case ErrorKind::IntegrationFailure: return "integration-failure";
        case ErrorKind::Config: return "config";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace fmsync

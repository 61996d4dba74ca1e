#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fmsync {

enum class ErrorKind {
    InvalidAdjacency,
    DecompositionUndefined,
    NumericalConditioning,
    NoStableSolution,
    SynthesisInfeasible,
    ConvergenceFailure,
    UnobservableDirection,
    InfeasibleGain,
    CarrierDegenerate,
    CertificateInfeasible,
    ObserverSingularity,
    DimensionMismatch,
    Wiring,
    IntegrationFailure,
    Config,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` distinguishes failure classes.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message);

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

}  // namespace fmsync

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fmsync/errors.hpp"

namespace fmsync::cli {

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kConfigError = 2,
    kInfeasible = 3,
    kSimulationFailure = 4,
    kVerificationFailure = 5,
};

[[nodiscard]] int exit_code_for(ErrorKind kind) noexcept;

/// Parses `args` (without the program name) and runs the selected command.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fmsync::cli

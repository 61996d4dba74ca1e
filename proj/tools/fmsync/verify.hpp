#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fmsync/config.hpp"

namespace fmsync::cli {

enum class CheckStatus { Pass, Fail, Skip };

struct CheckResult {
    std::string module;
    std::string name;
    CheckStatus status = CheckStatus::Pass;
    std::string message;
    double value = 0.0;  // measured quantity, compared against `limit`
    double limit = 0.0;
    double seconds = 0.0;
};

/// Runs the invariant checks of every module against one config. Never throws for a failed check.
[[nodiscard]] std::vector<CheckResult> run_verify_suite(const RunConfig& config);

[[nodiscard]] bool all_passed(const std::vector<CheckResult>& results) noexcept;
[[nodiscard]] std::string junit_xml(const std::string& suite, const std::vector<CheckResult>& results);
[[nodiscard]] nlohmann::json verify_json(const std::string& suite, const std::vector<CheckResult>& results);

}  // namespace fmsync::cli

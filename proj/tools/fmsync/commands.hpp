#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "fmsync/config.hpp"

namespace fmsync::cli {

/// Flags shared by every command; set flags override the config file.
struct Options {
    std::filesystem::path config;
    std::optional<std::string> scenario;
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    std::optional<double> horizon;
};

[[nodiscard]] std::string tool_version();

/// Reads the config file and applies the flag overrides before validation.
[[nodiscard]] RunConfig load_run_config(const Options& options);

/// --out, else $FMSYNC_OUT_DIR, else ./fmsync-out. Created if missing.
[[nodiscard]] std::filesystem::path output_dir(const Options& options);

int cmd_design(const Options& options, std::ostream& out, std::ostream& err);
int cmd_simulate(const Options& options, std::ostream& out, std::ostream& err);
int cmd_compare_noise(const Options& options, std::ostream& out, std::ostream& err);
int cmd_verify(const Options& options, std::ostream& out, std::ostream& err);

}  // namespace fmsync::cli

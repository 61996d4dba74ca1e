#include "fmsync/cli.hpp"

#include <algorithm>
#include <exception>
#include <functional>
#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "fmsync/commands.hpp"

namespace fmsync::cli {

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::DimensionMismatch:
        case ErrorKind::InvalidAdjacency:
            return kConfigError;
        case ErrorKind::DecompositionUndefined:
        case ErrorKind::NumericalConditioning:
        case ErrorKind::NoStableSolution:
        case ErrorKind::SynthesisInfeasible:
        case ErrorKind::ConvergenceFailure:
        case ErrorKind::UnobservableDirection:
        case ErrorKind::InfeasibleGain:
        case ErrorKind::CarrierDegenerate:
        case ErrorKind::CertificateInfeasible:
            return kInfeasible;
        case ErrorKind::ObserverSingularity:
        case ErrorKind::Wiring:
        case ErrorKind::IntegrationFailure:
            return kSimulationFailure;
    }
    return kInternal;
}

namespace {

void add_common(CLI::App& sub, Options& o) {
    sub.add_option("--config", o.config, "JSON config file")->required();
    sub.add_option("--scenario", o.scenario, "modulated | ideal | ideal_noisy | modulated_noisy");
    sub.add_option("--out", o.out, "output directory (default: $FMSYNC_OUT_DIR or ./fmsync-out)");
    sub.add_option("--seed", o.seed, "noise seed");
    sub.add_option("--dt", o.dt, "integration step in seconds")->check(CLI::PositiveNumber);
    sub.add_option("--horizon", o.horizon, "simulated duration in seconds")->check(CLI::PositiveNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gain synthesis and simulation for frequency-modulated oscillator networks", "fmsync"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);

    using Command = std::function<int(const Options&, std::ostream&, std::ostream&)>;
    const std::map<std::string, std::pair<std::string, Command>> commands{
        {"design", {"synthesize gains and evaluate the certificate", cmd_design}},
        {"simulate", {"run one scenario and write trajectory CSVs", cmd_simulate}},
        {"compare-noise", {"run the three-way noise comparison", cmd_compare_noise}},
        {"verify", {"run the invariant suite and write JUnit XML", cmd_verify}},
    };
    Options options;
    for (const auto& [name, entry] : commands) add_common(*app.add_subcommand(name, entry.first), options);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << tool_version() << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "fmsync: " << e.what() << "\n" << app.help();
        return kConfigError;
    }

    const CLI::App* chosen = app.get_subcommands().front();
    try {
        return commands.at(chosen->get_name()).second(options, out, err);
    } catch (const Error& e) {
        err << "fmsync " << chosen->get_name() << ": " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "fmsync " << chosen->get_name() << ": internal error: " << e.what() << "\n";
        return kInternal;
    }
}

}  // namespace fmsync::cli

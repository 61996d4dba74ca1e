#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fmsync/cli.hpp"
#include "fmsync/verify.hpp"

using namespace fmsync;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "fmsync_test_cli" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const json& doc) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << doc.dump(2);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path shipped(const char* name) { return fs::path(FMSYNC_SOURCE_DIR) / "configs" / name; }

}  // namespace

TEST_CASE("error kinds map onto the documented exit codes", "[cli]") {
    REQUIRE(cli::exit_code_for(ErrorKind::Config) == 2);
    REQUIRE(cli::exit_code_for(ErrorKind::DimensionMismatch) == 2);
    REQUIRE(cli::exit_code_for(ErrorKind::InvalidAdjacency) == 2);
    REQUIRE(cli::exit_code_for(ErrorKind::DecompositionUndefined) == 3);
    REQUIRE(cli::exit_code_for(ErrorKind::SynthesisInfeasible) == 3);
    REQUIRE(cli::exit_code_for(ErrorKind::CertificateInfeasible) == 3);
    REQUIRE(cli::exit_code_for(ErrorKind::ObserverSingularity) == 4);
    REQUIRE(cli::exit_code_for(ErrorKind::IntegrationFailure) == 4);
}

TEST_CASE("usage errors and unreadable configs exit with 2", "[cli]") {
    REQUIRE(run_cli({}).code == 2);
    REQUIRE(run_cli({"frobnicate"}).code == 2);
    REQUIRE(run_cli({"simulate"}).code == 2);
    REQUIRE(run_cli({"simulate", "--config", "/nonexistent/fmsync.json"}).code == 2);
    REQUIRE(run_cli({"simulate", "--config", shipped("example1.json").string(), "--dt", "-1"}).code == 2);
    const fs::path dir = scratch("bad_key");
    const Outcome o = run_cli({"design", "--config", write_config(dir, {{"preset", "example1"}, {"gainz", 1}}).string(),
                               "--out", dir.string()});
    REQUIRE(o.code == 2);
    REQUIRE(o.err.find("gainz") != std::string::npos);
    REQUIRE(run_cli({"simulate", "--help"}).code == 0);
}

TEST_CASE("a graph without a spanning tree is infeasible for design and fails verify", "[cli]") {
    const fs::path dir = scratch("disconnected");
    const std::string cfg = shipped("disconnected.json").string();
    REQUIRE(run_cli({"design", "--config", cfg, "--out", dir.string()}).code == 3);
    const Outcome v = run_cli({"verify", "--config", cfg, "--out", dir.string()});
    REQUIRE(v.code == 5);
    REQUIRE(v.out.find("FAIL") != std::string::npos);
    REQUIRE(v.out.find("spanning") != std::string::npos);
    const std::string xml = slurp(dir / "verify.xml");
    REQUIRE(xml.find("<failure") != std::string::npos);
}

TEST_CASE("verify passes for uncoupled agents", "[cli][slow]") {
    const fs::path dir = scratch("uncoupled");
    const fs::path cfg = write_config(dir, {{"preset", "example1"}, {"gains", {{"M", {{0.0, 0.0}}}}}});
    const Outcome o = run_cli({"verify", "--config", cfg.string(), "--out", dir.string()});
    INFO(o.out << o.err);
    REQUIRE(o.code == 0);
    REQUIRE(o.out.find("SKIP") != std::string::npos);
    const json report = json::parse(slurp(dir / "verify.json"));
    REQUIRE(report.is_object());
}

TEST_CASE("FMSYNC_OUT_DIR is honored when --out is absent", "[cli]") {
    const fs::path dir = scratch("env_out");
    ::setenv("FMSYNC_OUT_DIR", dir.string().c_str(), 1);
    const Outcome o =
        run_cli({"simulate", "--config", shipped("example1.json").string(), "--horizon", "2", "--dt", "0.01"});
    ::unsetenv("FMSYNC_OUT_DIR");
    REQUIRE(o.code == 0);
    for (const char* f : {"agents.csv", "edges.csv", "metrics.csv", "summary.json", "manifest.json"}) {
        REQUIRE(fs::exists(dir / f));
    }
}

TEST_CASE("reruns and manifest replays are byte-identical", "[cli]") {
    const std::string cfg = shipped("example1.json").string();
    const std::vector<std::string> common{"--config", cfg, "--scenario", "modulated_noisy", "--horizon", "5", "--seed", "3"};
    const fs::path a = scratch("rerun_a"), b = scratch("rerun_b"), c = scratch("rerun_c");
    auto with_out = [&](const fs::path& dir) {
        std::vector<std::string> args{"simulate"};
        args.insert(args.end(), common.begin(), common.end());
        args.insert(args.end(), {"--out", dir.string()});
        return args;
    };
    REQUIRE(run_cli(with_out(a)).code == 0);
    REQUIRE(run_cli(with_out(b)).code == 0);
    for (const char* f : {"agents.csv", "edges.csv", "metrics.csv", "summary.json"}) {
        REQUIRE(slurp(a / f) == slurp(b / f));
    }

    const json manifest = json::parse(slurp(a / "manifest.json"));
    REQUIRE(manifest["command"] == "simulate");
    REQUIRE(manifest["seed"] == 3);
    REQUIRE(manifest["scenario"] == "modulated_noisy");
    REQUIRE(manifest.contains("version"));
    const fs::path replay = c / "replay.json";
    std::ofstream(replay) << manifest["config"].dump();
    REQUIRE(run_cli({"simulate", "--config", replay.string(), "--out", c.string()}).code == 0);
    for (const char* f : {"agents.csv", "edges.csv", "metrics.csv", "summary.json"}) {
        REQUIRE(slurp(a / f) == slurp(c / f));
    }
}

TEST_CASE("compare-noise writes all scenarios and the comparison table", "[cli]") {
    const fs::path dir = scratch("compare");
    const Outcome o = run_cli(
        {"compare-noise", "--config", shipped("example1.json").string(), "--horizon", "3", "--out", dir.string()});
    REQUIRE(o.code == 0);
    for (const char* s : {"modulated", "ideal_noisy", "modulated_noisy"}) {
        for (const char* f : {"_agents.csv", "_edges.csv", "_metrics.csv"}) REQUIRE(fs::exists(dir / (std::string(s) + f)));
    }
    const std::string table = slurp(dir / "comparison.csv");
    REQUIRE(table.rfind("t,sync_err_modulated,sync_err_ideal_noisy,sync_err_modulated_noisy\n", 0) == 0);
    const json summary = json::parse(slurp(dir / "noise_summary.json"));
    const double ratio = summary["ratio_ideal_noisy_over_modulated_noisy"].get<double>();
    const double ideal = summary["tail_sync_err"]["ideal_noisy"].get<double>();
    const double modulated = summary["tail_sync_err"]["modulated_noisy"].get<double>();
    REQUIRE(ratio == Catch::Approx(ideal / modulated).epsilon(1e-12));
}

TEST_CASE("JUnit report counts failures and skips", "[cli][verify]") {
    const std::vector<cli::CheckResult> results{
        {"netgraph", "row_sums", cli::CheckStatus::Pass, "", 0.0, 0.0, 0.1},
        {"gains", "certificate", cli::CheckStatus::Skip, "observer_bound < 0", 0.0, 0.0, 0.2},
        {"simkit", "run", cli::CheckStatus::Fail, "a<b & \"c\"", 1.0, 0.5, 0.3},
    };
    const std::string xml = cli::junit_xml("demo", results);
    REQUIRE(xml.find("tests=\"3\" failures=\"1\"") != std::string::npos);
    REQUIRE(xml.find("<skipped message=\"observer_bound &lt; 0\"/>") != std::string::npos);
    REQUIRE(xml.find("<failure message=\"a&lt;b &amp; &quot;c&quot;\"/>") != std::string::npos);
    REQUIRE(xml.find("classname=\"fmsync.netgraph\" name=\"row_sums\"") != std::string::npos);
    REQUIRE_FALSE(cli::all_passed(results));
    REQUIRE(cli::all_passed({results[0], results[1]}));
}

#include "fmsync/commands.hpp"

#include <array>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

#include "fmsync/csv.hpp"
#include "fmsync/errors.hpp"
#include "fmsync/metrics.hpp"
#include "fmsync/pipeline.hpp"
#include "fmsync/report.hpp"
#include "fmsync/verify.hpp"

#include "fmsync/cli.hpp"

namespace fmsync::cli {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot read config " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Config, path.string() + ": " + e.what());
    }
}

json manifest(const std::string& command, const RunConfig& cfg, const DesignResult& d, const json& outputs,
              Clock::time_point start) {
    json m;
    m["tool"] = "fmsync";
    m["version"] = tool_version();
    m["command"] = command;
    m["config"] = to_json(cfg);
    m["gains"] = gains_json(cfg, d);
    m["certificate"] = to_json(d.certificate);
    m["outputs"] = outputs;
    m["seed"] = cfg.simulation.seed;
    m["duration_s"] = seconds_since(start);
    return m;
}

// Warns about failed certificate margins. Returns true when every margin holds.
bool report_certificate(const CertificateReport& rep, std::ostream& err) {
    if (rep.feasible) return true;
    for (const Margin& m : rep.margins) {
        if (!(m.value > 0.0)) err << "certificate: inequality '" << m.name << "' violated (margin " << m.value << ")\n";
    }
    return false;
}

bool any_synthesized(const RunConfig& cfg) { return !cfg.gains.M || !cfg.gains.K_o || !cfg.gains.beta; }

json run_summary(const Trajectory& traj, const SyncMetrics& metrics, Scenario scenario) {
    json s;
    s["scenario"] = std::string(to_string(scenario));
    s["steps"] = traj.steps;
    s["records"] = traj.records();
    s["tail"] = tail_json(traj.tail, traj.edges);
    s["recorded_tail"] = {{"start_time", json_number(metrics.tail_start)},
                          {"sync_err", json_number(metrics.tail_sync_err)},
                          {"max_obs_err", json_number(metrics.tail_max_obs_err)}};
    s["extremes"] = {{"x_norm_drift", json_number(traj.extremes.x_norm_drift)},
                     {"x_norm_min", json_number(traj.extremes.x_norm_min)},
                     {"x_norm_max", json_number(traj.extremes.x_norm_max)}};
    json events = json::array();
    for (const SimEvent& e : traj.events) events.push_back({{"t", e.t}, {"kind", e.kind}, {"detail", e.detail}});
    s["events"] = events;
    return s;
}

json files_json(const TrajectoryFiles& f) {
    return {{"agents", f.agents.string()}, {"edges", f.edges.string()}, {"metrics", f.metrics.string()}};
}

}  // namespace

std::string tool_version() { return FMSYNC_VERSION; }

RunConfig load_run_config(const Options& options) {
    json doc = read_json(options.config);
    if (!doc.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
    json sim = json::object();
    if (options.scenario) sim["scenario"] = *options.scenario;
    if (options.seed) sim["seed"] = *options.seed;
    if (options.dt) sim["dt"] = *options.dt;
    if (options.horizon) sim["horizon"] = *options.horizon;
    if (!sim.empty()) doc = merge_json(doc, json{{"simulation", sim}});
    return parse_config(doc);
}

std::filesystem::path output_dir(const Options& options) {
    std::filesystem::path dir = "fmsync-out";
    if (options.out) {
        dir = *options.out;
    } else if (const char* env = std::getenv("FMSYNC_OUT_DIR"); env && *env) {
        dir = env;
    }
    std::filesystem::create_directories(dir);
    return dir;
}

int cmd_design(const Options& options, std::ostream& out, std::ostream& err) {
    const auto start = Clock::now();
    const RunConfig cfg = load_run_config(options);
    const std::filesystem::path dir = output_dir(options);
    const DesignResult d = design(cfg);

    const json gains = gains_json(cfg, d);
    const json cert = to_json(d.certificate);
    const auto gains_path = dir / "gains.json";
    const auto cert_path = dir / "certificate.json";
    atomic_write(gains_path, dump(gains));
    atomic_write(cert_path, dump(cert));
    const json outputs{{"gains", gains_path.string()}, {"certificate", cert_path.string()}};
    atomic_write(dir / "manifest.json", dump(manifest("design", cfg, d, outputs, start)));

    out << dump(json{{"gains", gains}, {"certificate_feasible", d.certificate.feasible}, {"outputs", outputs}});
    const bool ok = report_certificate(d.certificate, err);
    if (!ok && any_synthesized(cfg)) {
        err << "fmsync design: synthesized gains do not meet the certificate\n";
        return kInfeasible;
    }
    return kOk;
}

int cmd_simulate(const Options& options, std::ostream& out, std::ostream& err) {
    const auto start = Clock::now();
    const RunConfig cfg = load_run_config(options);
    const std::filesystem::path dir = output_dir(options);
    const DesignResult d = design(cfg);
    report_certificate(d.certificate, err);

    const Trajectory traj = simulate(make_sim_config(cfg, d));
    const SyncMetrics metrics = sync_metrics(traj, cfg.simulation.tail_fraction);
    const TrajectoryFiles files = write_trajectory(dir, traj, metrics);

    const json summary = run_summary(traj, metrics, cfg.simulation.scenario);
    const auto summary_path = dir / "summary.json";
    atomic_write(summary_path, dump(summary));
    json outputs = files_json(files);
    outputs["summary"] = summary_path.string();
    json m = manifest("simulate", cfg, d, outputs, start);
    m["scenario"] = std::string(to_string(cfg.simulation.scenario));
    atomic_write(dir / "manifest.json", dump(m));

    out << dump(json{{"scenario", summary["scenario"]}, {"tail", summary["tail"]}, {"outputs", outputs}});
    return kOk;
}

int cmd_compare_noise(const Options& options, std::ostream& out, std::ostream& err) {
    const auto start = Clock::now();
    const RunConfig cfg = load_run_config(options);
    const std::filesystem::path dir = output_dir(options);
    const DesignResult d = design(cfg);
    report_certificate(d.certificate, err);

    constexpr std::array<Scenario, 3> kScenarios{Scenario::Modulated, Scenario::IdealNoisy, Scenario::ModulatedNoisy};
    std::array<std::future<Trajectory>, 3> jobs;
    for (std::size_t k = 0; k < kScenarios.size(); ++k) {
        jobs[k] = std::async(std::launch::async, [&, k] { return simulate(make_sim_config(cfg, d, kScenarios[k])); });
    }
    std::array<Trajectory, 3> runs;
    for (std::size_t k = 0; k < kScenarios.size(); ++k) runs[k] = jobs[k].get();

    json outputs;
    json scenarios;
    std::array<SyncMetrics, 3> metrics;
    for (std::size_t k = 0; k < kScenarios.size(); ++k) {
        const std::string name(to_string(kScenarios[k]));
        metrics[k] = sync_metrics(runs[k], cfg.simulation.tail_fraction);
        outputs[name] = files_json(write_trajectory(dir, runs[k], metrics[k], name + "_"));
        scenarios[name] = run_summary(runs[k], metrics[k], kScenarios[k]);
    }

    std::ostringstream csv;
    csv << "t,sync_err_modulated,sync_err_ideal_noisy,sync_err_modulated_noisy\n";
    for (std::size_t r = 0; r < metrics[0].t.size(); ++r) {
        csv << format_double(metrics[0].t[r]);
        for (const SyncMetrics& m : metrics) csv << ',' << format_double(m.sync_err[r]);
        csv << '\n';
    }
    const auto comparison_path = dir / "comparison.csv";
    atomic_write(comparison_path, csv.str());
    outputs["comparison"] = comparison_path.string();

    const double ideal_tail = runs[1].tail.sync_err;
    const double modulated_tail = runs[2].tail.sync_err;
    const double ratio = ideal_tail / modulated_tail;
    json summary;
    summary["seed"] = cfg.simulation.seed;
    summary["noise_percent"] = cfg.simulation.noise_percent;
    summary["tail_fraction"] = cfg.simulation.tail_fraction;
    summary["tail_sync_err"] = {{"modulated", json_number(runs[0].tail.sync_err)},
                                {"ideal_noisy", json_number(ideal_tail)},
                                {"modulated_noisy", json_number(modulated_tail)}};
    summary["ratio_ideal_noisy_over_modulated_noisy"] = json_number(ratio);
    summary["scenarios"] = scenarios;
    const auto summary_path = dir / "noise_summary.json";
    atomic_write(summary_path, dump(summary));
    outputs["summary"] = summary_path.string();
    atomic_write(dir / "manifest.json", dump(manifest("compare-noise", cfg, d, outputs, start)));

    out << dump(json{{"tail_sync_err", summary["tail_sync_err"]},
                     {"ratio_ideal_noisy_over_modulated_noisy", summary["ratio_ideal_noisy_over_modulated_noisy"]},
                     {"outputs", outputs}});
    return kOk;
}

int cmd_verify(const Options& options, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load_run_config(options);
    const std::filesystem::path dir = output_dir(options);
    const std::vector<CheckResult> results = run_verify_suite(cfg);

    const auto xml_path = dir / "verify.xml";
    const auto json_path = dir / "verify.json";
    atomic_write(xml_path, junit_xml(cfg.name, results));
    json summary = verify_json(cfg.name, results);
    atomic_write(json_path, dump(summary));

    for (const CheckResult& r : results) {
        const char* tag = r.status == CheckStatus::Pass ? "PASS" : r.status == CheckStatus::Fail ? "FAIL" : "SKIP";
        out << tag << "  " << r.module << "." << r.name;
        if (!r.message.empty()) out << "  (" << r.message << ")";
        out << "\n";
    }
    out << "report: " << xml_path.string() << ", " << json_path.string() << "\n";
    if (!all_passed(results)) {
        err << "fmsync verify: one or more checks failed\n";
        return kVerificationFailure;
    }
    return kOk;
}

}  // namespace fmsync::cli

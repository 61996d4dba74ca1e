#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fmsync/csv.hpp"
#include "fmsync/errors.hpp"
#include "fmsync/metrics.hpp"
#include "fmsync/pipeline.hpp"

using namespace fmsync;
namespace fs = std::filesystem;

namespace {

// Two agents, one edge (agent 1 observes agent 2), p = 2, q = 2, m = 1, three records.
Trajectory tiny() {
    Trajectory tr;
    tr.n = 2;
    tr.p = 2;
    tr.q = 2;
    tr.m = 1;
    tr.edges = {Edge{0, 1, 1.0}};
    tr.t = {0.0, 1.0, 2.0};
    tr.sigma = {0.1, 0.0, 0.2, 0.0, 0.1, 0.1, 0.2, 0.1, 0.15, 0.0, 0.16, 0.0};
    tr.x = {1, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1};
    tr.omega = {3.45, 3.9, 3.45, 3.9, 3.675, 3.72};
    tr.sigma_hat = {0.0, 0.0, 0.1, 0.0, 0.16, 0.0};
    tr.x_hat = {0, 1, 0, 1, 0, 1};
    tr.omega_hat = {3.0, 3.45, 3.72};
    tr.chi = {0.001, 0.0, 0.002, 0.0, 0.0, 0.0};
    tr.phi = {-0.2, 0.0, 0.0, 0.0, -0.1, -0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    return tr;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("numbers are written with 17 significant digits and round-trip", "[csv]") {
    REQUIRE(format_double(0.1) == "1.00000000000000006e-01");
    REQUIRE(format_double(-2.5) == "-2.50000000000000000e+00");
    for (double v : {0.1, 1.0 / 3.0, -7.25e-300, 6.02214076e23, 0.0}) {
        REQUIRE(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("CSV schemas and 1-based agent indices", "[csv]") {
    const Trajectory tr = tiny();
    const auto agents = parse_csv(agents_csv(tr));
    REQUIRE(agents.front() == std::vector<std::string>{"t", "agent", "sigma_1", "sigma_2", "x_1", "x_2", "omega"});
    REQUIRE(agents.size() == 1 + 3 * 2);
    REQUIRE(agents[1][1] == "1");
    REQUIRE(agents[2][1] == "2");
    REQUIRE(std::strtod(agents[6][2].c_str(), nullptr) == 0.16);
    REQUIRE(std::strtod(agents[6][6].c_str(), nullptr) == 3.72);

    const auto edges = parse_csv(edges_csv(tr));
    REQUIRE(edges.front() == std::vector<std::string>{"t", "observer_agent", "source_agent", "sigma_hat_1",
                                                      "sigma_hat_2", "x_hat_1", "x_hat_2", "omega_hat"});
    REQUIRE(edges.size() == 1 + 3);
    REQUIRE(edges[1][1] == "1");
    REQUIRE(edges[1][2] == "2");

    const auto metrics = parse_csv(metrics_csv(sync_metrics(tr)));
    REQUIRE(metrics.front() == std::vector<std::string>{"t", "sync_err", "max_obs_err", "phi_norm", "chi_norm"});
    REQUIRE(metrics.size() == 4);
    for (const auto& row : metrics) REQUIRE(row.size() == 5);
}

TEST_CASE("metrics follow their definitions on a hand-built trajectory", "[metrics]") {
    const SyncMetrics m = sync_metrics(tiny(), 0.5);
    REQUIRE(m.tail_start == 1.0);
    REQUIRE(m.sync_err[0] == Catch::Approx(0.45));
    REQUIRE(m.sync_err[2] == Catch::Approx(0.045));
    REQUIRE(m.max_obs_err[0] == Catch::Approx(0.9));
    REQUIRE(m.max_obs_err[2] == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(m.phi_norm[1] == Catch::Approx(std::sqrt(0.02)));
    REQUIRE(m.chi_norm[0] == Catch::Approx(0.001));
    REQUIRE(m.tail_sync_err == Catch::Approx(0.45));
    REQUIRE(m.tail_max_obs_err == Catch::Approx(0.45));
    REQUIRE(m.edge_obs_tail[0] == Catch::Approx(0.45));
    REQUIRE(m.tail_chi_norm == Catch::Approx(0.002));
    REQUIRE_THROWS_AS(sync_metrics(tiny(), 0.0), Error);
}

TEST_CASE("recorded metrics agree with the simulator's own tail scan", "[metrics][property]") {
    const RunConfig cfg =
        parse_config({{"preset", "example1"}, {"simulation", {{"horizon", 10.0}, {"record_stride", 1}}}});
    const DesignResult d = design(cfg);
    const Trajectory tr = simulate(make_sim_config(cfg, d));
    const SyncMetrics m = sync_metrics(tr, cfg.simulation.tail_fraction);
    REQUIRE(m.tail_sync_err == Catch::Approx(tr.tail.sync_err).epsilon(1e-12));
    REQUIRE(m.tail_max_obs_err == Catch::Approx(tr.tail.max_obs_err).epsilon(1e-12));
    REQUIRE(m.tail_phi_norm == Catch::Approx(tr.tail.phi_norm).epsilon(1e-12));
    REQUIRE(m.tail_chi_norm == Catch::Approx(tr.tail.chi_norm).epsilon(1e-12));
    for (std::size_t e = 0; e < tr.edges.size(); ++e) {
        REQUIRE(m.edge_obs_tail[e] == Catch::Approx(tr.tail.edge_obs_err[e]).epsilon(1e-12));
    }
}

TEST_CASE("atomic writes replace the target and leave no temporaries", "[csv]") {
    const fs::path dir = fs::temp_directory_path() / "fmsync_test_atomic";
    fs::remove_all(dir);
    atomic_write(dir / "a.txt", "first");
    atomic_write(dir / "a.txt", "second");
    REQUIRE(slurp(dir / "a.txt") == "second");

    const Trajectory tr = tiny();
    const TrajectoryFiles files = write_trajectory(dir, tr, sync_metrics(tr), "run_");
    REQUIRE(files.agents.filename() == "run_agents.csv");
    REQUIRE(files.edges.filename() == "run_edges.csv");
    REQUIRE(files.metrics.filename() == "run_metrics.csv");
    REQUIRE(slurp(files.agents) == agents_csv(tr));

    int count = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        REQUIRE(entry.path().filename().string().find(".tmp") == std::string::npos);
        ++count;
    }
    REQUIRE(count == 4);
    fs::remove_all(dir);
}

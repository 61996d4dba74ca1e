#include "fmsync/csv.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>

#include <unistd.h>

#include "fmsync/errors.hpp"

namespace fmsync {

namespace fs = std::filesystem;

void atomic_write(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Config, "cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error(ErrorKind::Config, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(ErrorKind::Config, "cannot rename onto " + path.string() + ": " + ec.message());
    }
}

std::string format_double(double v) {
    char buf[40];
    const int len = std::snprintf(buf, sizeof buf, "%.17e", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

namespace {

void cell(std::string& out, double v) {
    out += ',';
    out += format_double(v);
}

void header_block(std::string& out, const char* stem, int count) {
    for (int k = 1; k <= count; ++k) {
        out += ',';
        out += stem;
        out += std::to_string(k);
    }
}

}  // namespace

std::string agents_csv(const Trajectory& traj) {
    std::string out = "t,agent";
    header_block(out, "sigma_", traj.p);
    header_block(out, "x_", traj.q);
    out += ",omega\n";
    const auto n = static_cast<std::size_t>(traj.n);
    const auto p = static_cast<std::size_t>(traj.p);
    const auto q = static_cast<std::size_t>(traj.q);
    out.reserve(out.size() + traj.records() * n * (p + q + 3) * 25);
    for (std::size_t k = 0; k < traj.records(); ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            out += format_double(traj.t[k]);
            out += ',';
            out += std::to_string(i + 1);
            for (std::size_t c = 0; c < p; ++c) cell(out, traj.sigma[(k * n + i) * p + c]);
            for (std::size_t c = 0; c < q; ++c) cell(out, traj.x[(k * n + i) * q + c]);
            cell(out, traj.omega[k * n + i]);
            out += '\n';
        }
    }
    return out;
}

std::string edges_csv(const Trajectory& traj) {
    std::string out = "t,observer_agent,source_agent";
    header_block(out, "sigma_hat_", traj.p);
    header_block(out, "x_hat_", traj.q);
    out += ",omega_hat\n";
    const std::size_t ne = traj.edges.size();
    const auto p = static_cast<std::size_t>(traj.p);
    const auto q = static_cast<std::size_t>(traj.q);
    for (std::size_t k = 0; k < traj.records(); ++k) {
        for (std::size_t e = 0; e < ne; ++e) {
            out += format_double(traj.t[k]);
            out += ',';
            out += std::to_string(traj.edges[e].receiver + 1);
            out += ',';
            out += std::to_string(traj.edges[e].source + 1);
            for (std::size_t c = 0; c < p; ++c) cell(out, traj.sigma_hat[(k * ne + e) * p + c]);
            for (std::size_t c = 0; c < q; ++c) cell(out, traj.x_hat[(k * ne + e) * q + c]);
            cell(out, traj.omega_hat[k * ne + e]);
            out += '\n';
        }
    }
    return out;
}

std::string metrics_csv(const SyncMetrics& metrics) {
    std::string out = "t,sync_err,max_obs_err,phi_norm,chi_norm\n";
    for (std::size_t k = 0; k < metrics.t.size(); ++k) {
        out += format_double(metrics.t[k]);
        cell(out, metrics.sync_err[k]);
        cell(out, metrics.max_obs_err[k]);
        cell(out, metrics.phi_norm[k]);
        cell(out, metrics.chi_norm[k]);
        out += '\n';
    }
    return out;
}

TrajectoryFiles write_trajectory(const fs::path& dir, const Trajectory& traj, const SyncMetrics& metrics,
                                 const std::string& prefix) {
    fs::create_directories(dir);
    TrajectoryFiles files{dir / (prefix + "agents.csv"), dir / (prefix + "edges.csv"), dir / (prefix + "metrics.csv")};
    atomic_write(files.agents, agents_csv(traj));
    atomic_write(files.edges, edges_csv(traj));
    atomic_write(files.metrics, metrics_csv(metrics));
    return files;
}

}  // namespace fmsync

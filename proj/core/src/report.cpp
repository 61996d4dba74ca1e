#include "fmsync/report.hpp"

#include <cmath>

namespace fmsync {

using json = nlohmann::json;

json json_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

namespace {

json numbers(const std::vector<double>& values) {
    json out = json::array();
    for (double v : values) out.push_back(json_number(v));
    return out;
}

json matrix(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(json_number(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

json to_json(const CertificateReport& r) {
    json doc;
    doc["feasible"] = r.feasible;
    doc["violating_agent"] = r.violating_index ? json(*r.violating_index + 1) : json(nullptr);
    for (const auto& [key, value] :
         std::initializer_list<std::pair<const char*, double>>{{"gamma", r.gamma},
                                                               {"gamma_o", r.gamma_o},
                                                               {"gamma_zeta", r.gamma_zeta},
                                                               {"gamma_chi", r.gamma_chi},
                                                               {"gamma_sigma", r.gamma_sigma},
                                                               {"theta", r.theta},
                                                               {"alpha", r.alpha},
                                                               {"alpha_lo", r.alpha_lo},
                                                               {"alpha_hi", r.alpha_hi},
                                                               {"b_x", r.b_x},
                                                               {"b_K", r.b_K},
                                                               {"b_o", r.b_o},
                                                               {"b_zeta", r.b_zeta},
                                                               {"b_chi", r.b_chi},
                                                               {"b_sigma", r.b_sigma},
                                                               {"beta", r.beta},
                                                               {"small_gain_product", r.small_gain_product},
                                                               {"observer_bound", r.observer_bound},
                                                               {"pb_norm", r.pb_norm},
                                                               {"cond_P", r.cond_P},
                                                               {"cond_Q", r.cond_Q}}) {
        doc[key] = json_number(value);
    }
    doc["beta_terms"] = {{"state", json_number(r.beta_terms.rhs_state)},
                         {"gain", json_number(r.beta_terms.rhs_gain)},
                         {"lyapunov", json_number(r.beta_terms.rhs_lyapunov)}};
    doc["configured_beta"] = r.configured_beta ? json_number(*r.configured_beta) : json(nullptr);
    doc["configured_beta_meets_bounds"] = r.configured_beta_meets;
    doc["pi_a"] = numbers(r.pi_a);
    doc["pi_b"] = numbers(r.pi_b);
    json margins = json::object();
    for (const Margin& m : r.margins) margins[m.name] = json_number(m.value);
    doc["margins"] = margins;
    doc["notes"] = r.notes;
    return doc;
}

json gains_json(const RunConfig& config, const DesignResult& d) {
    json doc;
    doc["M"] = matrix(d.controller.M);
    doc["M_source"] = d.controller.synthesized ? "riccati" : "config";
    doc["K_o"] = matrix(d.observer.K_o);
    doc["K_o_source"] = config.gains.K_o ? "config" : "synthesized";
    doc["rho"] = json_number(d.observer.rho);
    doc["beta"] = json_number(d.beta);
    doc["beta_source"] = config.gains.beta ? "config" : "certificate";
    doc["lambda_star"] = json_number(d.controller.lambda_star);
    doc["epsilon"] = json_number(d.controller.epsilon);
    if (d.controller.synthesized) doc["G"] = matrix(d.controller.G.matrix());
    doc["P"] = matrix(d.observer.P.matrix());
    doc["S_bar"] = matrix(config.agent.S - d.observer.K_o * config.agent.E);
    doc["Q_eigen_range"] = {json_number(d.controller.Q.eig_min()), json_number(d.controller.Q.eig_max())};
    doc["A_zeta_abscissa"] = json_number(spectral_abscissa(d.controller.A_zeta));
    doc["H"] = matrix(d.decomposition.H);
    doc["r"] = matrix(d.decomposition.r);
    doc["envelope"] = {{"lo", json_number(d.envelope.lo)},
                       {"hi", json_number(d.envelope.hi)},
                       {"measured", d.envelope_measured}};
    return doc;
}

json tail_json(const TailSummary& tail, const std::vector<Edge>& edges) {
    json per_edge = json::array();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        per_edge.push_back({{"observer_agent", edges[e].receiver + 1},
                            {"source_agent", edges[e].source + 1},
                            {"omega_err", json_number(tail.edge_obs_err[e])}});
    }
    return {{"start_time", json_number(tail.start_time)},
            {"sync_err", json_number(tail.sync_err)},
            {"max_obs_err", json_number(tail.max_obs_err)},
            {"sigma_err", json_number(tail.sigma_err)},
            {"phi_norm", json_number(tail.phi_norm)},
            {"chi_norm", json_number(tail.chi_norm)},
            {"edges", per_edge}};
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace fmsync

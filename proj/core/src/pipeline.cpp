#include "fmsync/pipeline.hpp"

#include <cmath>

#include "fmsync/errors.hpp"

namespace fmsync {

InitialBounds initial_bounds(const RunConfig& config, const LaplacianDecomposition& dec) {
    const int n = config.n;
    const int p = config.agent.p();
    InitialBounds out;
    for (const Edge& e : config.edges) {
        const SmallVec& sj = config.initial[e.source].sigma;
        const double err = config.observer_init == ObserverInit::Exact ? 0.0 : sj.norm();
        out.b_o = std::max(out.b_o, err);
    }
    Vec sigma(n * p);
    for (int i = 0; i < n; ++i) sigma.segment(i * p, p) = config.initial[i].sigma;
    out.b_zeta = (kron(dec.W, Mat::Identity(p, p)) * sigma).norm();
    return out;
}

DesignResult design(const RunConfig& config) {
    if (!has_spanning_tree(config.topology)) {
        throw Error(ErrorKind::DecompositionUndefined, "connectivity assumption fails: the graph has no spanning tree");
    }
    DesignResult out;
    out.decomposition = decompose(config.topology);
    const Mat& H = out.decomposition.H;

    out.controller = config.gains.M ? controller_from_m(config.agent, H, *config.gains.M)
                                    : controller_gain(config.agent, H, config.gains.epsilon);

    const double gz = gamma_zeta(out.controller.Q, out.decomposition.W, config.agent.B, out.controller.M);
    const GammaBound gb = gamma_bound(config.topology.adjacency(), out.controller.M, config.topology.laplacian(),
                                      out.decomposition.U, gz, config.n, config.gains.margin_factor);

    if (config.gains.K_o) {
        out.observer = evaluate_observer_gain(config.agent, *config.gains.K_o, gb.gamma_o);
    } else {
        ObserverGainOptions opts;
        opts.poles = config.gains.observer_poles;
        out.observer = observer_gain(config.agent, gb.gamma_o, opts);
    }

    if (config.envelope) {
        out.envelope = *config.envelope;
    } else {
        const Envelope raw = measure_envelope(config.agent, *config.carrier, config.initial, config.simulation.dt,
                                              config.simulation.horizon);
        out.envelope = {0.9 * raw.lo, 1.1 * raw.hi};
        out.envelope_measured = true;
    }

    const InitialBounds ib = initial_bounds(config, out.decomposition);
    out.b_o = ib.b_o;
    out.b_zeta = ib.b_zeta;

    CertificateInputs in;
    in.topology = &config.topology;
    in.decomposition = &out.decomposition;
    in.agent = &config.agent;
    in.carrier = config.carrier;
    in.controller = &out.controller;
    in.observer = &out.observer;
    in.b_o = ib.b_o;
    in.b_zeta = ib.b_zeta;
    in.alpha_lo = out.envelope.lo;
    in.alpha_hi = out.envelope.hi;
    in.margin_factor = config.gains.margin_factor;
    in.slack_factor = config.gains.slack_factor;
    in.sampling = config.sampling;
    in.configured_beta = config.gains.beta;
    out.certificate = sync_certificate(in);

    if (config.gains.beta) {
        out.beta = *config.gains.beta;
    } else if (std::isfinite(out.certificate.beta)) {
        out.beta = out.certificate.beta;
    } else {
        throw Error(ErrorKind::SynthesisInfeasible, "beta requested from the certificate but pi_b <= 0 at agent " +
                                                        std::to_string(out.certificate.violating_index.value_or(-1) + 1));
    }
    return out;
}

SimConfig make_sim_config(const RunConfig& config, const DesignResult& design) {
    return make_sim_config(config, design, config.simulation.scenario);
}

SimConfig make_sim_config(const RunConfig& config, const DesignResult& design, Scenario scenario) {
    SimConfig sim;
    sim.topology = config.topology;
    sim.agent = config.agent;
    sim.carrier = config.carrier;
    sim.M = design.controller.M;
    sim.K_o = design.observer.K_o;
    sim.beta = design.beta;
    sim.f_min = config.f_min;
    sim.initial = config.initial;
    sim.observer_init = config.observer_init;
    sim.scenario = scenario;
    sim.noise_percent = config.simulation.noise_percent;
    sim.seed = config.simulation.seed;
    sim.dt = config.simulation.dt;
    sim.horizon = config.simulation.horizon;
    sim.record_stride = config.simulation.record_stride;
    sim.tail_fraction = config.simulation.tail_fraction;
    if (std::isfinite(design.certificate.b_x)) sim.b_x = design.certificate.b_x;
    return sim;
}

}  // namespace fmsync

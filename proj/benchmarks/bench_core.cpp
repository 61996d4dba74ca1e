#include <benchmark/benchmark.h>

#include "fmsync/config.hpp"
#include "fmsync/gains.hpp"
#include "fmsync/linsolve.hpp"
#include "fmsync/observer.hpp"
#include "fmsync/pipeline.hpp"
#include "fmsync/simulate.hpp"

namespace {

using namespace fmsync;

RunConfig example1() { return parse_config(nlohmann::json{{"preset", "example1"}}); }

void BM_LyapunovAZeta(benchmark::State& state) {
    const RunConfig cfg = example1();
    const LaplacianDecomposition dec = decompose(cfg.topology);
    const Mat A = build_a_zeta(cfg.agent, dec.H, *cfg.gains.M);
    const Mat R = 2.0 * Mat::Identity(A.rows(), A.cols());
    for (auto _ : state) benchmark::DoNotOptimize(solve_lyapunov(A, R));
}
BENCHMARK(BM_LyapunovAZeta);

void BM_Riccati(benchmark::State& state) {
    const RunConfig cfg = example1();
    const LaplacianDecomposition dec = decompose(cfg.topology);
    const double ls = lambda_star_of(dec.H);
    for (auto _ : state) benchmark::DoNotOptimize(solve_riccati(cfg.agent.S, cfg.agent.B, ls, 1.0));
}
BENCHMARK(BM_Riccati);

void BM_ObserverDerivative(benchmark::State& state) {
    const bool hr = state.range(0) == 1;
    const RunConfig cfg = parse_config(nlohmann::json{{"preset", hr ? "hindmarsh_rose" : "example1"}});
    const ObserverParams params(*cfg.gains.K_o, *cfg.gains.beta, cfg.agent, cfg.carrier);
    ObserverState obs{SmallVec::Zero(cfg.agent.p()), cfg.initial[0].x};
    obs.x_hat(0) += 0.01;
    for (auto _ : state) benchmark::DoNotOptimize(observer_derivative(obs, cfg.initial[0].x, params));
}
BENCHMARK(BM_ObserverDerivative)->Arg(0)->Arg(1);

// One second of closed-loop time, i.e. 1000 RK4 steps of the full network.
void BM_ClosedLoopSecond(benchmark::State& state) {
    const RunConfig cfg = example1();
    const DesignResult d = design(cfg);
    SimConfig sim = make_sim_config(cfg, d, static_cast<Scenario>(state.range(0)));
    sim.horizon = 1.0;
    sim.record = false;
    for (auto _ : state) benchmark::DoNotOptimize(simulate(sim));
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_ClosedLoopSecond)
    ->Arg(static_cast<int>(Scenario::Modulated))
    ->Arg(static_cast<int>(Scenario::ModulatedNoisy))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

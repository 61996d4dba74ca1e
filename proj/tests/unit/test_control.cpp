#include <catch_amalgamated.hpp>

#include "fmsync/control.hpp"
#include "fmsync/errors.hpp"
#include "fmsync/netgraph.hpp"

using namespace fmsync;

namespace {

SmallVec v2(double a, double b) {
    SmallVec v(2);
    v << a, b;
    return v;
}

SmallMat paper_m() {
    SmallMat m(1, 2);
    m << 0.01, 0.005;
    return m;
}

}  // namespace

TEST_CASE("modulated control uses only local estimates", "[control]") {
    const std::vector<Neighbor> nbs{{1, 1.0}, {3, 0.5}};
    const std::vector<NeighborSignal> est{{3, v2(0.1, 0.2)}, {1, v2(-0.3, 0.4)}};
    const SmallVec sigma = v2(0.5, -0.5);
    const SmallVec chi = control_modulated(sigma, est, nbs, paper_m());
    const SmallVec dis = 1.0 * (sigma - v2(-0.3, 0.4)) + 0.5 * (sigma - v2(0.1, 0.2));
    REQUIRE(chi.size() == 1);
    REQUIRE(chi(0) == Catch::Approx(-(0.01 * dis(0) + 0.005 * dis(1))));
}

TEST_CASE("a neighbor without an estimate is a wiring error", "[control]") {
    const std::vector<Neighbor> nbs{{2, 1.0}};
    const std::vector<NeighborSignal> est{{1, v2(0.0, 0.0)}};
    try {
        (void)control_modulated(v2(0, 0), est, nbs, paper_m());
        FAIL("expected a wiring error");
    } catch (const Error& e) {
        REQUIRE(e.kind() == ErrorKind::Wiring);
    }
}

TEST_CASE("ideal control subtracts transmitted states and noise", "[control]") {
    const std::vector<Neighbor> nbs{{0, 2.0}};
    const std::vector<NeighborSignal> tx{{0, v2(0.1, 0.0)}};
    const std::vector<SmallVec> noise{v2(0.01, -0.02)};
    const SmallVec sigma = v2(0.3, 0.1);
    const SmallVec clean = control_ideal(sigma, tx, nbs, paper_m());
    const SmallVec noisy = control_ideal(sigma, tx, nbs, paper_m(), noise);
    const SmallVec d_clean = 2.0 * (sigma - v2(0.1, 0.0));
    const SmallVec d_noisy = 2.0 * (sigma - v2(0.1, 0.0) - noise[0]);
    REQUIRE(clean(0) == Catch::Approx(-(paper_m() * d_clean)(0)));
    REQUIRE(noisy(0) == Catch::Approx(-(paper_m() * d_noisy)(0)));
    const std::vector<SmallVec> wrong{v2(0, 0), v2(0, 0)};
    REQUIRE_THROWS_AS(control_ideal(sigma, tx, nbs, paper_m(), wrong), Error);
}

TEST_CASE("modulated control equals ideal control plus M phi", "[control][property]") {
    const NetworkTopology topo = default_topology();
    std::vector<SmallVec> sigmas;
    std::vector<std::vector<NeighborSignal>> estimates(6), truths(6);
    for (int i = 0; i < 6; ++i) sigmas.push_back(v2(0.1 * i, -0.05 * i * i));
    for (int i = 0; i < 6; ++i) {
        for (const Neighbor& nb : topo.neighbors(i)) {
            estimates[i].push_back({nb.index, sigmas[nb.index] + v2(0.01 * (i + 1), -0.02 * nb.index)});
            truths[i].push_back({nb.index, sigmas[nb.index]});
        }
    }
    const PerturbationDiag diag = network_perturbation(topo, estimates, sigmas);
    for (int i = 0; i < 6; ++i) {
        const SmallVec mod = control_modulated(sigmas[i], estimates[i], topo.neighbors(i), paper_m());
        const SmallVec ideal = control_ideal(sigmas[i], truths[i], topo.neighbors(i), paper_m());
        const SmallVec phi = perturbation(estimates[i], truths[i], topo.neighbors(i));
        REQUIRE((mod - (ideal + paper_m() * phi)).norm() < 1e-15);
        REQUIRE((diag.phi_i[i] - phi).norm() < 1e-15);
        REQUIRE((diag.phi.segment(2 * i, 2) - Vec(phi)).norm() < 1e-15);
    }
}

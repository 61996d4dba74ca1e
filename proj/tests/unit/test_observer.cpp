#include <catch_amalgamated.hpp>

#include <random>

#include "fmsync/errors.hpp"
#include "fmsync/gains.hpp"
#include "fmsync/observer.hpp"

using namespace fmsync;

namespace {

AgentParams rotation_agent(double s, double e, double omega_c) {
    AgentParams a;
    a.S.resize(2, 2);
    a.S << 0.0, s, -s, 0.0;
    a.B.resize(2, 1);
    a.B << 1.0, 1.0;
    a.E.resize(2);
    a.E << e, 0.0;
    a.omega_c = omega_c;
    return a;
}

struct Case {
    ObserverParams params;
    double spread;  // scale of random states
    SmallVec center;
};

std::vector<Case> cases() {
    SmallVec k1(2);
    k1 << 1.8, 1.76;
    const AgentParams hr = rotation_agent(0.005 * 3.141592653589793, 0.4, 0.9);
    SmallVec c2(2), c3(3);
    c2 << 0.0, 0.0;
    c3 << -1.0, -4.0, 2.0;
    return {Case{ObserverParams(k1, 10.0, rotation_agent(0.1, 4.5, 3.0), rotational_carrier()), 1.0, c2},
            Case{ObserverParams(closed_form_k_o(hr, 8.0), 10.0, hr, hindmarsh_rose_carrier()), 1.5, c3}};
}

SmallVec random_vec(std::mt19937_64& rng, const SmallVec& center, double spread) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SmallVec v = center;
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += spread * u(rng);
    return v;
}

}  // namespace

TEST_CASE("K(x_hat) f(x_hat) = K_o on random states", "[observer][property]") {
    std::mt19937_64 rng(17);
    for (const Case& c : cases()) {
        const Carrier& carrier = *c.params.carrier;
        for (int k = 0; k < 1000; ++k) {
            const SmallVec x = random_vec(rng, c.center, c.spread);
            const SmallMat K = k_of(x, c.params.K_o, carrier);
            REQUIRE((K * carrier.f(x) - c.params.K_o).norm() < 1e-12);
        }
    }
}

TEST_CASE("kappa follows its defining expression", "[observer]") {
    std::mt19937_64 rng(4);
    for (const Case& c : cases()) {
        const Carrier& carrier = *c.params.carrier;
        for (int k = 0; k < 50; ++k) {
            const SmallVec x = random_vec(rng, c.center, c.spread);
            const SmallVec xh = x + random_vec(rng, SmallVec::Zero(x.size()), 0.1);
            const double wh = 2.5;
            const SmallVec xt = xh - x;
            const SmallVec fx = carrier.f(x), fxh = carrier.f(xh);
            const SmallVec ko_ft_xt = c.params.K_o * (fxh.dot(xt) / fxh.squaredNorm());
            const SmallVec expected = -c.params.beta * xt - fx * (c.params.agent.E * ko_ft_xt).value() - (fxh - fx) * wh;
            REQUIRE((kappa(x, xh, wh, c.params) - expected).norm() < 1e-12 * (1.0 + expected.norm()));
        }
    }
}

TEST_CASE("K' matches a central difference along the observer flow", "[observer][property]") {
    std::mt19937_64 rng(8);
    for (const Case& c : cases()) {
        const Carrier& carrier = *c.params.carrier;
        for (int k = 0; k < 200; ++k) {
            const SmallVec x = random_vec(rng, c.center, c.spread);
            const SmallVec xh = x + random_vec(rng, SmallVec::Zero(x.size()), 0.05);
            const double wh = 3.0;
            const SmallVec kap = kappa(x, xh, wh, c.params);
            const SmallVec xh_dot = carrier.f(xh) * wh + carrier.f_o(x) + kap;
            const double h = 1e-6;
            const SmallMat fd = (k_of(SmallVec(xh + h * xh_dot), c.params.K_o, carrier) -
                                 k_of(SmallVec(xh - h * xh_dot), c.params.K_o, carrier)) /
                                (2.0 * h);
            const SmallMat kp = k_prime(x, xh, wh, kap, c.params.K_o, carrier);
            REQUIRE((fd - kp).norm() < 1e-4 * kp.norm() + 1e-9);
        }
    }
}

TEST_CASE("exact estimates evolve exactly like the source", "[observer]") {
    std::mt19937_64 rng(12);
    for (const Case& c : cases()) {
        const Carrier& carrier = *c.params.carrier;
        const SmallVec x = random_vec(rng, c.center, c.spread);
        SmallVec sigma(2);
        sigma << 0.2, -0.05;
        const ObserverState d = observer_derivative({sigma, x}, x, c.params);
        REQUIRE((d.sigma_hat - c.params.agent.S * sigma).norm() < 1e-14);
        const SmallVec x_dot = carrier.f(x) * c.params.agent.frequency(sigma) + carrier.f_o(x);
        REQUIRE((d.x_hat - x_dot).norm() < 1e-14);
    }
}

TEST_CASE("the combined error e = sigma~ - K x~ obeys (S_bar + K f~ E) e - B chi", "[observer][property]") {
    std::mt19937_64 rng(21);
    for (const Case& c : cases()) {
        const Carrier& carrier = *c.params.carrier;
        const AgentParams& a = c.params.agent;
        for (int k = 0; k < 100; ++k) {
            const SmallVec x = random_vec(rng, c.center, c.spread);
            const SmallVec xh = x + random_vec(rng, SmallVec::Zero(x.size()), 0.05);
            const SmallVec sigma = random_vec(rng, SmallVec::Zero(2), 0.3);
            const SmallVec sh = sigma + random_vec(rng, SmallVec::Zero(2), 0.05);
            SmallVec chi(1);
            chi << 0.01 * (k % 7 - 3);

            const ObserverState d = observer_derivative({sh, xh}, x, c.params);
            const double omega = a.frequency(sigma);
            const SmallVec sigma_dot = a.S * sigma + a.B * chi;
            const SmallVec x_dot = carrier.f(x) * omega + carrier.f_o(x);
            const SmallMat K = k_of(xh, c.params.K_o, carrier);
            const SmallMat Kp = k_prime(x, xh, a.frequency(sh), kappa(x, xh, a.frequency(sh), c.params), c.params.K_o,
                                        carrier);
            const SmallVec xt = xh - x;
            const SmallVec e = (sh - sigma) - K * xt;
            const SmallVec e_dot = (d.sigma_hat - sigma_dot) - Kp * xt - K * (d.x_hat - x_dot);
            const SmallVec f_diff = carrier.f(xh) - carrier.f(x);
            const SmallVec expected = (c.params.S_bar + K * f_diff * a.E) * e - a.B * chi;
            REQUIRE((e_dot - expected).norm() < 1e-9 * (1.0 + e_dot.norm()));
        }
    }
}

TEST_CASE("a vanishing carrier at x_hat raises an observer singularity", "[observer]") {
    const Case c = cases().front();
    const SmallVec origin = SmallVec::Zero(2);
    try {
        (void)k_of(origin, c.params.K_o, *c.params.carrier);
        FAIL("expected an error");
    } catch (const Error& e) {
        REQUIRE(e.kind() == ErrorKind::ObserverSingularity);
    }
    SmallVec x(2);
    x << 1.0, 0.0;
    REQUIRE_THROWS_AS(observer_derivative({SmallVec::Zero(2), origin}, x, c.params), Error);
}

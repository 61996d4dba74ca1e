#include <catch_amalgamated.hpp>

#include <random>

#include "fmsync/errors.hpp"
#include "fmsync/plant.hpp"
#include "oracles.hpp"

using namespace fmsync;

namespace {

SmallMat central_jacobian(const Carrier& c, const SmallVec& x, double h) {
    SmallMat j(c.dim(), c.dim());
    for (int k = 0; k < c.dim(); ++k) {
        SmallVec xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        j.col(k) = (c.f(xp) - c.f(xm)) / (2.0 * h);
    }
    return j;
}

AgentParams example_agent() {
    AgentParams a;
    a.S.resize(2, 2);
    a.S << 0.0, 0.1, -0.1, 0.0;
    a.B.resize(2, 1);
    a.B << 1.0, 1.0;
    a.E.resize(2);
    a.E << 4.5, 0.0;
    a.omega_c = 3.0;
    return a;
}

}  // namespace

TEST_CASE("rotational carrier is a unit-rate rotation", "[plant]") {
    const CarrierPtr c = rotational_carrier();
    SmallVec x(2);
    x << 0.3, -0.7;
    SmallVec expected(2);
    expected << -0.7, -0.3;
    REQUIRE(c->f(x) == expected);
    REQUIRE(c->f_o(x).isZero(0.0));
    REQUIRE(c->f(x).dot(x) == 0.0);
    REQUIRE(c->dim() == 2);
}

TEST_CASE("Hindmarsh-Rose vector fields follow the neuron model", "[plant]") {
    const CarrierPtr c = hindmarsh_rose_carrier();
    SmallVec x(3);
    x << -1.2, -3.5, 1.9;
    const double v = x(0), w = x(1), z = x(2);
    SmallVec f(3), fo(3);
    f << 2.0, -5.0 * v * v - w + 1.0, 0.0;
    fo << 3.0 * v * v - v * v * v + w - z, 0.0, 0.005 * (4.0 * (v + 1.5) - z);
    REQUIRE((c->f(x) - f).norm() < 1e-15);
    REQUIRE((c->f_o(x) - fo).norm() < 1e-15);
}

TEST_CASE("analytic Jacobians match central differences", "[plant][property]") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (const CarrierPtr& c : {rotational_carrier(), hindmarsh_rose_carrier()}) {
        for (int k = 0; k < 200; ++k) {
            SmallVec x(c->dim());
            for (int i = 0; i < c->dim(); ++i) x(i) = u(rng);
            const SmallMat J = c->jac_f(x);
            REQUIRE((J - central_jacobian(*c, x, 1e-5)).norm() < 1e-7 * (1.0 + J.norm()));
        }
    }
}

TEST_CASE("agent derivative composes the linear and carrier parts", "[plant]") {
    const AgentParams a = example_agent();
    const CarrierPtr c = rotational_carrier();
    AgentState s{SmallVec(2), SmallVec(2)};
    s.sigma << 0.2, -0.1;
    s.x << 1.0, 0.5;
    SmallVec chi(1);
    chi << 0.3;
    const AgentState d = agent_derivative(s, chi, a, *c);
    const double omega = 4.5 * 0.2 + 3.0;
    REQUIRE(a.frequency(s.sigma) == Catch::Approx(omega));
    REQUIRE(d.sigma(0) == Catch::Approx(0.1 * -0.1 + 0.3));
    REQUIRE(d.sigma(1) == Catch::Approx(-0.1 * 0.2 + 0.3));
    REQUIRE(d.x(0) == Catch::Approx(0.5 * omega));
    REQUIRE(d.x(1) == Catch::Approx(-1.0 * omega));
}

TEST_CASE("agent validation names the inconsistent field", "[plant]") {
    AgentParams a = example_agent();
    a.E.resize(3);
    a.E << 1.0, 0.0, 0.0;
    REQUIRE_THROWS_AS(a.validate(), Error);
    AgentParams b = example_agent();
    b.omega_c = 0.0;
    REQUIRE_THROWS_AS(b.validate(), Error);
    const AgentParams ok = example_agent();
    AgentState s{SmallVec::Zero(3), SmallVec::Zero(2)};
    REQUIRE_THROWS_AS(agent_derivative(s, SmallVec::Zero(1), ok, *rotational_carrier()), Error);
}

TEST_CASE("carrier registry resolves built-ins and user carriers", "[plant]") {
    REQUIRE(make_carrier("rotational")->name() == "rotational");
    REQUIRE(make_carrier("hindmarsh_rose")->dim() == 3);
    REQUIRE_THROWS_AS(make_carrier("no_such_carrier"), Error);
    register_carrier("scaled_rotation", [] {
        return std::make_shared<FunctionCarrier>(
            "scaled_rotation", 2,
            [](const SmallVec& x) {
                SmallVec f(2);
                f << 2.0 * x(1), -2.0 * x(0);
                return f;
            },
            [](const SmallVec& x) { return SmallVec(SmallVec::Zero(x.size())); },
            [](const SmallVec&) {
                SmallMat j(2, 2);
                j << 0.0, 2.0, -2.0, 0.0;
                return j;
            });
    });
    const CarrierPtr c = make_carrier("scaled_rotation");
    SmallVec x(2);
    x << 1.0, 0.0;
    REQUIRE(c->f(x)(1) == -2.0);
    const auto names = carrier_names();
    REQUIRE(std::find(names.begin(), names.end(), "scaled_rotation") != names.end());
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "mtdc/plant.hpp"

using namespace mtdc;
using namespace fixtures;

namespace {

PlantParams single_node_params(double m = 1.0, double cap = 1.0) {
    PlantParams p = benchmark_params(1);
    p.m = {m};
    p.cap = {cap};
    return p;
}

} // namespace

TEST_CASE("parameter validation") {
    PlantParams p = benchmark_params();
    p.m[2] = 0.0;
    CHECK_THROWS_AS(p.validate(), InvalidParams);

    PlantParams q = benchmark_params();
    q.p_nom[0] = 0.1; // breaks the balanced-nominal-power assumption
    CHECK_THROWS_AS(q.validate(), InvalidParams);

    ControllerGains g = table_gains();
    g.k_droop[4] = -1.0;
    CHECK_THROWS_AS(g.validate(6), InvalidParams);

    CHECK_THROWS_AS(assemble(benchmark_params(), table_gains(), six_terminal_dc(), std::nullopt,
                             Config::SecondaryDistributed),
                    MissingCommGraph);
}

TEST_CASE("single-node droop closed loop matches the hand computation") {
    const ClosedLoopSystem sys = assemble(single_node_params(), table_gains(1), single_node_dc(),
                                          std::nullopt, Config::DroopOnly);
    REQUIRE(sys.a.rows() == 2);
    CHECK(sys.a(0, 0) == doctest::Approx(-9008.0));
    CHECK(sys.a(0, 1) == doctest::Approx(110.0));
    CHECK(sys.a(1, 0) == doctest::Approx(9000.0));
    CHECK(sys.a(1, 1) == doctest::Approx(-110.0));
    CHECK(sys.b == Vec{0.0, 0.0});
}

TEST_CASE("single-node projected controller coupling entries") {
    ControllerGains g = table_gains(1);
    g.gamma = 0.0;
    const ClosedLoopSystem sys = assemble(single_node_params(), g, single_node_dc(),
                                          std::nullopt, Config::SecondaryProjected);
    REQUIRE(sys.a.rows() == 3);
    CHECK(sys.a(2, 0) == doctest::Approx(10.0));
    CHECK(sys.a(2, 1) == 0.0);
    CHECK(sys.a(2, 2) == 0.0);
    CHECK(sys.a(0, 2) == doctest::Approx(-110.0 / 9000.0 * 10.0).epsilon(1e-14));
}

TEST_CASE("state layouts per configuration") {
    CHECK(layout_for(Config::DroopOnly, 6).size() == 12);
    CHECK(layout_for(Config::SecondaryComplete, 6).size() == 18);
    CHECK(layout_for(Config::SecondaryProjected, 6).size() == 13);
    CHECK(layout_for(Config::SecondaryDistributed, 6).size() == 18);
    CHECK(layout_for(Config::SecondaryProjected, 6).has(StateBlock::EtaPrime));
}

TEST_CASE("controller outputs at the nominal point and under droop action") {
    const PlantParams p = benchmark_params();
    const ControllerGains g = table_gains();

    Vec omega(6, 1.0), volt(6, 1.0), eta(6, 0.0);
    const ControllerOutputs nominal =
        controller_outputs(p, g, Config::SecondaryComplete, omega, volt, eta);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(nominal.p_gen[i] == 0.0);
        CHECK(nominal.p_inj[i] == p.p_inj_nom[i]);
    }

    omega[0] = 1.0 - 0.025;
    const ControllerOutputs droop =
        controller_outputs(p, g, Config::DroopOnly, omega, volt, {});
    CHECK(droop.p_gen[0] == doctest::Approx(0.2).epsilon(1e-14));

    // averaged secondary term with eta = 1_n: mean is one
    omega[0] = 1.0;
    const ControllerOutputs secondary =
        controller_outputs(p, g, Config::SecondaryComplete, omega, volt, Vec(6, 1.0));
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(secondary.p_gen[i] == doctest::Approx(-110.0 / 9000.0 * 10.0).epsilon(1e-14));
}

TEST_CASE("single-node linearized equilibrium zeroes the right-hand side") {
    const PlantParams p = single_node_params();
    const ControllerGains g = table_gains(1);
    const double omega_hat = -0.025;
    const double v_hat = -0.025 * 9000.0 / 110.0;
    const Vec state{1.0 + omega_hat, 1.0 + v_hat};
    const Vec dx = nonlinear_rhs(p, g, single_node_dc(), std::nullopt, Config::DroopOnly, state,
                                 {-0.2}, PowerCurrentMode::Linearized);
    CHECK(std::abs(dx[0]) <= 1e-9);
    CHECK(std::abs(dx[1]) <= 1e-9);
}

TEST_CASE("nonlinear and linearized power-current laws agree at nominal voltage") {
    const PlantParams p = benchmark_params();
    const ControllerGains g = table_gains();
    const WeightedGraph dc = six_terminal_dc();

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-0.01, 0.01);
    Vec state(12);
    for (std::size_t i = 0; i < 6; ++i) {
        state[i] = 1.0 + u(rng);
        state[6 + i] = 1.0; // exactly nominal voltage
    }
    const Vec pm{-0.2, 0, 0, 0, 0, 0};
    const Vec lin = nonlinear_rhs(p, g, dc, std::nullopt, Config::DroopOnly, state, pm,
                                  PowerCurrentMode::Linearized);
    const Vec non = nonlinear_rhs(p, g, dc, std::nullopt, Config::DroopOnly, state, pm,
                                  PowerCurrentMode::NonlinearPowerCurrent);
    for (std::size_t i = 0; i < 12; ++i) CHECK(lin[i] == doctest::Approx(non[i]).epsilon(1e-14));
}

TEST_CASE("nonlinear mode guards against voltage collapse") {
    const PlantParams p = benchmark_params();
    Vec state(12, 1.0);
    state[7] = 0.4; // second terminal voltage below half nominal
    CHECK_THROWS_AS(nonlinear_rhs(p, table_gains(), six_terminal_dc(), std::nullopt,
                                  Config::DroopOnly, state, Vec(6, 0.0),
                                  PowerCurrentMode::NonlinearPowerCurrent),
                    VoltageCollapse);
}

TEST_CASE("linearized right-hand side equals the assembled system on random states") {
    const PlantParams p = benchmark_params();
    const ControllerGains g = table_gains();
    const WeightedGraph dc = six_terminal_dc();
    const std::optional<WeightedGraph> comm = ring_comm();

    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(-0.5, 0.5);

    for (Config config : {Config::DroopOnly, Config::SecondaryComplete,
                          Config::SecondaryProjected, Config::SecondaryDistributed}) {
        PlantParams pp = p;
        pp.p_m = {-0.2, 0.05, 0, 0, 0.1, 0};
        const ClosedLoopSystem sys = assemble(pp, g, dc, comm, config);
        const std::size_t dim = sys.layout.size();
        for (int trial = 0; trial < 100; ++trial) {
            Vec x_hat(dim);
            for (auto& v : x_hat) v = u(rng);
            Vec abs_state(dim);
            for (std::size_t i = 0; i < 6; ++i) {
                abs_state[i] = p.omega_ref + x_hat[i];
                abs_state[6 + i] = p.v_ref[i] + x_hat[6 + i];
            }
            for (std::size_t i = 12; i < dim; ++i) abs_state[i] = x_hat[i];

            const Vec dx = nonlinear_rhs(pp, g, dc, comm, config, abs_state, pp.p_m,
                                         PowerCurrentMode::Linearized);
            Vec expected = sys.a * x_hat;
            for (std::size_t i = 0; i < dim; ++i) expected[i] += sys.b[i];

            double scale = 0.0;
            for (double v : expected) scale = std::max(scale, std::abs(v));
            for (std::size_t i = 0; i < dim; ++i)
                CHECK(std::abs(dx[i] - expected[i]) <= 1e-10 * std::max(1.0, scale));
        }
    }
}

TEST_CASE("voltage rows annihilate constant voltage shifts up to the droop term") {
    const PlantParams p = benchmark_params();
    const ControllerGains g = table_gains();
    const ClosedLoopSystem sys =
        assemble(p, g, six_terminal_dc(), std::nullopt, Config::DroopOnly);

    Vec probe(12, 0.0);
    for (std::size_t i = 0; i < 6; ++i) probe[6 + i] = 1.0;
    const Vec out = sys.a * probe;
    for (std::size_t i = 0; i < 6; ++i) {
        const double expected = -1.0 / p.cap[i] * g.k_v[i] / p.v_nom;
        CHECK(out[6 + i] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("zero disturbance keeps the origin as equilibrium") {
    const ClosedLoopSystem sys = assemble(benchmark_params(), table_gains(), six_terminal_dc(),
                                          ring_comm(), Config::SecondaryDistributed);
    for (double v : sys.b) CHECK(v == 0.0);
}

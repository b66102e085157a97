#include <doctest.h>

#include <random>
#include <sstream>

#include "chaoscomm/memristor.hpp"

using namespace chaoscomm;

namespace {

const MemristorParams kRef = MemristorParams::reference();
const std::vector<MemristorParams> kPair(2, kRef);

}  // namespace

TEST_SUITE("memristor") {
    TEST_CASE("reference device constants") {
        CHECK(kRef.r_on == 800.0);
        CHECK(kRef.r_off == 1650.0);
        CHECK(kRef.r_init == 1650.0);
        CHECK(kRef.d == doctest::Approx(70e-9));
        CHECK(kRef.uv == doctest::Approx(10e-15));
        CHECK(kRef.p == 1);
        CHECK_NOTHROW(kRef.validate());

        MemristorParams bad = kRef;
        bad.r_on = 2000.0;
        CHECK_THROWS_AS(bad.validate(), InvalidArgument);
        bad = kRef;
        bad.r_init = 500.0;
        CHECK_THROWS_AS(bad.validate(), InvalidArgument);
        bad = kRef;
        bad.p = 0;
        CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    }

    TEST_CASE("memristance endpoints and midpoint") {
        CHECK(memristance({0.0}, kRef) == doctest::Approx(1650.0));
        CHECK(memristance({kRef.d}, kRef) == doctest::Approx(800.0));
        CHECK(memristance({kRef.d / 2}, kRef) == doctest::Approx(1225.0));
    }

    TEST_CASE("memristance is bounded and decreasing in w") {
        double prev = memristance({0.0}, kRef);
        for (int i = 1; i <= 1000; ++i) {
            const double m = memristance({kRef.d * i / 1000.0}, kRef);
            CHECK(m < prev);
            CHECK(m >= kRef.r_on - 1e-9);
            CHECK(m <= kRef.r_off + 1e-9);
            prev = m;
        }
    }

    TEST_CASE("drift step") {
        CHECK(memristor_step({0.0}, -1.0, 1e-3, kRef).w == 0.0);
        CHECK(memristor_step({kRef.d / 2}, 0.0, 1e-3, kRef).w == kRef.d / 2);
        const double i = 1e-9;
        const double dt = 1e-3;
        const double expected = kRef.d / 2 + kRef.uv * kRef.r_on / (kRef.d * kRef.d) * i * dt;
        CHECK(memristor_step({kRef.d / 2}, i, dt, kRef).w == doctest::Approx(expected).epsilon(1e-12));
        CHECK(memristor_window(0.0, kRef) == 0.0);
        CHECK(memristor_window(kRef.d, kRef) == 0.0);
        CHECK(memristor_window(kRef.d / 2, kRef) == 1.0);
    }

    TEST_CASE("drift never leaves [0, d]") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> w0(0.0, kRef.d);
        std::normal_distribution<double> cur(0.0, 1e6);
        for (int trial = 0; trial < 50; ++trial) {
            MemristorState st{w0(rng)};
            for (int k = 0; k < 200; ++k) {
                st = memristor_step(st, cur(rng), 1e-2, kRef);
                REQUIRE(st.w >= 0.0);
                REQUIRE(st.w <= kRef.d);
            }
        }
    }

    TEST_CASE("nominal memristances reproduce the plain field exactly") {
        const auto nominal = apply_key(nominal_key(kPair), kPair);
        const auto p = ChuaParams::canonical();
        for (const StateVec s : {StateVec{0.1, 0.2, -0.3}, StateVec{2.0, -0.5, 1.0}}) {
            CHECK(memristor_chua_deriv(s, nominal, kPair, p).deriv == chua_deriv(s, p));
        }
        CHECK(effective_params(nominal, kPair, p) == p);
    }

    TEST_CASE("memristance ratio scales the keyed coefficient") {
        // Halving the sigma element's memristance doubles sigma.
        MemristorKey key = nominal_key(kPair);
        key.targets[0] = 825.0;
        const auto p = ChuaParams::canonical();
        const auto eff = effective_params(apply_key(key, kPair), kPair, p);
        CHECK(eff.sigma == doctest::Approx(2.0 * p.sigma).epsilon(1e-12));
        CHECK(eff.beta == p.beta);

        key = nominal_key(kPair);
        key.targets[1] = 1320.0;
        const auto eff_b = effective_params(apply_key(key, kPair), kPair, p);
        CHECK(eff_b.beta == doctest::Approx(p.beta * 1650.0 / 1320.0).epsilon(1e-12));
        CHECK(eff_b.sigma == p.sigma);

        const StateVec s{0.4, 0.1, -0.2};
        const auto dm = memristor_chua_deriv(s, apply_key(key, kPair), kPair, p);
        CHECK(dm.deriv.x3 == doctest::Approx(-eff_b.beta * s.x2));
        REQUIRE(dm.currents.size() == 2);
        CHECK(dm.currents[0] == doctest::Approx(std::abs(s.x2 - s.x1 - nonlinearity(s.x1, p))));
        CHECK(dm.currents[1] == doctest::Approx(std::abs(s.x2)));
    }

    TEST_CASE("apply_key inverts the memristance map") {
        CHECK(apply_key({{1650.0, 800.0}, 0.05}, kPair)[0].w == 0.0);
        CHECK(apply_key({{1650.0, 800.0}, 0.05}, kPair)[1].w == doctest::Approx(kRef.d));
        CHECK(apply_key({{1225.0, 1225.0}, 0.05}, kPair)[0].w == doctest::Approx(kRef.d / 2));
        for (double t = 800.0; t <= 1650.0; t += 37.0) {
            const auto st = apply_key({{t, t}, 0.05}, kPair);
            CHECK(memristance(st[0], kRef) == doctest::Approx(t).epsilon(1e-9));
        }
        CHECK_THROWS_AS((void)apply_key({{1700.0, 1650.0}, 0.05}, kPair), InvalidArgument);
        CHECK_THROWS_AS((void)apply_key({{700.0, 1650.0}, 0.05}, kPair), InvalidArgument);
        CHECK_THROWS_AS((void)apply_key({{1650.0}, 0.05}, kPair), InvalidArgument);
        CHECK_THROWS_AS((void)apply_key({{1650.0, 1650.0}, 1.5}, kPair), InvalidArgument);
    }

    TEST_CASE("key space size") {
        const std::vector<MemristorParams> one(1, kRef);
        CHECK(key_space_size(one, 85.0) == 11);
        CHECK(key_space_size(kPair, 85.0) == 121);
        CHECK(key_space_size(kPair, 5000.0) == 1);
        CHECK_THROWS_AS((void)key_space_size(kPair, 0.0), InvalidArgument);
    }

    TEST_CASE("frozen keyed run equals the plain oscillator with effective coefficients") {
        MemristorKey key = nominal_key(kPair);
        key.targets[0] = 1600.0;
        const auto states = apply_key(key, kPair);
        const auto base = ChuaParams::canonical();
        const auto run = simulate_memristor_chua({0.1, 0, 0}, states, kPair, base, 1e-3, 2000);
        const auto plain = integrate(effective_params(states, kPair, base), {0.1, 0, 0}, 1e-3, 2000);
        CHECK(run.trajectory.states == plain.states);
        CHECK(run.final_states[0].w == states[0].w);
    }

    TEST_CASE("drift mode moves the programmed state and stays bounded") {
        const auto states = apply_key({{1225.0, 1225.0}, 0.05}, kPair);
        const auto run = simulate_memristor_chua({0.1, 0, 0}, states, kPair, ChuaParams::canonical(), 1e-3, 2000,
                                                 true, 1e-6);
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(run.final_states[k].w != states[k].w);
            CHECK(run.final_states[k].w >= 0.0);
            CHECK(run.final_states[k].w <= kRef.d);
        }
    }

    TEST_CASE("key file round trip") {
        const MemristorKey key{{1567.5, 1320.0}, 0.05};
        std::stringstream buf;
        write_key_file(buf, key);
        const auto back = parse_key_file(buf);
        CHECK(back.targets == key.targets);

        std::istringstream commented("# keys\n1, 1200\n0, 1650  # sigma element\n");
        CHECK(parse_key_file(commented).targets == std::vector<double>{1650.0, 1200.0});

        std::istringstream malformed("0 1650\n");
        CHECK_THROWS_AS((void)parse_key_file(malformed), InvalidArgument);
        std::istringstream gap("0, 1650\n2, 1650\n");
        CHECK_THROWS_AS((void)parse_key_file(gap), InvalidArgument);
    }
}

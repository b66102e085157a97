#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "chaoscomm/dynamics.hpp"

using namespace chaoscomm;

namespace {

const ChuaParams kCanon = ChuaParams::canonical();

double max_abs_diff(const StateVec &a, const StateVec &b) { return (a - b).max_abs(); }

// Eigenvalues of the matrix via Eigen's general solver, used as an independent
// route against the characteristic-cubic implementation.
double eigen_max_real(const Mat3 &m) {
    Eigen::Matrix3d e;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) e(i, j) = m[i][j];
    return Eigen::EigenSolver<Eigen::Matrix3d>(e, false).eigenvalues().real().maxCoeff();
}

}  // namespace

TEST_SUITE("dynamics") {
    TEST_CASE("nonlinearity values and symmetry") {
        CHECK(nonlinearity(0.0, kCanon) == 0.0);
        CHECK(nonlinearity(1.0, kCanon) == doctest::Approx(-1.143).epsilon(1e-12));
        // m1 * 1.5 + (m0 - m1) * 1 = -1.071 - 0.429
        CHECK(std::abs(nonlinearity(1.5, kCanon) - (-1.5)) < 1e-9);

        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-5.0, 5.0);
        for (int i = 0; i < 200; ++i) {
            const double x = u(rng);
            CHECK(nonlinearity(-x, kCanon) == doctest::Approx(-nonlinearity(x, kCanon)).epsilon(1e-14));
            // Slope is m0 inside the breakpoints and m1 outside.
            const double h = 1e-6;
            if (std::abs(std::abs(x) - kCanon.b) > 1e-3) {
                const double fd = (nonlinearity(x + h, kCanon) - nonlinearity(x - h, kCanon)) / (2 * h);
                CHECK(fd == doctest::Approx(nonlinearity_slope(x, kCanon)).epsilon(1e-6));
            }
        }
    }

    TEST_CASE("vector field at reference points") {
        CHECK(chua_deriv({0, 0, 0}, kCanon) == StateVec{0, 0, 0});
        CHECK(max_abs_diff(chua_deriv({1.5, 0, -1.5}, kCanon), {0, 0, 0}) < 1e-12);
        const auto d = chua_deriv({0, 1, 0}, kCanon);
        CHECK(d.x1 == doctest::Approx(15.6));
        CHECK(d.x2 == -1.0);
        CHECK(d.x3 == -28.0);

        ChuaParams fast = kCanon;
        fast.time_scale = 3.0;
        const StateVec s{0.3, -0.2, 0.7};
        CHECK(max_abs_diff(chua_deriv(s, fast), 3.0 * chua_deriv(s, kCanon)) < 1e-12);
    }

    TEST_CASE("equilibria") {
        const auto eq = equilibria(kCanon);
        REQUIRE(eq.size() == 3);
        CHECK(eq[0] == StateVec{0, 0, 0});
        CHECK(max_abs_diff(eq[1], {1.5, 0, -1.5}) < 1e-12);
        CHECK(max_abs_diff(eq[2], {-1.5, 0, 1.5}) < 1e-12);
        for (const auto &e : eq) CHECK(chua_deriv(e, kCanon).max_abs() < 1e-12);

        ChuaParams single = kCanon;
        single.m0 = single.m1;
        CHECK(equilibria(single).size() == 1);

        ChuaParams degenerate = kCanon;
        degenerate.m1 = -1.0;
        CHECK_THROWS_AS((void)equilibria(degenerate), DegenerateSlopeError);
    }

    TEST_CASE("equilibrium residual holds over a parameter sweep") {
        for (double sigma : {8.0, 12.0, 15.6, 20.0}) {
            for (double m0 : {-1.3, -1.143, -0.9}) {
                for (double b : {0.5, 1.0, 2.0}) {
                    ChuaParams p = kCanon;
                    p.sigma = sigma;
                    p.m0 = m0;
                    p.b = b;
                    for (const auto &e : equilibria(p)) CHECK(chua_deriv(e, p).max_abs() < 1e-12);
                }
            }
        }
    }

    TEST_CASE("no outer equilibria when the outer solution falls in the wrong segment") {
        // m0 > m1 with 1 + m1 > 0 puts the outer-segment root at x < 0.
        ChuaParams p = kCanon;
        p.m0 = -0.83;
        p.m1 = -0.925;
        const auto eq = equilibria(p);
        CHECK(eq.size() == 1);
        for (const auto &e : eq) CHECK(chua_deriv(e, p).max_abs() < 1e-12);
        // Brute-force scan of x1 + f(x1) for sign changes finds only the origin.
        int roots = 0;
        for (double x = -10.0; x < 10.0; x += 1e-3) {
            const double g0 = x + nonlinearity(x, p);
            const double g1 = (x + 1e-3) + nonlinearity(x + 1e-3, p);
            roots += (g0 == 0.0) || (g0 < 0.0) != (g1 < 0.0);
        }
        CHECK(roots == 1);
    }

    TEST_CASE("jacobian rows") {
        const auto j0 = jacobian({0, 0, 0}, kCanon);
        CHECK(j0[0][0] == doctest::Approx(2.2308).epsilon(1e-12));
        CHECK(j0[0][1] == doctest::Approx(15.6));
        CHECK(j0[0][2] == 0.0);
        const auto j1 = jacobian({1.5, 0, -1.5}, kCanon);
        CHECK(j1[0][0] == doctest::Approx(-15.6 * 0.286).epsilon(1e-12));
        for (const auto &j : {j0, j1}) {
            CHECK(j[2][0] == 0.0);
            CHECK(j[2][1] == -28.0);
            CHECK(j[2][2] == 0.0);
        }
        CHECK_THROWS_AS((void)jacobian({1.0, 0, 0}, kCanon), BreakpointError);
        CHECK_THROWS_AS((void)jacobian({-1.0, 2, 0}, kCanon), BreakpointError);
    }

    TEST_CASE("jacobian matches central differences of the field") {
        const double h = 1e-6;
        for (const StateVec s : {StateVec{0.3, -0.1, 0.4}, StateVec{2.0, 0.5, -1.0}, StateVec{-1.7, 0.2, 0.9}}) {
            const auto j = jacobian(s, kCanon);
            for (int c = 0; c < 3; ++c) {
                StateVec e{};
                (c == 0 ? e.x1 : c == 1 ? e.x2 : e.x3) = h;
                const StateVec col = (1.0 / (2 * h)) * (chua_deriv(s + e, kCanon) - chua_deriv(s - e, kCanon));
                CHECK(col.x1 == doctest::Approx(j[0][c]).epsilon(1e-6));
                CHECK(col.x2 == doctest::Approx(j[1][c]).epsilon(1e-6));
                CHECK(col.x3 == doctest::Approx(j[2][c]).epsilon(1e-6));
            }
        }
    }

    TEST_CASE("max_real_eig") {
        CHECK(max_real_eig({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}) == doctest::Approx(1.0));
        CHECK(max_real_eig({{{-1, 0, 0}, {0, -2, 0}, {0, 0, -3}}}) == doctest::Approx(-1.0));
        for (const auto &e : equilibria(kCanon)) {
            const auto j = jacobian(e, kCanon);
            CHECK(max_real_eig(j) > 0.0);
            CHECK(max_real_eig(j) == doctest::Approx(eigen_max_real(j)).epsilon(1e-9));
        }
    }

    TEST_CASE("max_real_eig agrees with a general eigensolver on random matrices") {
        std::mt19937_64 rng(11);
        std::normal_distribution<double> g(0.0, 3.0);
        for (int i = 0; i < 500; ++i) {
            Mat3 m;
            for (auto &row : m)
                for (auto &v : row) v = g(rng);
            const double ours = max_real_eig(m);
            const double ref = eigen_max_real(m);
            CHECK(std::abs(ours - ref) < 1e-8 * (1.0 + std::abs(ref)));
        }
    }

    TEST_CASE("integrate basics") {
        const auto still = integrate(kCanon, {0, 0, 0}, 1e-3, 1000);
        CHECK(still.size() == 1001);
        for (const auto &s : still.states) CHECK(s == StateVec{0, 0, 0});

        const auto a = integrate(kCanon, {0.1, 0, 0}, 1e-3, 5000);
        const auto b = integrate(kCanon, {0.1, 0, 0}, 1e-3, 5000);
        CHECK(a.states == b.states);

        CHECK_THROWS_AS((void)integrate(kCanon, {0.1, 0, 0}, 0.0, 10), InvalidArgument);
        CHECK_THROWS_AS((void)integrate(kCanon, {0.1, 0, 0}, 1e-3, 0), InvalidArgument);

        ChuaParams unstable = kCanon;
        unstable.m0 = unstable.m1 = -3.0;
        CHECK_THROWS_AS((void)integrate(unstable, {0.1, 0, 0}, 1e-3, 200000), DivergenceError);
    }

    TEST_CASE("canonical trajectory visits both scrolls") {
        const auto tr = integrate(kCanon, {0.1, 0, 0}, 1e-3, 200000);
        const auto x1 = tr.component(0);
        CHECK(scroll_switches(x1, kCanon.b) >= 10);
    }

    TEST_CASE("scroll_switches ignores the inner segment") {
        const std::vector<double> x{2, 0.5, 2, -0.5, -2, 0, -3, 0.9, 1.0, -1.0};
        // 2 -> -2 -> 1.0 -> -1.0
        CHECK(scroll_switches(x, 1.0) == 3);
        CHECK(scroll_switches(std::vector<double>{0.1, 0.2, -0.3}, 1.0) == 0);
    }

    TEST_CASE("RK4 error ratio on halving the step") {
        const auto ratio = [](const StateVec &s0, double horizon) {
            const auto steps = [&](double h) { return static_cast<std::size_t>(std::llround(horizon / h)); };
            const auto ref = integrate(kCanon, s0, 6.25e-5, steps(6.25e-5)).states.back();
            const auto coarse = integrate(kCanon, s0, 4e-3, steps(4e-3)).states.back();
            const auto fine = integrate(kCanon, s0, 2e-3, steps(2e-3)).states.back();
            return max_abs_diff(coarse, ref) / max_abs_diff(fine, ref);
        };
        // Smooth segments: before x1 first reaches the breakpoint (t = 0.62),
        // and a unit horizon that stays in the outer region.
        const StateVec outer = equilibria(kCanon)[1] + StateVec{0.05, 0, 0};
        CHECK(ratio({0.1, 0, 0}, 0.5) >= 8.0);
        CHECK(ratio(outer, 1.0) >= 8.0);
        // Stepping across the slope change without event location drops the
        // order, so the unit horizon from (0.1, 0, 0) falls short.
        CHECK(ratio({0.1, 0, 0}, 1.0) < 8.0);
    }

    TEST_CASE("integrate_scaled with unit scaling equals integrate") {
        const auto plain = integrate(kCanon, {0.1, 0, 0}, 1e-3, 3000);
        const auto scaled = integrate_scaled(kCanon, {0.1, 0, 0}, [](const StateVec &) { return 1.0; }, 1e-3, 3000);
        CHECK(plain.states == scaled.states);
        REQUIRE(scaled.scaled_time);
        for (std::size_t k = 0; k < scaled.size(); k += 500) {
            CHECK((*scaled.scaled_time)[k] == doctest::Approx(plain.time_at(k)).epsilon(1e-12));
        }
    }

    TEST_CASE("constant scaling is a time reparametrization") {
        const double dt_tau = 5e-4;
        const std::size_t n = 10000;  // tau horizon 5, t horizon 10
        const auto scaled = integrate_scaled(kCanon, {0.1, 0, 0}, [](const StateVec &) { return 2.0; }, dt_tau, n);
        const auto plain = integrate(kCanon, {0.1, 0, 0}, 2 * dt_tau, n);
        double worst = 0.0;
        for (std::size_t k = 0; k <= n; ++k) worst = std::max(worst, max_abs_diff(scaled.states[k], plain.states[k]));
        CHECK(worst < 1e-6);
        CHECK(std::abs(scaled.scaled_time->back() - 2.0 * static_cast<double>(n) * dt_tau) < 1e-9);
    }

    TEST_CASE("scaled time is strictly increasing") {
        auto lam = [](const StateVec &s) { return s.x1 >= 0 ? 1.0 : 1.3; };
        const auto tr = integrate_scaled(kCanon, {0.1, 0, 0}, lam, 1e-3, 20000);
        const auto &t = *tr.scaled_time;
        REQUIRE(t.size() == tr.size());
        for (std::size_t k = 1; k < t.size(); ++k) REQUIRE(t[k] > t[k - 1]);
    }

    TEST_CASE("scaling bound errors") {
        CHECK_THROWS_AS((void)integrate_scaled(kCanon, {0.1, 0, 0}, [](const StateVec &) { return 0.0; }, 1e-3, 10),
                        ScalingBoundError);
        CHECK_THROWS_AS((void)integrate_scaled(kCanon, {0.1, 0, 0}, [](const StateVec &) { return -1.0; }, 1e-3, 10),
                        ScalingBoundError);
        CHECK_THROWS_AS((void)integrate_scaled(kCanon, {0.1, 0, 0},
                                               [](const StateVec &) { return std::numeric_limits<double>::infinity(); },
                                               1e-3, 10),
                        ScalingBoundError);
    }

    TEST_CASE("state-dependent scaling keeps the attractor's bounding box") {
        const std::size_t skip = 50000;
        auto box = [skip](const Trajectory &tr) {
            std::array<double, 6> b{1e9, -1e9, 1e9, -1e9, 1e9, -1e9};
            for (std::size_t k = skip; k < tr.size(); ++k) {
                const auto &s = tr.states[k];
                const double v[3]{s.x1, s.x2, s.x3};
                for (int i = 0; i < 3; ++i) {
                    b[2 * i] = std::min(b[2 * i], v[i]);
                    b[2 * i + 1] = std::max(b[2 * i + 1], v[i]);
                }
            }
            return b;
        };
        const auto plain = box(integrate(kCanon, {0.1, 0, 0}, 1e-3, 400000));
        const auto scaled = box(integrate_scaled(
            kCanon, {0.1, 0, 0}, [](const StateVec &s) { return s.x1 >= 0 ? 1.0 : 1.3; }, 1e-3, 400000));
        for (int i = 0; i < 3; ++i) {
            const double span = plain[2 * i + 1] - plain[2 * i];
            CHECK(std::abs(scaled[2 * i] - plain[2 * i]) <= 0.02 * span);
            CHECK(std::abs(scaled[2 * i + 1] - plain[2 * i + 1]) <= 0.02 * span);
        }
    }

    TEST_CASE("largest Lyapunov exponent") {
        // Reference Benettin run, 200 units after a 50-unit transient.
        const double golden = 0.4273;
        const double canon = lyapunov_max(kCanon, 200, 1e-3, {0.1, 0, 0});
        CHECK(canon == doctest::Approx(golden).epsilon(0.2));
        CHECK(lyapunov_max(kCanon, 200, 1e-3, {0.1, 0, 0}) == canon);

        ChuaParams contracting = kCanon;
        contracting.m0 = contracting.m1 = 0.5;
        for (const auto &e : equilibria(contracting)) REQUIRE(max_real_eig(jacobian(e, contracting)) < 0.0);
        CHECK(lyapunov_max(contracting, 200, 1e-3, {0.1, 0, 0}) < 0.0);
    }

    TEST_CASE("Lyapunov exponent at the +-5% sigma/beta corners") {
        // Three corners are chaotic. The (-5%, -5%) corner sits in a periodic
        // window: its estimate shrinks toward zero as the horizon grows.
        for (double fs : {0.95, 1.05}) {
            for (double fb : {0.95, 1.05}) {
                ChuaParams p = kCanon;
                p.sigma *= fs;
                p.beta *= fb;
                const double l = lyapunov_max(p, 1000, 1e-3, {0.1, 0, 0});
                CAPTURE(fs);
                CAPTURE(fb);
                if (fs < 1.0 && fb < 1.0) {
                    CHECK(std::abs(l) < 0.02);
                } else {
                    CHECK(l > 0.05);
                }
            }
        }
    }

    TEST_CASE("dominant frequency") {
        const double dt = 1e-3;
        std::vector<double> sine(20000);
        for (std::size_t k = 0; k < sine.size(); ++k) {
            sine[k] = std::sin(2 * std::numbers::pi * 5.0 * dt * static_cast<double>(k));
        }
        const double bin = 1.0 / (static_cast<double>(sine.size()) * dt);
        CHECK(std::abs(dominant_frequency(sine, dt) - 5.0) <= bin);
        CHECK(dominant_frequency(std::vector<double>(1000, 3.0), dt) == 0.0);
        CHECK_THROWS_AS((void)dominant_frequency(std::vector<double>(10, 1.0), dt), InvalidArgument);

        // Reference run: scroll-switching peak of x1 over 150 units after the transient.
        const auto x1 = integrate(kCanon, {0.1, 0, 0}, dt, 200000).component(0);
        const double f = dominant_frequency(std::span<const double>(x1).subspan(50000), dt);
        CHECK(f == doctest::Approx(0.0867).epsilon(0.1));
    }

    TEST_CASE("retuned field runs the same orbit faster") {
        ChuaParams fast = kCanon;
        fast.time_scale = 4.0;
        const auto slow = integrate(kCanon, {0.1, 0, 0}, 1e-3, 8000);
        const auto quick = integrate(fast, {0.1, 0, 0}, 2.5e-4, 8000);
        double worst = 0.0;
        for (std::size_t k = 0; k < slow.size(); ++k) worst = std::max(worst, max_abs_diff(slow.states[k], quick.states[k]));
        CHECK(worst < 1e-9);
    }
}

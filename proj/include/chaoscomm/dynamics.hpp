#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chaoscomm/errors.hpp"

namespace chaoscomm {

// =============================================================================
// State and parameter types
// =============================================================================

/// Dimensionless oscillator state. Transmitter (x) and receiver (z) states share
/// this type.
struct StateVec {
    double x1{};
    double x2{};
    double x3{};

    constexpr StateVec &operator+=(const StateVec &o) {
        x1 += o.x1;
        x2 += o.x2;
        x3 += o.x3;
        return *this;
    }
    constexpr StateVec &operator-=(const StateVec &o) {
        x1 -= o.x1;
        x2 -= o.x2;
        x3 -= o.x3;
        return *this;
    }
    constexpr StateVec &operator*=(double k) {
        x1 *= k;
        x2 *= k;
        x3 *= k;
        return *this;
    }

    friend constexpr StateVec operator+(StateVec a, const StateVec &b) { return a += b; }
    friend constexpr StateVec operator-(StateVec a, const StateVec &b) { return a -= b; }
    friend constexpr StateVec operator*(double k, StateVec a) { return a *= k; }
    friend constexpr StateVec operator*(StateVec a, double k) { return a *= k; }
    friend constexpr bool operator==(const StateVec &, const StateVec &) = default;

    [[nodiscard]] bool finite() const {
        return std::isfinite(x1) && std::isfinite(x2) && std::isfinite(x3);
    }
    [[nodiscard]] double norm() const { return std::sqrt(x1 * x1 + x2 * x2 + x3 * x3); }
    [[nodiscard]] double max_abs() const {
        return std::max({std::abs(x1), std::abs(x2), std::abs(x3)});
    }
    [[nodiscard]] double dot(const StateVec &o) const {
        return x1 * o.x1 + x2 * o.x2 + x3 * o.x3;
    }
};

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Coefficients of the dimensionless Chua oscillator
///
///   x1' = sigma (x2 - x1 - f(x1))
///   x2' = x1 - x2 + x3
///   x3' = -beta x2
///
/// with the piecewise-linear diode f(x) = m1 x + (m0 - m1)(|x + b| - |x - b|) / 2.
///
/// `time_scale` multiplies the whole vector field. A value of k runs the same
/// orbit k times faster, which is how the carrier frequency is retuned.
struct ChuaParams {
    double sigma{15.6};
    double beta{28.0};
    double m0{-1.143};
    double m1{-0.714};
    double b{1.0};
    double time_scale{1.0};

    /// Well-known double-scroll regime.
    static constexpr ChuaParams canonical() { return {}; }

    /// Throws InvalidArgument naming the violated invariant.
    void validate() const;

    friend constexpr bool operator==(const ChuaParams &, const ChuaParams &) = default;
};

/// Uniformly sampled trajectory. `scaled_time`, when present, holds the
/// accumulated orbit time t(tau) for each sample of a time-scaled run.
struct Trajectory {
    double t0{0.0};
    double dt{1e-3};
    std::vector<StateVec> states;
    std::optional<std::vector<double>> scaled_time;

    [[nodiscard]] std::size_t size() const { return states.size(); }
    [[nodiscard]] double time_at(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
    [[nodiscard]] std::vector<double> component(int index) const;
};

inline constexpr double kDivergenceCap = 1e6;
inline constexpr double kDefaultTransient = 50.0;
inline constexpr double kLyapunovRenormInterval = 1.0;

// =============================================================================
// Vector field
// =============================================================================

/// Piecewise-linear Chua diode characteristic.
[[nodiscard]] constexpr double nonlinearity(double x, const ChuaParams &p) {
    const double ax = (x + p.b) < 0 ? -(x + p.b) : (x + p.b);
    const double bx = (x - p.b) < 0 ? -(x - p.b) : (x - p.b);
    return p.m1 * x + 0.5 * (p.m0 - p.m1) * (ax - bx);
}

/// Slope of the diode characteristic away from the breakpoints.
[[nodiscard]] constexpr double nonlinearity_slope(double x, const ChuaParams &p) {
    return (x < p.b && x > -p.b) ? p.m0 : p.m1;
}

[[nodiscard]] constexpr StateVec chua_deriv(const StateVec &s, const ChuaParams &p) {
    const double k = p.time_scale;
    return {k * p.sigma * (s.x2 - s.x1 - nonlinearity(s.x1, p)),
            k * (s.x1 - s.x2 + s.x3),
            k * (-p.beta * s.x2)};
}

// =============================================================================
// Stability diagnostics
// =============================================================================

/// All solutions of chua_deriv(s) == 0: the origin plus, when the outer-segment
/// solution is consistent (|x*| > b), the symmetric pair (+-x*, 0, -+x*).
[[nodiscard]] std::vector<StateVec> equilibria(const ChuaParams &p);

/// Jacobian of chua_deriv. Throws BreakpointError when |x1| == b.
[[nodiscard]] Mat3 jacobian(const StateVec &s, const ChuaParams &p);

/// Largest real part over the eigenvalues of a 3x3 matrix, via the roots of
/// its characteristic cubic.
[[nodiscard]] double max_real_eig(const Mat3 &m);

// =============================================================================
// Integration
// =============================================================================

/// One classical Runge-Kutta step of s' = field(s).
template <typename Field>
[[nodiscard]] StateVec rk4_step(const StateVec &s, double h, Field &&field) {
    const StateVec k1 = field(s);
    const StateVec k2 = field(s + (0.5 * h) * k1);
    const StateVec k3 = field(s + (0.5 * h) * k2);
    const StateVec k4 = field(s + h * k3);
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Throws DivergenceError when s is non-finite or beyond kDivergenceCap.
void check_bounded(const StateVec &s, double t);

/// Fixed-step RK4 trajectory with n + 1 samples starting at s0.
[[nodiscard]] Trajectory integrate(const ChuaParams &p, const StateVec &s0, double dt, std::size_t n);

/// Integrates dx/dtau = lambda(x) chua_deriv(x) with RK4 in tau and
/// accumulates t via dt/dtau = lambda(x) with the same RK4 weights.
template <typename LambdaFn>
[[nodiscard]] Trajectory integrate_scaled_with(const ChuaParams &p, const StateVec &s0,
                                               LambdaFn &&lambda_fn, double dt_tau,
                                               std::size_t n);

[[nodiscard]] Trajectory integrate_scaled(const ChuaParams &p, const StateVec &s0,
                                          const std::function<double(const StateVec &)> &lambda_fn,
                                          double dt_tau, std::size_t n);

/// Benettin estimate of the largest Lyapunov exponent. The first `transient`
/// time units are discarded; the tangent vector is renormalized every
/// kLyapunovRenormInterval.
[[nodiscard]] double lyapunov_max(const ChuaParams &p, double horizon, double dt, const StateVec &s0,
                                  double transient = kDefaultTransient);

/// Frequency (cycles per time unit) of the spectral magnitude peak of a
/// mean-removed, Tukey(0.5)-tapered signal. Returns 0 for constant input.
[[nodiscard]] double dominant_frequency(std::span<const double> signal, double dt);

/// Number of times x1 moves from one outer region (x1 >= b) to the other
/// (x1 <= -b). Excursions into the inner segment do not count.
[[nodiscard]] std::size_t scroll_switches(std::span<const double> x1, double b);

// -----------------------------------------------------------------------------

/// Throws ScalingBoundError unless 0 < value < inf.
void check_scaling(double value);

template <typename LambdaFn>
Trajectory integrate_scaled_with(const ChuaParams &p, const StateVec &s0, LambdaFn &&lambda_fn,
                                 double dt_tau, std::size_t n) {
    p.validate();
    if (!(dt_tau > 0.0)) throw InvalidArgument("integrate_scaled: dt_tau must be > 0");
    if (n < 1) throw InvalidArgument("integrate_scaled: n must be >= 1");
    check_bounded(s0, 0.0);

    Trajectory out;
    out.dt = dt_tau;
    out.states.reserve(n + 1);
    std::vector<double> t_of_tau;
    t_of_tau.reserve(n + 1);

    StateVec s = s0;
    double t = 0.0;
    out.states.push_back(s);
    t_of_tau.push_back(t);

    const double h = dt_tau;
    for (std::size_t k = 0; k < n; ++k) {
        const double l1 = lambda_fn(s);
        check_scaling(l1);
        const StateVec k1 = l1 * chua_deriv(s, p);
        const StateVec s2 = s + (0.5 * h) * k1;
        const double l2 = lambda_fn(s2);
        check_scaling(l2);
        const StateVec k2 = l2 * chua_deriv(s2, p);
        const StateVec s3 = s + (0.5 * h) * k2;
        const double l3 = lambda_fn(s3);
        check_scaling(l3);
        const StateVec k3 = l3 * chua_deriv(s3, p);
        const StateVec s4 = s + h * k3;
        const double l4 = lambda_fn(s4);
        check_scaling(l4);
        const StateVec k4 = l4 * chua_deriv(s4, p);

        s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += (h / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
        check_bounded(s, h * static_cast<double>(k + 1));
        out.states.push_back(s);
        t_of_tau.push_back(t);
    }
    out.scaled_time = std::move(t_of_tau);
    return out;
}

}  // namespace chaoscomm

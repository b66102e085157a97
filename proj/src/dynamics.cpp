#include "chaoscomm/dynamics.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include "detail/fft.hpp"

namespace chaoscomm {

void ChuaParams::validate() const {
    std::ostringstream err;
    if (!(sigma > 0.0) || !std::isfinite(sigma)) err << "ChuaParams: sigma must be > 0 (got " << sigma << "); ";
    if (!(beta > 0.0) || !std::isfinite(beta)) err << "ChuaParams: beta must be > 0 (got " << beta << "); ";
    if (!(b > 0.0) || !std::isfinite(b)) err << "ChuaParams: b must be > 0 (got " << b << "); ";
    if (!std::isfinite(m0) || !std::isfinite(m1)) err << "ChuaParams: slopes must be finite; ";
    if (!(time_scale > 0.0) || !std::isfinite(time_scale))
        err << "ChuaParams: time_scale must be > 0 (got " << time_scale << "); ";
    if (const auto msg = err.str(); !msg.empty()) throw InvalidArgument(msg.substr(0, msg.size() - 2));
}

std::vector<double> Trajectory::component(int index) const {
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto &s : states) {
        out.push_back(index == 0 ? s.x1 : index == 1 ? s.x2 : s.x3);
    }
    return out;
}

std::vector<StateVec> equilibria(const ChuaParams &p) {
    p.validate();
    if (1.0 + p.m1 == 0.0) throw DegenerateSlopeError("equilibria: 1 + m1 == 0");
    std::vector<StateVec> out{{0.0, 0.0, 0.0}};
    // Outer segment x > b: x + m1 x + (m0 - m1) b = 0. The solution only counts
    // when it actually lies in that segment; its mirror image covers x < -b.
    const double x_star = (p.m1 - p.m0) * p.b / (1.0 + p.m1);
    if (x_star > p.b) {
        out.push_back({x_star, 0.0, -x_star});
        out.push_back({-x_star, 0.0, x_star});
    }
    return out;
}

Mat3 jacobian(const StateVec &s, const ChuaParams &p) {
    if (std::abs(s.x1) == p.b) throw BreakpointError("jacobian: x1 lies on a breakpoint (|x1| == b)");
    const double k = p.time_scale;
    const double slope = nonlinearity_slope(s.x1, p);
    return Mat3{{{-k * p.sigma * (1.0 + slope), k * p.sigma, 0.0},
                 {k, -k, k},
                 {0.0, -k * p.beta, 0.0}}};
}

namespace {

// Real root of the monic cubic x^3 + a x^2 + b x + c by bisection on the
// Cauchy bound, then Newton polishing.
double cubic_real_root(double a, double b, double c) {
    auto poly = [&](double x) { return ((x + a) * x + b) * x + c; };
    auto dpoly = [&](double x) { return (3.0 * x + 2.0 * a) * x + b; };
    const double bound = 1.0 + std::max({std::abs(a), std::abs(b), std::abs(c)});
    double lo = -bound;
    double hi = bound;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * bound; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (poly(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 5; ++i) {
        const double d = dpoly(x);
        if (d == 0.0) break;
        const double next = x - poly(x) / d;
        if (!std::isfinite(next) || std::abs(poly(next)) >= std::abs(poly(x))) break;
        x = next;
    }
    return x;
}

}  // namespace

double max_real_eig(const Mat3 &m) {
    for (const auto &row : m)
        for (double v : row)
            if (!std::isfinite(v)) throw InvalidArgument("max_real_eig: matrix must be finite");

    // det(x I - M) = x^3 + a x^2 + b x + c
    const double tr = m[0][0] + m[1][1] + m[2][2];
    const double minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0] +
                          m[1][1] * m[2][2] - m[1][2] * m[2][1];
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    const double a = -tr;
    const double b = minors;
    const double c = -det;

    const double r = cubic_real_root(a, b, c);
    // Deflate: x^2 + p x + q
    const double p = a + r;
    const double q = b + r * p;
    const double disc = p * p - 4.0 * q;
    double best = r;
    if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        best = std::max({best, 0.5 * (-p + sq), 0.5 * (-p - sq)});
    } else {
        best = std::max(best, -0.5 * p);
    }
    return best;
}

void check_bounded(const StateVec &s, double t) {
    if (!s.finite() || s.max_abs() > kDivergenceCap) {
        std::ostringstream os;
        os << "trajectory diverged at t=" << t << " (state " << s.x1 << ", " << s.x2 << ", " << s.x3 << ")";
        throw DivergenceError(os.str());
    }
}

void check_scaling(double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << "time-scaling function returned " << value << ", must lie in (0, inf)";
        throw ScalingBoundError(os.str());
    }
}

Trajectory integrate(const ChuaParams &p, const StateVec &s0, double dt, std::size_t n) {
    p.validate();
    if (!(dt > 0.0)) throw InvalidArgument("integrate: dt must be > 0");
    if (n < 1) throw InvalidArgument("integrate: n must be >= 1");
    check_bounded(s0, 0.0);

    Trajectory out;
    out.dt = dt;
    out.states.reserve(n + 1);
    out.states.push_back(s0);
    StateVec s = s0;
    const auto field = [&p](const StateVec &x) { return chua_deriv(x, p); };
    for (std::size_t k = 0; k < n; ++k) {
        s = rk4_step(s, dt, field);
        check_bounded(s, dt * static_cast<double>(k + 1));
        out.states.push_back(s);
    }
    return out;
}

Trajectory integrate_scaled(const ChuaParams &p, const StateVec &s0,
                            const std::function<double(const StateVec &)> &lambda_fn, double dt_tau,
                            std::size_t n) {
    if (!lambda_fn) throw InvalidArgument("integrate_scaled: lambda_fn is empty");
    return integrate_scaled_with(p, s0, lambda_fn, dt_tau, n);
}

double lyapunov_max(const ChuaParams &p, double horizon, double dt, const StateVec &s0, double transient) {
    p.validate();
    if (!(dt > 0.0) || !(horizon > 0.0) || transient < 0.0)
        throw InvalidArgument("lyapunov_max: need dt > 0, horizon > 0, transient >= 0");

    const auto field = [&p](const StateVec &x) { return chua_deriv(x, p); };
    StateVec s = s0;
    const auto n_transient = static_cast<std::size_t>(std::llround(transient / dt));
    for (std::size_t k = 0; k < n_transient; ++k) {
        s = rk4_step(s, dt, field);
        check_bounded(s, dt * static_cast<double>(k + 1));
    }

    // Tangent flow v' = J(s) v, integrated jointly with s by RK4.
    const auto tangent = [&p](const StateVec &x, const StateVec &v) {
        const double k = p.time_scale;
        const double slope = nonlinearity_slope(x.x1, p);
        return StateVec{k * p.sigma * (v.x2 - v.x1 - slope * v.x1), k * (v.x1 - v.x2 + v.x3),
                        -k * p.beta * v.x2};
    };

    StateVec v{1.0, 0.0, 0.0};
    const auto renorm_every =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(kLyapunovRenormInterval / dt)));
    const auto n = std::max<std::size_t>(renorm_every, static_cast<std::size_t>(std::llround(horizon / dt)));
    double log_sum = 0.0;
    double elapsed = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const StateVec a1 = field(s);
        const StateVec b1 = tangent(s, v);
        const StateVec s2 = s + (0.5 * dt) * a1;
        const StateVec v2 = v + (0.5 * dt) * b1;
        const StateVec a2 = field(s2);
        const StateVec b2 = tangent(s2, v2);
        const StateVec s3 = s + (0.5 * dt) * a2;
        const StateVec v3 = v + (0.5 * dt) * b2;
        const StateVec a3 = field(s3);
        const StateVec b3 = tangent(s3, v3);
        const StateVec s4 = s + dt * a3;
        const StateVec v4 = v + dt * b3;
        const StateVec a4 = field(s4);
        const StateVec b4 = tangent(s4, v4);
        s = s + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        v = v + (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        check_bounded(s, transient + dt * static_cast<double>(k + 1));
        if ((k + 1) % renorm_every == 0) {
            const double len = v.norm();
            log_sum += std::log(len);
            v *= 1.0 / len;
            elapsed = dt * static_cast<double>(k + 1);
        }
    }
    return log_sum / elapsed;
}

double dominant_frequency(std::span<const double> signal, double dt) {
    if (signal.size() < 64) throw InvalidArgument("dominant_frequency: need at least 64 samples");
    if (!(dt > 0.0)) throw InvalidArgument("dominant_frequency: dt must be > 0");

    const std::size_t n = signal.size();
    double mean = 0.0;
    for (double v : signal) mean += v;
    mean /= static_cast<double>(n);

    // Tukey window: Hann tapers over the outer half of the record.
    const double taper = 0.5 * static_cast<double>(n - 1);
    std::vector<double> x(n);
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pos = static_cast<double>(i);
        const double edge = std::min(pos, static_cast<double>(n - 1) - pos);
        double w = 1.0;
        if (edge < 0.5 * taper) w = 0.5 * (1.0 - std::cos(std::numbers::pi * edge / (0.5 * taper)));
        x[i] = (signal[i] - mean) * w;
        peak = std::max(peak, std::abs(signal[i] - mean));
    }
    if (peak <= 1e-12 * std::max(1.0, std::abs(mean))) return 0.0;

    const auto spec = detail::rfft(x);
    std::size_t best = 0;
    double best_mag = 0.0;
    for (std::size_t k = 1; k < spec.size(); ++k) {
        const double mag = std::abs(spec[k]);
        if (mag > best_mag) {
            best_mag = mag;
            best = k;
        }
    }
    return static_cast<double>(best) / (static_cast<double>(n) * dt);
}

std::size_t scroll_switches(std::span<const double> x1, double b) {
    if (!(b > 0.0)) throw InvalidArgument("scroll_switches: b must be > 0");
    int side = 0;
    std::size_t count = 0;
    for (double v : x1) {
        const int now = v >= b ? 1 : (v <= -b ? -1 : 0);
        if (now == 0) continue;
        if (side != 0 && now != side) ++count;
        side = now;
    }
    return count;
}

}  // namespace chaoscomm

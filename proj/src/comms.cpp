#include "chaoscomm/comms.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <type_traits>
#include <variant>
#include <sstream>

#include "chaoscomm/signal.hpp"
#include "detail/fft.hpp"

namespace chaoscomm {

namespace {

std::size_t samples_per_bit(double bit_duration, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
    const auto spb = static_cast<std::size_t>(std::llround(bit_duration / dt));
    if (spb < 2) throw InvalidArgument("bit_duration must span at least two samples");
    return spb;
}

// Drive value at RK4 stage `stage` (0, 1/2, 1/2, 1) of the step from sample k.
double stage_value(std::span<const double> u, std::size_t k, int stage) {
    const double a = u[k];
    const double b = k + 1 < u.size() ? u[k + 1] : a;
    if (stage == 0) return a;
    if (stage == 3) return b;
    return 0.5 * (a + b);
}

// One RK4 step of ds/dtau = lam(s) * field(s, stage).
template <typename Lam, typename Field>
StateVec scaled_step(const StateVec &s, double h, Lam &&lam, Field &&field) {
    const double l1 = lam(s);
    check_scaling(l1);
    const StateVec k1 = l1 * field(s, 0);
    const StateVec s2 = s + (0.5 * h) * k1;
    const double l2 = lam(s2);
    check_scaling(l2);
    const StateVec k2 = l2 * field(s2, 1);
    const StateVec s3 = s + (0.5 * h) * k2;
    const double l3 = lam(s3);
    check_scaling(l3);
    const StateVec k3 = l3 * field(s3, 2);
    const StateVec s4 = s + h * k3;
    const double l4 = lam(s4);
    check_scaling(l4);
    const StateVec k4 = l4 * field(s4, 3);
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <typename Field>
StateVec staged_rk4(const StateVec &s, double h, Field &&field) {
    const StateVec k1 = field(s, 0);
    const StateVec k2 = field(s + (0.5 * h) * k1, 1);
    const StateVec k3 = field(s + (0.5 * h) * k2, 2);
    const StateVec k4 = field(s + h * k3, 3);
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_unit(const StateVec &v) {
    if (!v.finite() || std::abs(v.norm() - 1.0) > 1e-9) {
        throw InvalidArgument("decision engine: selection vector must have unit norm");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Messages

AnalogMessage make_pulse(double amplitude, double start, double width, double dt, std::size_t n) {
    if (!(dt > 0.0) || !(width > 0.0) || n == 0) throw InvalidArgument("make_pulse: need dt > 0, width > 0, n > 0");
    AnalogMessage msg{std::vector<double>(n, 0.0), dt, std::abs(amplitude)};
    for (std::size_t k = 0; k < n; ++k) {
        const double t = dt * static_cast<double>(k);
        if (t >= start && t < start + width) msg.samples[k] = amplitude;
    }
    return msg;
}

double carrier_rms(const ChuaParams &p, const StateVec &s0, double dt, std::size_t n) {
    return rms(integrate(p, s0, dt, n).component(0));
}

void BitMessage::validate() const {
    for (int b : bits) {
        if (b != 0 && b != 1) throw InvalidArgument("BitMessage: bits must be 0 or 1");
    }
    if (!(bit_duration >= kMinOrbitsPerBit * kMeanOrbitPeriod)) {
        std::ostringstream os;
        os << "BitMessage: bit_duration " << bit_duration << " shorter than " << kMinOrbitsPerBit
           << " mean orbit periods (" << kMinOrbitsPerBit * kMeanOrbitPeriod << ")";
        throw InvalidArgument(os.str());
    }
}

BitMessage random_bits(std::size_t n, double bit_duration, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    BitMessage msg;
    msg.bit_duration = bit_duration;
    msg.bits.reserve(n);
    for (std::size_t i = 0; i < n; ++i) msg.bits.push_back(static_cast<int>(rng() >> 63));
    return msg;
}

BitMessage balanced_bits(std::size_t n, double bit_duration, std::uint64_t seed) {
    BitMessage msg;
    msg.bit_duration = bit_duration;
    msg.bits.assign(n, 0);
    std::fill(msg.bits.begin() + static_cast<std::ptrdiff_t>(n / 2), msg.bits.end(), 1);
    std::mt19937_64 rng(seed);
    std::shuffle(msg.bits.begin(), msg.bits.end(), rng);
    return msg;
}

// ---------------------------------------------------------------------------
// Decision engines

void TimeScaling::validate() const {
    check_scaling(lambda0);
    check_scaling(lambda1);
    if (lambda0 == lambda1) throw InvalidArgument("TimeScaling: lambda0 and lambda1 must differ");
}

void validate_engine(const DecisionEngine &engine) {
    if (const auto *e = std::get_if<TwoRegion>(&engine)) {
        check_unit(e->v);
    } else if (const auto *e = std::get_if<EvenOdd>(&engine)) {
        check_unit(e->v);
        if (!(e->h > 0.0) || !std::isfinite(e->h)) throw InvalidArgument("EvenOdd: h must be > 0");
    } else if (const auto *e = std::get_if<EightSection>(&engine)) {
        if (!(e->theta > 0.0) || !std::isfinite(e->theta)) throw InvalidArgument("EightSection: theta must be > 0");
        if (!std::isfinite(e->x3_threshold)) throw InvalidArgument("EightSection: x3_threshold must be finite");
    }
}

int delta_two_region(const StateVec &s, const StateVec &v) { return v.dot(s) >= 0.0 ? 1 : 0; }

int delta_even_odd(const StateVec &s, const StateVec &v, double h) {
    const double cell = std::floor(v.dot(s) / h);
    return std::fmod(std::abs(cell), 2.0) == 1.0 ? 1 : 0;
}

int delta_eight_section(const StateVec &s, const EightSection &e) {
    const int dz = s.x3 >= e.x3_threshold ? 1 : 0;
    // x2 == 0 falls in the inner-high band.
    if (s.x2 < -e.theta) return dz;
    if (s.x2 < 0.0) return 1 - dz;
    if (s.x2 < e.theta) return dz;
    return 1 - dz;
}

int decide(const DecisionEngine &engine, const StateVec &s) {
    return std::visit(
        [&s](const auto &e) -> int {
            using E = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<E, TwoRegion>) {
                return delta_two_region(s, e.v);
            } else if constexpr (std::is_same_v<E, EvenOdd>) {
                return delta_even_odd(s, e.v, e.h);
            } else {
                return delta_eight_section(s, e);
            }
        },
        engine);
}

EightSection calibrate_eight_section(const ChuaParams &p, const StateVec &s0, double dt, double horizon) {
    const auto n = static_cast<std::size_t>(std::llround(horizon / dt));
    const auto traj = integrate(p, s0, dt, n);
    const std::size_t skip = horizon > kDefaultTransient ? static_cast<std::size_t>(kDefaultTransient / dt) : 0;
    const auto x2 = traj.component(1);
    const auto x3 = traj.component(2);
    const std::span<const double> x2s(x2.begin() + static_cast<std::ptrdiff_t>(skip), x2.end());
    const std::span<const double> x3s(x3.begin() + static_cast<std::ptrdiff_t>(skip), x3.end());
    return {0.5 * rms(x2s), rms(x3s)};
}

double lambda_select(int delta, int m_bit, const TimeScaling &ts) {
    const int index = delta == 0 ? m_bit : 1 - m_bit;
    return index == 0 ? ts.lambda0 : ts.lambda1;
}

// ---------------------------------------------------------------------------
// Drive synchronization and masking

StateVec observer_gain(const ChuaParams &p) {
    p.validate();
    constexpr double a = 2.0;
    const double omega2 = p.beta - 0.25;
    const double fast = 1.0 + p.sigma - 2.0 * a;
    if (!(omega2 > 0.0) || !(fast > 0.0)) throw InvalidArgument("observer_gain: need beta > 1/4 and sigma > 3");
    // Characteristic polynomial s^3 + (1 + sigma) s^2 + c1 s + c0 of the error matrix
    // [[-sigma, sigma, 0], [-l2, -1, 1], [-l3, -beta, 0]].
    const double c1 = (a * a + omega2) + 2.0 * a * fast;
    const double c0 = fast * (a * a + omega2);
    return {0.0, (c1 - p.beta - p.sigma) / p.sigma, (c0 - p.sigma * p.beta) / p.sigma};
}

MaskedTransmission transmit_masked(const AnalogMessage &msg, const ChuaParams &p, const StateVec &s0) {
    p.validate();
    if (msg.samples.size() < 2) throw InvalidArgument("transmit_masked: message needs at least two samples");
    if (!(msg.dt > 0.0)) throw InvalidArgument("transmit_masked: message dt must be > 0");
    check_bounded(s0, 0.0);

    const StateVec gain = observer_gain(p);
    const std::span<const double> m(msg.samples);
    const std::size_t n = m.size();

    MaskedTransmission out;
    out.tx.dt = msg.dt;
    out.tx.states.reserve(n);
    out.ciphertext.reserve(n);
    StateVec x = s0;
    for (std::size_t k = 0;; ++k) {
        out.tx.states.push_back(x);
        out.ciphertext.push_back(x.x1 + m[k]);
        if (k + 1 == n) break;
        x = staged_rk4(x, msg.dt, [&](const StateVec &s, int stage) {
            return drive_field(s, s.x1 + stage_value(m, k, stage), p, gain);
        });
        check_bounded(x, msg.dt * static_cast<double>(k + 1));
    }
    out.outside_masking_regime = msg.amplitude > kMaskingAmplitudeLimit * rms(out.tx.component(0));
    return out;
}

MaskedReception receive_masked(std::span<const double> ciphertext, const ChuaParams &p, const StateVec &r0,
                               double dt) {
    p.validate();
    if (ciphertext.size() < 2) throw InvalidArgument("receive_masked: need at least two samples");
    if (!(dt > 0.0)) throw InvalidArgument("receive_masked: dt must be > 0");
    check_bounded(r0, 0.0);

    const StateVec gain = observer_gain(p);
    const std::size_t n = ciphertext.size();
    MaskedReception out;
    out.rx.dt = dt;
    out.rx.states.reserve(n);
    out.recovered.reserve(n);
    StateVec z = r0;
    for (std::size_t k = 0;; ++k) {
        out.rx.states.push_back(z);
        out.recovered.push_back(ciphertext[k] - z.x1);
        if (k + 1 == n) break;
        z = staged_rk4(z, dt, [&](const StateVec &s, int stage) {
            return drive_field(s, stage_value(ciphertext, k, stage), p, gain);
        });
        check_bounded(z, dt * static_cast<double>(k + 1));
    }
    return out;
}

double sync_error(const Trajectory &tx, const Trajectory &rx, double transient) {
    if (tx.size() != rx.size() || tx.dt != rx.dt) throw ShapeMismatchError("sync_error: trajectories differ in shape");
    const auto skip = static_cast<std::size_t>(std::ceil(transient / tx.dt - 1e-9));
    if (skip >= tx.size()) throw InvalidArgument("sync_error: transient covers the whole trajectory");
    double acc = 0.0;
    for (std::size_t k = skip; k < tx.size(); ++k) {
        const StateVec d = tx.states[k] - rx.states[k];
        acc += d.dot(d);
    }
    return std::sqrt(acc / static_cast<double>(tx.size() - skip));
}

double recovery_nmse(std::span<const double> recovered, const AnalogMessage &msg) {
    const auto skip = static_cast<std::size_t>(std::llround(kSyncTransient / msg.dt));
    return normalized_mse(recovered, msg.samples, skip, kRecoverySmoothing);
}

// ---------------------------------------------------------------------------
// Shift keying

std::vector<double> csk_modulate(const BitMessage &msg, const ChuaParams &p0, const ChuaParams &p1, double dt,
                                 const StateVec &s0) {
    msg.validate();
    p0.validate();
    p1.validate();
    if (p0 == p1) throw InvalidArgument("csk_modulate: p0 and p1 must differ");
    if (msg.bits.empty()) throw InvalidArgument("csk_modulate: empty message");
    const std::size_t spb = samples_per_bit(msg.bit_duration, dt);
    const std::size_t n = msg.bits.size() * spb;

    std::vector<double> x1;
    x1.reserve(n);
    StateVec s = s0;
    for (std::size_t k = 0;; ++k) {
        x1.push_back(s.x1);
        if (k + 1 == n) break;
        const ChuaParams &p = msg.bits[k / spb] ? p1 : p0;
        s = rk4_step(s, dt, [&p](const StateVec &x) { return chua_deriv(x, p); });
        check_bounded(s, dt * static_cast<double>(k + 1));
    }
    return x1;
}

ChuaParams csk_alternate(const ChuaParams &p) {
    ChuaParams q = p;
    q.sigma *= 1.1;
    return q;
}

TscskSignal tscsk_transmit(const BitMessage &msg, const ChuaParams &p, const TimeScaling &ts,
                           const DecisionEngine &engine, double dt_tau, const StateVec &s0) {
    msg.validate();
    p.validate();
    check_scaling(ts.lambda0);
    check_scaling(ts.lambda1);
    validate_engine(engine);
    if (msg.bits.empty()) throw InvalidArgument("tscsk_transmit: empty message");
    const std::size_t spb = samples_per_bit(msg.bit_duration, dt_tau);
    const std::size_t n = msg.bits.size() * spb;

    TscskSignal out;
    out.tx.dt = dt_tau;
    out.tx.states.reserve(n);
    out.signal.reserve(n);
    out.scaled_time.reserve(n);
    StateVec s = s0;
    double t = 0.0;
    const auto field = [&p](const StateVec &x, int) { return chua_deriv(x, p); };
    for (std::size_t k = 0;; ++k) {
        out.tx.states.push_back(s);
        out.signal.push_back(s.x1);
        out.scaled_time.push_back(t);
        if (k + 1 == n) break;
        const int bit = msg.bits[k / spb];
        double lam_sum = 0.0;
        int stage = 0;
        const auto lam = [&](const StateVec &x) {
            const double l = lambda_select(decide(engine, x), bit, ts);
            lam_sum += (stage == 0 || stage == 3) ? l : 2.0 * l;
            ++stage;
            return l;
        };
        s = scaled_step(s, dt_tau, lam, field);
        t += dt_tau / 6.0 * lam_sum;
        check_bounded(s, dt_tau * static_cast<double>(k + 1));
    }
    out.tx.scaled_time = out.scaled_time;
    return out;
}

TscskDecode tscsk_receive(std::span<const double> signal, const ChuaParams &p, const TimeScaling &ts,
                          const DecisionEngine &engine, double bit_duration, double dt_tau, const StateVec &r0,
                          const TscskDecoderOptions &opts) {
    p.validate();
    check_scaling(ts.lambda0);
    check_scaling(ts.lambda1);
    validate_engine(engine);
    const std::size_t spb = samples_per_bit(bit_duration, dt_tau);
    const std::size_t windows = signal.size() / spb;
    if (opts.preamble_bits == 0 || windows < opts.preamble_bits) {
        throw InvalidArgument("tscsk_receive: preamble too short (need at least one known zero bit in the signal)");
    }
    if (signal.size() % spb != 0) throw ShapeMismatchError("tscsk_receive: signal is not a whole number of bits");
    if (!(opts.guard_fraction >= 0.0 && opts.guard_fraction < 1.0)) {
        throw InvalidArgument("tscsk_receive: guard_fraction must lie in [0, 1)");
    }

    const StateVec gain = observer_gain(p);
    const auto guard = static_cast<std::size_t>(opts.guard_fraction * static_cast<double>(spb));
    std::vector<double> sq(windows, 0.0);
    StateVec z = r0;
    const auto lam = [&](const StateVec &x) { return lambda_select(decide(engine, x), 0, ts); };
    for (std::size_t k = 0; k < signal.size(); ++k) {
        if (k % spb >= guard) {
            const double e = signal[k] - z.x1;
            sq[k / spb] += e * e;
        }
        if (k + 1 == signal.size()) break;
        z = scaled_step(z, dt_tau, lam, [&](const StateVec &x, int stage) {
            return drive_field(x, stage_value(signal, k, stage), p, gain);
        });
        check_bounded(z, dt_tau * static_cast<double>(k + 1));
    }

    TscskDecode out;
    out.window_error.reserve(windows);
    for (double s : sq) out.window_error.push_back(std::sqrt(s / static_cast<double>(spb - guard)));
    double preamble_max = 0.0;
    for (std::size_t w = 0; w < opts.preamble_bits; ++w) preamble_max = std::max(preamble_max, out.window_error[w]);
    out.threshold = opts.threshold_factor * std::max(preamble_max, opts.threshold_floor);
    for (double e : out.window_error) out.bits.push_back(e > out.threshold ? 1 : 0);
    return out;
}

// ---------------------------------------------------------------------------
// Channel, retune, locking

void ChannelModel::validate() const {
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw InvalidArgument("ChannelModel: noise_sigma must be >= 0");
    if (jammer) {
        if (!(jammer->power >= 0.0)) throw InvalidArgument("Jammer: power must be >= 0");
        if (!(jammer->bandwidth > 0.0)) throw InvalidArgument("Jammer: bandwidth must be > 0");
        if (!(jammer->center_freq >= 0.0)) throw InvalidArgument("Jammer: center_freq must be >= 0");
    }
}

std::vector<double> channel_apply(std::span<const double> signal, double dt, const ChannelModel &ch) {
    ch.validate();
    if (!(dt > 0.0)) throw InvalidArgument("channel_apply: dt must be > 0");
    std::vector<double> out(signal.begin(), signal.end());
    const std::size_t n = out.size();

    if (ch.noise_sigma > 0.0) {
        std::mt19937_64 rng(ch.seed);
        std::normal_distribution<double> gauss(0.0, ch.noise_sigma);
        for (double &v : out) v += gauss(rng);
    }

    if (ch.jammer && ch.jammer->power > 0.0 && n > 1) {
        const Jammer &j = *ch.jammer;
        std::mt19937_64 rng(ch.seed ^ 0x9e3779b97f4a7c15ULL);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> white(n);
        for (double &v : white) v = gauss(rng);
        auto spectrum = detail::rfft(white);
        const double df = 1.0 / (static_cast<double>(n) * dt);
        std::size_t kept = 0;
        for (std::size_t b = 0; b < spectrum.size(); ++b) {
            if (std::abs(static_cast<double>(b) * df - j.center_freq) > 0.5 * j.bandwidth || b == 0) {
                spectrum[b] = 0.0;
            } else {
                ++kept;
            }
        }
        if (kept == 0) throw InvalidArgument("channel_apply: jammer band contains no frequency bins");
        const auto burst = detail::irfft(spectrum, n);
        const double gain = std::sqrt(j.power) / rms(burst);
        for (std::size_t k = 0; k < n; ++k) out[k] += gain * burst[k];
    }
    return out;
}

ChuaParams retune_frequency(const ChuaParams &p, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("retune_frequency: scale must be > 0");
    ChuaParams q = p;
    q.time_scale *= scale;
    return q;
}

LockResult lock_check(const MemristorKey &key, std::span<const MemristorParams> mps, const ChuaParams &base,
                      const AnalogMessage &probe, const StateVec &s0, const StateVec &r0) {
    const auto tx_params = effective_params(apply_key(nominal_key(mps, key.tolerance), mps), mps, base);
    const auto rx_params = effective_params(apply_key(key, mps), mps, base);
    const auto tx = transmit_masked(probe, tx_params, s0);
    const auto rx = receive_masked(tx.ciphertext, rx_params, r0, probe.dt);
    LockResult out;
    out.nmse = recovery_nmse(rx.recovered, probe);
    if (std::isnan(out.nmse)) throw InvalidArgument("lock_check: probe message has no power after the transient");
    out.pass = out.nmse < kLockNmseLimit;
    return out;
}

}  // namespace chaoscomm

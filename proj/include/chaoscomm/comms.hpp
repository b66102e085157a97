#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "chaoscomm/dynamics.hpp"
#include "chaoscomm/memristor.hpp"

namespace chaoscomm {

// =============================================================================
// Messages
// =============================================================================

/// Sampled analog plaintext. `amplitude` is the peak magnitude.
struct AnalogMessage {
    std::vector<double> samples;
    double dt{1e-3};
    double amplitude{0.0};
};

/// Messages above this fraction of the carrier RMS are flagged as outside the
/// masking regime (the carrier no longer hides them).
inline constexpr double kMaskingAmplitudeLimit = 0.05;

/// Receiver settling time excluded from recovery metrics.
inline constexpr double kSyncTransient = 10.0;

/// Moving-average window applied to the recovered message before scoring.
inline constexpr std::size_t kRecoverySmoothing = 5;

/// RMS of x1 over a free run of n steps from s0.
[[nodiscard]] double carrier_rms(const ChuaParams &p, const StateVec &s0, double dt, std::size_t n);

/// Rectangular pulse of height `amplitude` on [start, start + width) over n samples.
[[nodiscard]] AnalogMessage make_pulse(double amplitude, double start, double width, double dt, std::size_t n);

struct BitMessage {
    std::vector<int> bits;
    double bit_duration{60.0};

    /// Throws unless every bit is 0 or 1 and bit_duration is at least
    /// kMinOrbitsPerBit mean orbit periods.
    void validate() const;
};

/// Mean time between successive maxima of x1 on the canonical attractor.
inline constexpr double kMeanOrbitPeriod = 1.65;
inline constexpr double kMinOrbitsPerBit = 20.0;

/// Uniform random bits from a seeded mt19937_64 (top bit of each draw).
[[nodiscard]] BitMessage random_bits(std::size_t n, double bit_duration, std::uint64_t seed);

/// Seeded shuffle of n / 2 zeros and n - n / 2 ones. With equal class sizes a
/// decoder that carries no information scores 0.5 whatever it outputs.
[[nodiscard]] BitMessage balanced_bits(std::size_t n, double bit_duration, std::uint64_t seed);

// =============================================================================
// Time scaling and decision engines
// =============================================================================

struct TimeScaling {
    double lambda0{1.0};
    double lambda1{1.3};

    void validate() const;
};

/// delta = 1 when v . x >= 0.
struct TwoRegion {
    StateVec v{1.0, 0.0, 0.0};
};

/// delta = parity of floor(v . x / h), floor taken toward -inf.
struct EvenOdd {
    StateVec v{1.0, 0.0, 0.0};
    double h{1.0};
};

/// Four bands of x2 split at -theta, 0, +theta. The outer-low and inner-high
/// bands return dz = [x3 >= x3_threshold]; the other two return 1 - dz.
struct EightSection {
    double theta{0.088};
    double x3_threshold{1.79};
};

using DecisionEngine = std::variant<TwoRegion, EvenOdd, EightSection>;

void validate_engine(const DecisionEngine &engine);

[[nodiscard]] int delta_two_region(const StateVec &s, const StateVec &v);
[[nodiscard]] int delta_even_odd(const StateVec &s, const StateVec &v, double h);
[[nodiscard]] int delta_eight_section(const StateVec &s, const EightSection &e);
[[nodiscard]] int decide(const DecisionEngine &engine, const StateVec &s);

/// Eight-section thresholds measured on an unmodulated run: theta = RMS(x2) / 2
/// and x3_threshold = RMS(x3).
[[nodiscard]] EightSection calibrate_eight_section(const ChuaParams &p, const StateVec &s0 = {0.1, 0.0, 0.0},
                                                   double dt = 1e-3, double horizon = 200.0);

/// lambda0 or lambda1, indexed by m_bit when delta is 0 and by 1 - m_bit when delta is 1.
[[nodiscard]] double lambda_select(int delta, int m_bit, const TimeScaling &ts);

// =============================================================================
// Drive synchronization
// =============================================================================

/// Output-injection gain (0, l2, l3) that places the poles of the linearized
/// drive-error dynamics at -(1 + sigma - 2a) and -a +- i sqrt(beta - 1/4), a = 2.
/// Without it the error decays at the rate of the slowest receiver mode (~0.5).
[[nodiscard]] StateVec observer_gain(const ChuaParams &p);

/// Receiver copy of the oscillator driven by u in place of its own first
/// state, plus the injection term gain * (u - z1). With u == z1 this is
/// exactly chua_deriv(z).
[[nodiscard]] constexpr StateVec drive_field(const StateVec &z, double u, const ChuaParams &p,
                                             const StateVec &gain) {
    const double k = p.time_scale;
    const double e = u - z.x1;
    return {k * (p.sigma * (z.x2 - z.x1 - nonlinearity(u, p)) + gain.x1 * e),
            k * (u - z.x2 + z.x3 + gain.x2 * e),
            k * (-p.beta * z.x2 + gain.x3 * e)};
}

// =============================================================================
// Chaotic masking
// =============================================================================

struct MaskedTransmission {
    std::vector<double> ciphertext;
    Trajectory tx;  // for tests only; never part of the channel
    bool outside_masking_regime{false};
};

/// ciphertext[k] = x1[k] + msg[k]. The transmitter runs the same driven field
/// as the receiver with u = x1 + m, so it reduces to the free oscillator when
/// the message is zero.
[[nodiscard]] MaskedTransmission transmit_masked(const AnalogMessage &msg, const ChuaParams &p,
                                                 const StateVec &s0 = {0.1, 0.0, 0.0});

struct MaskedReception {
    std::vector<double> recovered;
    Trajectory rx;
};

/// recovered[k] = ciphertext[k] - z1[k]. The drive is linearly interpolated at
/// RK4 half steps.
[[nodiscard]] MaskedReception receive_masked(std::span<const double> ciphertext, const ChuaParams &p,
                                             const StateVec &r0 = {}, double dt = 1e-3);

/// RMS of |tx - rx| over samples at times >= transient.
[[nodiscard]] double sync_error(const Trajectory &tx, const Trajectory &rx, double transient);

/// Normalized MSE of a recovered message using kSyncTransient and kRecoverySmoothing.
[[nodiscard]] double recovery_nmse(std::span<const double> recovered, const AnalogMessage &msg);

// =============================================================================
// Shift keying
// =============================================================================

/// Parameter-switching CSK: p0 for 0-bits, p1 for 1-bits, state carried across
/// windows. Returns x1 at bits.size() * round(bit_duration / dt) samples.
[[nodiscard]] std::vector<double> csk_modulate(const BitMessage &msg, const ChuaParams &p0, const ChuaParams &p1,
                                               double dt = 1e-3, const StateVec &s0 = {0.1, 0.0, 0.0});

/// Default parameter-switching partner: sigma raised by 10%.
[[nodiscard]] ChuaParams csk_alternate(const ChuaParams &p);

struct TscskSignal {
    std::vector<double> signal;       // x1 on the channel clock
    std::vector<double> scaled_time;  // accumulated orbit time per sample
    Trajectory tx;
};

/// Time-scaling CSK transmitter. Bit windows are measured on the channel
/// clock tau (sample index * dt_tau), one bit per round(bit_duration / dt_tau)
/// samples.
[[nodiscard]] TscskSignal tscsk_transmit(const BitMessage &msg, const ChuaParams &p, const TimeScaling &ts,
                                         const DecisionEngine &engine, double dt_tau = 1e-3,
                                         const StateVec &s0 = {0.1, 0.0, 0.0});

struct TscskDecoderOptions {
    std::size_t preamble_bits{2};
    double threshold_factor{10.0};
    double threshold_floor{1e-6};
    double guard_fraction{0.1};
};

struct TscskDecode {
    std::vector<int> bits;  // includes the preamble
    std::vector<double> window_error;
    double threshold{0.0};
};

/// Receiver copy run with lambda(z, 0) and driven by the received x1. Each
/// window's RMS drive error (after a guard interval) is compared against
/// threshold_factor times the largest preamble error; larger means bit 1.
[[nodiscard]] TscskDecode tscsk_receive(std::span<const double> signal, const ChuaParams &p, const TimeScaling &ts,
                                        const DecisionEngine &engine, double bit_duration, double dt_tau = 1e-3,
                                        const StateVec &r0 = {}, const TscskDecoderOptions &opts = {});

// =============================================================================
// Channel, retune, locking
// =============================================================================

/// Band-limited Gaussian noise occupying [center - bandwidth/2, center + bandwidth/2]
/// (cycles per time unit) with mean power `power`.
struct Jammer {
    double center_freq{0.0};
    double bandwidth{0.0};
    double power{0.0};
};

struct ChannelModel {
    double noise_sigma{0.0};
    std::optional<Jammer> jammer;
    std::uint64_t seed{1};

    void validate() const;
};

[[nodiscard]] std::vector<double> channel_apply(std::span<const double> signal, double dt, const ChannelModel &ch);

/// Same attractor traversed `scale` times faster.
[[nodiscard]] ChuaParams retune_frequency(const ChuaParams &p, double scale);

struct LockResult {
    bool pass{false};
    double nmse{0.0};
};

inline constexpr double kLockNmseLimit = 0.05;

/// Masks `probe` with the nominally keyed oscillator and decrypts it with a
/// receiver programmed by `key`.
[[nodiscard]] LockResult lock_check(const MemristorKey &key, std::span<const MemristorParams> mps,
                                    const ChuaParams &base, const AnalogMessage &probe,
                                    const StateVec &s0 = {0.1, 0.0, 0.0}, const StateVec &r0 = {});

}  // namespace chaoscomm

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chaoscomm/comms.hpp"
#include "chaoscomm/dynamics.hpp"

namespace chaoscomm {

// =============================================================================
// Return-map attack
// =============================================================================

struct Extremum {
    std::size_t index{0};
    double value{0.0};
};

struct Extrema {
    std::vector<Extremum> maxima;
    std::vector<Extremum> minima;
};

/// Minimum swing (signal units) between a confirmed extremum and the next one.
inline constexpr double kDefaultHysteresis = 0.1;

/// Turning points of `signal`: a candidate extremum is confirmed once the
/// signal has moved `hysteresis` away from it in the other direction, so the
/// output alternates strictly. The first sample is never reported.
/// Throws InsufficientDataError for fewer than 3 samples.
[[nodiscard]] Extrema extract_extrema(std::span<const double> signal, double hysteresis = kDefaultHysteresis);

/// Pairs of (maximum A, following minimum B) mapped to ((A + B) / 2, A - B).
struct ReturnMapPoints {
    std::vector<double> maxima;
    std::vector<double> minima;
    std::vector<std::array<double, 2>> points;
    std::vector<std::size_t> window_index;  // index of the maximum / window_samples
};

/// Throws InsufficientDataError when no maximum is followed by a minimum.
[[nodiscard]] ReturnMapPoints build_return_map(const Extrema &ex, std::size_t window_samples);

struct AttackReport {
    std::string attack;
    std::vector<int> truth;
    std::vector<int> recovered_bits;
    std::vector<std::array<double, 2>> window_features;
    double accuracy{0.0};      // best over label inversion, so >= 0.5
    double separability{0.0};  // true-class centroid distance / mean distance to own centroid
    std::vector<std::pair<std::string, std::string>> metadata;
};

/// Ciphertext-only attack. Each bit window is summarized by the mean of A - B
/// and the mean of |(A + B) / 2| over its return-map points (the absolute value
/// folds the two scrolls together). Features are standardized and split by a
/// deterministic 2-means seeded with the two most distant windows.
/// Throws InsufficientDataError if any window has no return-map point.
[[nodiscard]] AttackReport rm_attack(std::span<const double> signal, double dt, double bit_duration,
                                     std::span<const int> truth, double hysteresis = kDefaultHysteresis);

// =============================================================================
// Power side channel
// =============================================================================

struct PowerTrace {
    std::vector<double> samples;
    double dt{1e-3};
};

/// Per-sample sum over components of |x_i * dx_i/dt| under p.
[[nodiscard]] PowerTrace power_proxy(const Trajectory &traj, const ChuaParams &p);

/// Pearson correlation between the trace (resampled onto the message grid)
/// and the message.
[[nodiscard]] double sidechannel_correlation(const PowerTrace &trace, const AnalogMessage &msg);

// =============================================================================
// Known-plaintext replay
// =============================================================================

enum class KpaPipeline { Masking, Tscsk };

struct KpaConfig {
    KpaPipeline pipeline{KpaPipeline::Masking};
    ChuaParams p{};
    StateVec s0{0.1, 0.0, 0.0};
    /// Trial i starts from s0 + i * delta * (1, 1, 1).
    double delta{1e-6};
    /// Ciphertexts are compared over [horizon, horizon + window).
    double horizon{100.0};
    double window{50.0};
    /// Replay counts as defeated when every pairwise distance exceeds this
    /// fraction of the carrier RMS.
    double floor{0.1};
    double dt{1e-3};
    /// Masking plaintext level for a 1 bit, as a fraction of carrier RMS.
    double amplitude_fraction{0.01};
    TimeScaling ts{};
    DecisionEngine engine{TwoRegion{}};
};

struct KpaReport {
    std::vector<double> pairwise_distance;  // normalized by carrier RMS, row-major over i < j
    double min_distance{0.0};
    bool replay_defeated{false};
    std::optional<AttackReport> pooled_attack;  // TS-CSK only: RM attack on all trials
};

/// Encrypts the same plaintext n_trials times from perturbed initial states.
/// The masking pipeline renders the bits as a level message cycling through
/// the bit sequence.
[[nodiscard]] KpaReport kpa_harness(const BitMessage &bits, const KpaConfig &cfg, std::size_t n_trials);

// =============================================================================
// Jamming and retreat
// =============================================================================

struct JamConfig {
    /// Baseline carrier. time_scale places it in a band 20-100x the message frequency.
    ChuaParams carrier{15.6, 28.0, -1.143, -0.714, 1.0, 40.0};
    double dt{6.25e-6};
    double horizon{40.0};
    double pulse_start{20.0};
    double pulse_width{5.0};
    double amplitude_fraction{0.01};
    /// Receiver low-pass applied to the recovered message.
    double lowpass_cutoff{2.5};
    StateVec s0{0.1, 0.0, 0.0};
    StateVec r0{};
};

struct JamReport {
    double nmse_pre{0.0};
    double nmse_post{0.0};
    double freq_pre{0.0};
    double freq_post{0.0};
    double message_freq{0.0};  // 1 / (2 * pulse width)
};

/// Masked pulse through the jammed channel on the baseline carrier, then again
/// with both ends retuned by `scale`.
[[nodiscard]] JamReport jam_and_retreat(const JamConfig &cfg, const ChannelModel &ch, double scale);

}  // namespace chaoscomm

#include "chaoscomm/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chaoscomm/signal.hpp"

namespace chaoscomm {

namespace {

using Feature = std::array<double, 2>;

double distance(const Feature &a, const Feature &b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

Feature centroid(std::span<const Feature> xs, std::span<const int> labels, int which) {
    Feature c{0.0, 0.0};
    std::size_t count = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (labels[i] != which) continue;
        c[0] += xs[i][0];
        c[1] += xs[i][1];
        ++count;
    }
    if (count > 0) {
        c[0] /= static_cast<double>(count);
        c[1] /= static_cast<double>(count);
    }
    return c;
}

void standardize(std::vector<Feature> &xs) {
    for (int d = 0; d < 2; ++d) {
        double m = 0.0;
        for (const auto &x : xs) m += x[d];
        m /= static_cast<double>(xs.size());
        double v = 0.0;
        for (const auto &x : xs) v += (x[d] - m) * (x[d] - m);
        const double sd = std::sqrt(v / static_cast<double>(xs.size()));
        for (auto &x : xs) x[d] = sd > 0.0 ? (x[d] - m) / sd : 0.0;
    }
}

// Deterministic 2-means seeded with the most distant pair (ties: lowest indices).
std::vector<int> two_means(std::span<const Feature> xs) {
    std::size_t ia = 0;
    std::size_t ib = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            if (const double d = distance(xs[i], xs[j]); d > best) {
                best = d;
                ia = i;
                ib = j;
            }
        }
    }
    Feature c0 = xs[ia];
    Feature c1 = xs[ib];
    std::vector<int> labels(xs.size(), -1);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const int l = distance(xs[i], c1) < distance(xs[i], c0) ? 1 : 0;
            changed |= l != labels[i];
            labels[i] = l;
        }
        if (!changed) break;
        c0 = centroid(xs, labels, 0);
        c1 = centroid(xs, labels, 1);
    }
    return labels;
}

double separability(std::span<const Feature> xs, std::span<const int> truth) {
    const auto n1 = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), 1));
    if (n1 == 0 || n1 == truth.size()) return 0.0;
    const Feature c0 = centroid(xs, truth, 0);
    const Feature c1 = centroid(xs, truth, 1);
    double spread = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) spread += distance(xs[i], truth[i] ? c1 : c0);
    spread /= static_cast<double>(xs.size());
    if (spread == 0.0) return std::numeric_limits<double>::infinity();
    return distance(c0, c1) / spread;
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

Extrema extract_extrema(std::span<const double> signal, double hysteresis) {
    if (signal.size() < 3) throw InsufficientDataError("extract_extrema: need at least 3 samples");
    if (!(hysteresis > 0.0)) throw InvalidArgument("extract_extrema: hysteresis must be > 0");

    Extrema out;
    int dir = 0;  // +1 climbing toward a maximum, -1 falling toward a minimum
    std::size_t hi = 0;
    std::size_t lo = 0;
    std::size_t cand = 0;
    for (std::size_t i = 1; i < signal.size(); ++i) {
        const double x = signal[i];
        if (dir == 0) {
            if (x > signal[hi]) hi = i;
            if (x < signal[lo]) lo = i;
            if (x >= signal[lo] + hysteresis) {
                if (lo > 0) out.minima.push_back({lo, signal[lo]});
                dir = 1;
                cand = i;
            } else if (x <= signal[hi] - hysteresis) {
                if (hi > 0) out.maxima.push_back({hi, signal[hi]});
                dir = -1;
                cand = i;
            }
        } else if (dir == 1) {
            if (x > signal[cand]) {
                cand = i;
            } else if (x <= signal[cand] - hysteresis) {
                out.maxima.push_back({cand, signal[cand]});
                dir = -1;
                cand = i;
            }
        } else {
            if (x < signal[cand]) {
                cand = i;
            } else if (x >= signal[cand] + hysteresis) {
                out.minima.push_back({cand, signal[cand]});
                dir = 1;
                cand = i;
            }
        }
    }
    return out;
}

ReturnMapPoints build_return_map(const Extrema &ex, std::size_t window_samples) {
    if (window_samples == 0) throw InvalidArgument("build_return_map: window_samples must be > 0");
    ReturnMapPoints rm;
    std::size_t j = 0;
    for (const auto &mx : ex.maxima) {
        while (j < ex.minima.size() && ex.minima[j].index <= mx.index) ++j;
        if (j == ex.minima.size()) break;
        const double a = mx.value;
        const double b = ex.minima[j].value;
        rm.maxima.push_back(a);
        rm.minima.push_back(b);
        rm.points.push_back({0.5 * (a + b), a - b});
        rm.window_index.push_back(mx.index / window_samples);
        ++j;
    }
    if (rm.points.empty()) throw InsufficientDataError("build_return_map: no maximum/minimum pair");
    return rm;
}

AttackReport rm_attack(std::span<const double> signal, double dt, double bit_duration, std::span<const int> truth,
                       double hysteresis) {
    if (!(dt > 0.0) || !(bit_duration > 0.0)) throw InvalidArgument("rm_attack: need dt > 0, bit_duration > 0");
    const auto spb = static_cast<std::size_t>(std::llround(bit_duration / dt));
    const std::size_t n_bits = truth.size();
    if (n_bits < 2) throw InvalidArgument("rm_attack: need at least two bits");
    if (signal.size() < n_bits * spb) throw ShapeMismatchError("rm_attack: signal shorter than n_bits windows");

    const auto rm = build_return_map(extract_extrema(signal.first(n_bits * spb), hysteresis), spb);
    std::vector<Feature> feats(n_bits, Feature{0.0, 0.0});
    std::vector<std::size_t> counts(n_bits, 0);
    for (std::size_t i = 0; i < rm.points.size(); ++i) {
        const std::size_t w = rm.window_index[i];
        feats[w][0] += rm.points[i][1];
        feats[w][1] += std::abs(rm.points[i][0]);
        ++counts[w];
    }
    for (std::size_t w = 0; w < n_bits; ++w) {
        if (counts[w] == 0) {
            throw InsufficientDataError("rm_attack: bit window " + std::to_string(w) + " has no return-map point");
        }
        feats[w][0] /= static_cast<double>(counts[w]);
        feats[w][1] /= static_cast<double>(counts[w]);
    }

    AttackReport report;
    report.attack = "return_map";
    report.truth.assign(truth.begin(), truth.end());
    report.window_features = feats;
    standardize(feats);
    report.recovered_bits = two_means(feats);
    std::size_t agree = 0;
    for (std::size_t w = 0; w < n_bits; ++w) agree += report.recovered_bits[w] == truth[w] ? 1 : 0;
    const double acc = static_cast<double>(agree) / static_cast<double>(n_bits);
    report.accuracy = std::max(acc, 1.0 - acc);
    report.separability = separability(feats, truth);
    report.metadata = {{"bit_duration", num(bit_duration)},
                       {"dt", num(dt)},
                       {"hysteresis", num(hysteresis)},
                       {"n_bits", std::to_string(n_bits)},
                       {"points", std::to_string(rm.points.size())}};
    return report;
}

PowerTrace power_proxy(const Trajectory &traj, const ChuaParams &p) {
    PowerTrace out{{}, traj.dt};
    out.samples.reserve(traj.size());
    for (const auto &s : traj.states) {
        const StateVec d = chua_deriv(s, p);
        out.samples.push_back(std::abs(s.x1 * d.x1) + std::abs(s.x2 * d.x2) + std::abs(s.x3 * d.x3));
    }
    return out;
}

double sidechannel_correlation(const PowerTrace &trace, const AnalogMessage &msg) {
    if (trace.samples.empty() || msg.samples.empty()) throw InvalidArgument("sidechannel_correlation: empty input");
    if (trace.dt == msg.dt && trace.samples.size() == msg.samples.size()) return pearson(trace.samples, msg.samples);
    const auto resampled = resample_linear(trace.samples, trace.dt, msg.dt, msg.samples.size());
    return pearson(resampled, msg.samples);
}

KpaReport kpa_harness(const BitMessage &bits, const KpaConfig &cfg, std::size_t n_trials) {
    if (n_trials < 2) throw InvalidArgument("kpa_harness: need at least two trials");
    if (!(cfg.delta >= 0.0) || !(cfg.horizon >= 0.0) || !(cfg.window > 0.0) || !(cfg.dt > 0.0)) {
        throw InvalidArgument("kpa_harness: need delta >= 0, horizon >= 0, window > 0, dt > 0");
    }
    bits.validate();
    if (bits.bits.empty()) throw InvalidArgument("kpa_harness: empty plaintext");

    const auto skip = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
    const auto n_mask = static_cast<std::size_t>(std::llround((cfg.horizon + cfg.window) / cfg.dt)) + 1;
    const double level = cfg.pipeline == KpaPipeline::Masking
                             ? cfg.amplitude_fraction * carrier_rms(cfg.p, cfg.s0, cfg.dt, n_mask)
                             : 0.0;
    std::vector<std::vector<double>> cts;
    std::vector<int> pooled_truth;
    for (std::size_t i = 0; i < n_trials; ++i) {
        const double off = static_cast<double>(i) * cfg.delta;
        const StateVec s0 = cfg.s0 + StateVec{off, off, off};
        if (cfg.pipeline == KpaPipeline::Masking) {
            AnalogMessage msg{std::vector<double>(n_mask), cfg.dt, level};
            for (std::size_t k = 0; k < n_mask; ++k) {
                const auto w = static_cast<std::size_t>(cfg.dt * static_cast<double>(k) / bits.bit_duration);
                msg.samples[k] = level * bits.bits[w % bits.bits.size()];
            }
            cts.push_back(transmit_masked(msg, cfg.p, s0).ciphertext);
        } else {
            cts.push_back(tscsk_transmit(bits, cfg.p, cfg.ts, cfg.engine, cfg.dt, s0).signal);
            pooled_truth.insert(pooled_truth.end(), bits.bits.begin(), bits.bits.end());
        }
        if (cts.back().size() <= skip) throw InvalidArgument("kpa_harness: plaintext ends before the horizon");
    }

    const std::span<const double> ref(cts[0]);
    const double scale = rms(ref.subspan(skip));
    KpaReport out;
    out.min_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_trials; ++i) {
        for (std::size_t j = i + 1; j < n_trials; ++j) {
            double acc = 0.0;
            for (std::size_t k = skip; k < cts[i].size(); ++k) acc += (cts[i][k] - cts[j][k]) * (cts[i][k] - cts[j][k]);
            const double d = std::sqrt(acc / static_cast<double>(cts[i].size() - skip)) / scale;
            out.pairwise_distance.push_back(d);
            out.min_distance = std::min(out.min_distance, d);
        }
    }
    out.replay_defeated = out.min_distance > cfg.floor;

    if (cfg.pipeline == KpaPipeline::Tscsk) {
        std::vector<double> pooled;
        for (const auto &c : cts) pooled.insert(pooled.end(), c.begin(), c.end());
        out.pooled_attack = rm_attack(pooled, cfg.dt, bits.bit_duration, pooled_truth);
        out.pooled_attack->attack = "return_map_pooled_kpa";
    }
    return out;
}

JamReport jam_and_retreat(const JamConfig &cfg, const ChannelModel &ch, double scale) {
    cfg.carrier.validate();
    if (!(cfg.dt > 0.0) || !(cfg.horizon > kSyncTransient) || !(cfg.pulse_width > 0.0)) {
        throw InvalidArgument("jam_and_retreat: need dt > 0, horizon > sync transient, pulse_width > 0");
    }
    const auto n = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt)) + 1;

    // RMS depends only on orbit geometry, so measure it on the unscaled carrier.
    ChuaParams unit = cfg.carrier;
    unit.time_scale = 1.0;
    const double orbit_time = cfg.horizon * cfg.carrier.time_scale;
    const double amp =
        cfg.amplitude_fraction * carrier_rms(unit, cfg.s0, 1e-3, static_cast<std::size_t>(orbit_time / 1e-3));
    const auto msg = make_pulse(amp, cfg.pulse_start, cfg.pulse_width, cfg.dt, n);

    JamReport out;
    out.message_freq = 0.5 / cfg.pulse_width;
    for (int pass = 0; pass < 2; ++pass) {
        const ChuaParams p = pass == 0 ? cfg.carrier : retune_frequency(cfg.carrier, scale);
        const auto tx = transmit_masked(msg, p, cfg.s0);
        const auto received = channel_apply(tx.ciphertext, cfg.dt, ch);
        const auto rx = receive_masked(received, p, cfg.r0, cfg.dt);
        const double nmse = recovery_nmse(lowpass(rx.recovered, cfg.dt, cfg.lowpass_cutoff), msg);
        const double freq = dominant_frequency(tx.tx.component(0), cfg.dt);
        (pass == 0 ? out.nmse_pre : out.nmse_post) = nmse;
        (pass == 0 ? out.freq_pre : out.freq_post) = freq;
    }
    return out;
}

}  // namespace chaoscomm

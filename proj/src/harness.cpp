#include "chaoscomm/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "chaoscomm/attacks.hpp"
#include "chaoscomm/comms.hpp"
#include "chaoscomm/dynamics.hpp"
#include "chaoscomm/memristor.hpp"
#include "chaoscomm/signal.hpp"

namespace chaoscomm {

namespace {

// ---------------------------------------------------------------------------
// Key tables

enum class Kind { Real, Positive, NonNegative, Count, Vec3, UnitVec3, Choice, RealList, AutoPositive, AutoReal };

struct KeySpec {
    std::string def;
    Kind kind;
    std::string owner;
    std::vector<std::string> choices{};
};

using SpecTable = std::map<std::string, KeySpec>;

const SpecTable &common_keys() {
    static const SpecTable t{
        {"sigma", {"15.6", Kind::Positive, "ChuaParams"}},
        {"beta", {"28", Kind::Positive, "ChuaParams"}},
        {"m0", {"-1.143", Kind::Real, "ChuaParams"}},
        {"m1", {"-0.714", Kind::Real, "ChuaParams"}},
        {"b", {"1", Kind::Positive, "ChuaParams"}},
        {"dt", {"0.001", Kind::Positive, "integrator"}},
        {"s0", {"0.1, 0, 0", Kind::Vec3, "StateVec"}},
    };
    return t;
}

SpecTable pulse_keys() {
    return {
        {"horizon", {"200", Kind::Positive, "experiment"}},
        {"amplitude_fraction", {"0.01", Kind::NonNegative, "AnalogMessage"}},
        {"pulse_start", {"20", Kind::NonNegative, "AnalogMessage"}},
        {"pulse_width", {"5", Kind::Positive, "AnalogMessage"}},
        {"r0", {"0, 0, 0", Kind::Vec3, "StateVec"}},
    };
}

SpecTable tscsk_keys() {
    return {
        {"n_bits", {"64", Kind::Count, "BitMessage"}},
        {"bit_duration", {"60", Kind::Positive, "BitMessage"}},
        {"lambda0", {"1", Kind::Positive, "TimeScaling"}},
        {"lambda1", {"1.3", Kind::Positive, "TimeScaling"}},
        {"engine", {"two_region", Kind::Choice, "DecisionEngine", {"two_region", "even_odd", "eight_section"}}},
        {"v", {"1, 0, 0", Kind::UnitVec3, "DecisionEngine"}},
        {"h", {"1", Kind::Positive, "DecisionEngine"}},
        {"theta", {"auto", Kind::AutoPositive, "DecisionEngine"}},
        {"x3_threshold", {"auto", Kind::AutoReal, "DecisionEngine"}},
    };
}

SpecTable spec_for(const std::string &experiment) {
    SpecTable t = common_keys();
    auto add = [&t](const SpecTable &more) {
        for (const auto &[k, v] : more) t.insert_or_assign(k, v);
    };
    if (experiment == "simulate") {
        add({{"horizon", {"200", Kind::Positive, "experiment"}},
             {"transient", {"50", Kind::NonNegative, "experiment"}}});
    } else if (experiment == "mask" || experiment == "attack-power") {
        add(pulse_keys());
    } else if (experiment == "tscsk") {
        add(tscsk_keys());
        add({{"r0", {"0, 0, 0", Kind::Vec3, "StateVec"}}});
    } else if (experiment == "attack-rm") {
        add(tscsk_keys());
        add({{"target", {"both", Kind::Choice, "experiment", {"csk", "tscsk", "both"}}},
             {"csk_sigma_factor", {"1.1", Kind::Positive, "ChuaParams"}},
             {"csk_beta_factor", {"1", Kind::Positive, "ChuaParams"}},
             {"hysteresis", {"0.1", Kind::Positive, "extrema"}}});
    } else if (experiment == "attack-kpa") {
        add(tscsk_keys());
        add({{"pipeline", {"both", Kind::Choice, "experiment", {"masking", "tscsk", "both"}}},
             {"n_bits", {"8", Kind::Count, "BitMessage"}},
             {"n_trials", {"4", Kind::Count, "experiment"}},
             {"delta", {"1e-6", Kind::NonNegative, "experiment"}},
             {"horizon", {"100", Kind::NonNegative, "experiment"}},
             {"window", {"50", Kind::Positive, "experiment"}},
             {"floor", {"0.1", Kind::Positive, "experiment"}},
             {"amplitude_fraction", {"0.01", Kind::NonNegative, "AnalogMessage"}}});
    } else if (experiment == "retune") {
        add({{"dt", {"6.25e-6", Kind::Positive, "integrator"}},
             {"carrier_scale", {"40", Kind::Positive, "ChuaParams"}},
             {"scale", {"4", Kind::Positive, "retune"}},
             {"horizon", {"40", Kind::Positive, "experiment"}},
             {"amplitude_fraction", {"0.01", Kind::NonNegative, "AnalogMessage"}},
             {"pulse_start", {"20", Kind::NonNegative, "AnalogMessage"}},
             {"pulse_width", {"5", Kind::Positive, "AnalogMessage"}},
             {"lowpass_cutoff", {"2.5", Kind::Positive, "receiver"}},
             {"r0", {"0, 0, 0", Kind::Vec3, "StateVec"}},
             {"noise_sigma", {"0", Kind::NonNegative, "ChannelModel"}},
             {"jam_center", {"5.5", Kind::NonNegative, "ChannelModel"}},
             {"jam_bandwidth", {"4", Kind::Positive, "ChannelModel"}},
             {"jam_power", {"0.0045", Kind::NonNegative, "ChannelModel"}}});
    } else if (experiment == "lock") {
        add(pulse_keys());
        add({{"n_elements", {"2", Kind::Count, "MemristorKey"}},
             {"tolerance", {"0.05", Kind::Positive, "MemristorKey"}},
             {"key_errors", {"-0.3, -0.2, -0.1, -0.05, -0.02, 0", Kind::RealList, "MemristorKey"}},
             {"lyapunov_horizon", {"200", Kind::Positive, "experiment"}}});
    } else if (experiment == "stability") {
        add({{"grid_fraction", {"0.05", Kind::NonNegative, "experiment"}},
             {"grid_points", {"3", Kind::Count, "experiment"}},
             {"lyapunov_horizon", {"200", Kind::Positive, "experiment"}}});
    } else {
        throw ConfigError({"unknown experiment '" + experiment + "'"});
    }
    return t;
}

// ---------------------------------------------------------------------------
// Value parsing

std::string trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

std::optional<double> to_real(std::string_view s) {
    const std::string t = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<std::uint64_t> to_count(std::string_view s) {
    const std::string t = trim(s);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) return std::nullopt;
    return v;
}

std::optional<std::vector<double>> to_list(std::string_view s) {
    std::vector<double> out;
    std::string item;
    std::istringstream in{std::string(s)};
    while (std::getline(in, item, ',')) {
        const auto v = to_real(item);
        if (!v) return std::nullopt;
        out.push_back(*v);
    }
    if (out.empty()) return std::nullopt;
    return out;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

// Returns an error message, or an empty string when the value is acceptable.
std::string check_value(const std::string &key, const std::string &value, const KeySpec &spec) {
    auto bad = [&](const std::string &what) {
        return key + " " + what + " (" + spec.owner + " invariant), got '" + value + "'";
    };
    switch (spec.kind) {
        case Kind::Real:
            return to_real(value) ? "" : bad("must be a finite number");
        case Kind::Positive: {
            const auto v = to_real(value);
            return v && *v > 0.0 ? "" : bad("must be > 0");
        }
        case Kind::NonNegative: {
            const auto v = to_real(value);
            return v && *v >= 0.0 ? "" : bad("must be >= 0");
        }
        case Kind::Count: {
            const auto v = to_count(value);
            return v && *v > 0 ? "" : bad("must be a positive integer");
        }
        case Kind::Vec3:
        case Kind::UnitVec3: {
            const auto v = to_list(value);
            if (!v || v->size() != 3) return bad("must be three comma-separated numbers");
            if (spec.kind == Kind::UnitVec3) {
                const double n = std::sqrt((*v)[0] * (*v)[0] + (*v)[1] * (*v)[1] + (*v)[2] * (*v)[2]);
                if (std::abs(n - 1.0) > 1e-9) return bad("must have unit norm");
            }
            return "";
        }
        case Kind::Choice: {
            if (std::find(spec.choices.begin(), spec.choices.end(), value) != spec.choices.end()) return "";
            std::string opts;
            for (const auto &c : spec.choices) opts += (opts.empty() ? "" : "|") + c;
            return bad("must be one of " + opts);
        }
        case Kind::RealList:
            return to_list(value) ? "" : bad("must be a comma-separated list of numbers");
        case Kind::AutoPositive: {
            if (value == "auto") return "";
            const auto v = to_real(value);
            return v && *v > 0.0 ? "" : bad("must be 'auto' or > 0");
        }
        case Kind::AutoReal:
            return value == "auto" || to_real(value) ? "" : bad("must be 'auto' or a finite number");
    }
    return "";
}

struct Entry {
    std::string key;
    std::string value;
    std::string where;
};

ExperimentConfig build_config(const std::vector<Entry> &entries, std::vector<std::string> errors) {
    std::map<std::string, const Entry *> by_key;
    for (const auto &e : entries) {
        if (const auto it = by_key.find(e.key); it != by_key.end()) {
            errors.push_back(e.where + ": duplicate key '" + e.key + "' (first set at " + it->second->where + ")");
            continue;
        }
        by_key[e.key] = &e;
    }

    ExperimentConfig cfg;
    const auto exp_it = by_key.find("experiment");
    if (exp_it == by_key.end()) {
        errors.insert(errors.begin(), "experiment key required");
        throw ConfigError(std::move(errors));
    }
    cfg.experiment = exp_it->second->value;
    const auto &names = experiment_names();
    if (std::find(names.begin(), names.end(), cfg.experiment) == names.end()) {
        std::string opts;
        for (const auto &n : names) opts += (opts.empty() ? "" : "|") + n;
        errors.push_back(exp_it->second->where + ": unknown experiment '" + cfg.experiment + "' (expected " + opts +
                         ")");
        throw ConfigError(std::move(errors));
    }

    const SpecTable spec = spec_for(cfg.experiment);
    for (const auto &[k, s] : spec) cfg.params[k] = s.def;
    for (const auto &[key, e] : by_key) {
        if (key == "experiment") continue;
        if (key == "seed") {
            if (const auto v = to_count(e->value)) {
                cfg.seed = *v;
            } else if (trim(e->value) == "0") {
                cfg.seed = 0;
            } else {
                errors.push_back(e->where + ": seed must be a non-negative integer, got '" + e->value + "'");
            }
            continue;
        }
        if (key == "output_dir") {
            cfg.output_dir = e->value;
            continue;
        }
        const auto it = spec.find(key);
        if (it == spec.end()) {
            errors.push_back(e->where + ": unknown key '" + key + "' for experiment '" + cfg.experiment + "'");
            continue;
        }
        if (auto msg = check_value(key, e->value, it->second); !msg.empty()) {
            errors.push_back(e->where + ": " + msg);
            continue;
        }
        cfg.params[key] = e->value;
    }

    // Invariants spanning several keys.
    auto where = [&by_key](const std::string &k) {
        const auto it = by_key.find(k);
        return it == by_key.end() ? std::string("default") : it->second->where;
    };
    if (spec.count("lambda0") && cfg.params["lambda0"] == cfg.params["lambda1"]) {
        const auto a = to_real(cfg.params["lambda0"]);
        const auto b = to_real(cfg.params["lambda1"]);
        if (a && b && *a == *b) {
            errors.push_back(where("lambda1") + ": lambda1 must differ from lambda0 (TimeScaling invariant)");
        }
    }
    if (spec.count("bit_duration")) {
        const auto bd = to_real(cfg.params["bit_duration"]);
        if (bd && *bd < kMinOrbitsPerBit * kMeanOrbitPeriod) {
            errors.push_back(where("bit_duration") + ": bit_duration must be >= " +
                             fmt(kMinOrbitsPerBit * kMeanOrbitPeriod) + " (BitMessage invariant)");
        }
    }
    if (spec.count("n_bits") && cfg.experiment != "tscsk") {
        const auto n = to_count(cfg.params["n_bits"]);
        if (n && *n < 2) errors.push_back(where("n_bits") + ": n_bits must be >= 2 for attacks");
    }
    if (cfg.experiment == "attack-kpa") {
        const auto n = to_count(cfg.params["n_trials"]);
        if (n && *n < 2) errors.push_back(where("n_trials") + ": n_trials must be >= 2");
    }
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return cfg;
}

// ---------------------------------------------------------------------------
// Typed access to validated params

double real(const ExperimentConfig &c, const std::string &k) { return *to_real(c.params.at(k)); }
std::size_t count(const ExperimentConfig &c, const std::string &k) {
    return static_cast<std::size_t>(*to_count(c.params.at(k)));
}
StateVec vec3(const ExperimentConfig &c, const std::string &k) {
    const auto v = *to_list(c.params.at(k));
    return {v[0], v[1], v[2]};
}
const std::string &text(const ExperimentConfig &c, const std::string &k) { return c.params.at(k); }

ChuaParams chua(const ExperimentConfig &c) {
    ChuaParams p;
    p.sigma = real(c, "sigma");
    p.beta = real(c, "beta");
    p.m0 = real(c, "m0");
    p.m1 = real(c, "m1");
    p.b = real(c, "b");
    return p;
}

// Benettin estimates on periodic windows scatter around zero by about 0.02 at
// a 200-unit horizon, so chaos is claimed only above this floor.
constexpr double kChaosLyapunovFloor = 0.05;

std::size_t steps(double horizon, double dt) { return static_cast<std::size_t>(std::llround(horizon / dt)); }

// ---------------------------------------------------------------------------
// Artifact output

class Artifacts {
public:
    explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void write(const std::string &name, const std::function<void(std::ostream &)> &body) {
        std::filesystem::create_directories(dir_);
        const auto final_path = dir_ / name;
        const auto tmp = dir_ / (name + ".tmp");
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error("cannot open " + tmp.string() + " for writing");
            body(out);
            out.flush();
            if (!out) {
                std::error_code ec;
                std::filesystem::remove(tmp, ec);
                throw Error("write failed for " + tmp.string());
            }
        }
        std::filesystem::rename(tmp, final_path);
        files_.push_back(final_path);
    }

    void rollback() {
        std::error_code ec;
        for (const auto &f : files_) std::filesystem::remove(f, ec);
        files_.clear();
    }

    [[nodiscard]] const std::vector<std::filesystem::path> &files() const { return files_; }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> files_;
};

void write_signal(std::ostream &out, std::span<const double> v, double dt) {
    out << "t,value\n";
    for (std::size_t k = 0; k < v.size(); ++k) out << fmt(dt * static_cast<double>(k)) << ',' << fmt(v[k]) << '\n';
}

void write_bits(std::ostream &out, std::span<const int> truth, std::span<const int> recovered,
                std::span<const double> error) {
    out << "bit_index,truth,recovered,window_error\n";
    for (std::size_t i = 0; i < truth.size(); ++i) {
        out << i << ',' << truth[i] << ',' << recovered[i] << ',' << fmt(error[i]) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Experiments

struct Context {
    const ExperimentConfig &cfg;
    RunReport &report;
    Artifacts &art;

    void metric(const std::string &k, double v) const { report.metrics.emplace_back(k, fmt(v)); }
    void metric(const std::string &k, const std::string &v) const { report.metrics.emplace_back(k, v); }
    void verdict(int criterion, const std::string &name, bool pass, const std::string &detail) const {
        report.verdicts.push_back({criterion, name, pass, detail});
    }
};

AnalogMessage pulse_message(const ExperimentConfig &c, const ChuaParams &p, std::size_t n) {
    const double dt = real(c, "dt");
    const double amp = real(c, "amplitude_fraction") * carrier_rms(p, vec3(c, "s0"), dt, n - 1);
    return make_pulse(amp, real(c, "pulse_start"), real(c, "pulse_width"), dt, n);
}

void run_simulate(const Context &ctx) {
    const auto &c = ctx.cfg;
    const ChuaParams p = chua(c);
    const double dt = real(c, "dt");
    const auto traj = integrate(p, vec3(c, "s0"), dt, steps(real(c, "horizon"), dt));
    ctx.art.write("trajectory.csv", [&](std::ostream &out) {
        out << "t,x1,x2,x3\n";
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const auto &s = traj.states[k];
            out << fmt(traj.time_at(k)) << ',' << fmt(s.x1) << ',' << fmt(s.x2) << ',' << fmt(s.x3) << '\n';
        }
    });
    const auto x1 = traj.component(0);
    const std::size_t skip = std::min(x1.size(), steps(real(c, "transient"), dt));
    const auto switches = scroll_switches(std::span<const double>(x1).subspan(skip), p.b);
    bool all_unstable = true;
    const auto eq = equilibria(p);
    for (std::size_t i = 0; i < eq.size(); ++i) {
        const double e = max_real_eig(jacobian(eq[i], p));
        all_unstable &= e > 0.0;
        ctx.metric("max_real_eig_" + std::to_string(i), e);
    }
    const bool double_scroll = switches >= 10 && all_unstable && eq.size() == 3;
    ctx.metric("rows", static_cast<double>(traj.size()));
    ctx.metric("scroll_switches", static_cast<double>(switches));
    ctx.metric("double_scroll", double_scroll ? "true" : "false");
    ctx.verdict(1, "double_scroll", double_scroll,
                std::to_string(switches) + " scroll switches, all equilibria unstable: " +
                    (all_unstable ? "yes" : "no"));
}

void run_mask(const Context &ctx, bool power) {
    const auto &c = ctx.cfg;
    const ChuaParams p = chua(c);
    const double dt = real(c, "dt");
    const std::size_t n = steps(real(c, "horizon"), dt) + 1;
    const auto msg = pulse_message(c, p, n);
    const auto tx = transmit_masked(msg, p, vec3(c, "s0"));
    if (tx.outside_masking_regime) {
        ctx.report.notes.push_back("message amplitude exceeds 5% of carrier RMS; carrier no longer hides it");
    }
    const bool silent = msg.amplitude == 0.0;

    if (power) {
        const auto trace = power_proxy(tx.tx, p);
        ctx.art.write("power.csv", [&](std::ostream &out) { write_signal(out, trace.samples, trace.dt); });
        ctx.metric("power_mean", mean(trace.samples));
        if (silent) {
            ctx.metric("correlation", std::numeric_limits<double>::quiet_NaN());
            ctx.report.notes.push_back("message is identically zero; correlation undefined");
            return;
        }
        const double r = sidechannel_correlation(trace, msg);
        ctx.metric("correlation", r);
        ctx.verdict(7, "power_sidechannel", std::abs(r) < 0.1, "|r| = " + fmt(std::abs(r)) + " (limit 0.1)");
        return;
    }

    const auto rx = receive_masked(tx.ciphertext, p, vec3(c, "r0"), dt);
    ctx.art.write("original.csv", [&](std::ostream &out) { write_signal(out, msg.samples, dt); });
    ctx.art.write("encrypted.csv", [&](std::ostream &out) { write_signal(out, tx.ciphertext, dt); });
    ctx.art.write("decrypted.csv", [&](std::ostream &out) { write_signal(out, rx.recovered, dt); });
    const double nmse = recovery_nmse(rx.recovered, msg);
    ctx.metric("nmse", nmse);
    ctx.metric("sync_error", sync_error(tx.tx, rx.rx, kSyncTransient));
    if (silent) {
        ctx.metric("correlation", std::numeric_limits<double>::quiet_NaN());
        ctx.report.notes.push_back("message is identically zero; NMSE and correlation are undefined (nan)");
        return;
    }
    const double r = pearson(tx.ciphertext, msg.samples);
    ctx.metric("correlation", r);
    ctx.verdict(3, "masking_round_trip", nmse < 0.05 && std::abs(r) < 0.2,
                "nmse = " + fmt(nmse) + " (limit 0.05), |r| = " + fmt(std::abs(r)) + " (limit 0.2)");
}

DecisionEngine engine_from(const ExperimentConfig &c, const std::string &variant, const ChuaParams &p) {
    if (variant == "two_region") return TwoRegion{vec3(c, "v")};
    if (variant == "even_odd") return EvenOdd{vec3(c, "v"), real(c, "h")};
    EightSection e = calibrate_eight_section(p, vec3(c, "s0"), real(c, "dt"));
    if (text(c, "theta") != "auto") e.theta = real(c, "theta");
    if (text(c, "x3_threshold") != "auto") e.x3_threshold = real(c, "x3_threshold");
    return e;
}

TimeScaling scaling_from(const ExperimentConfig &c) { return {real(c, "lambda0"), real(c, "lambda1")}; }

// A unit vector orthogonal to v.
StateVec orthogonal(const StateVec &v) {
    const StateVec axis = std::abs(v.x1) < 0.9 ? StateVec{1.0, 0.0, 0.0} : StateVec{0.0, 1.0, 0.0};
    StateVec w{v.x2 * axis.x3 - v.x3 * axis.x2, v.x3 * axis.x1 - v.x1 * axis.x3, v.x1 * axis.x2 - v.x2 * axis.x1};
    return (1.0 / w.norm()) * w;
}

double payload_accuracy(std::span<const int> truth, std::span<const int> decoded) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) ok += truth[i] == decoded[i] ? 1 : 0;
    return static_cast<double>(ok) / static_cast<double>(truth.size());
}

void run_tscsk(const Context &ctx) {
    const auto &c = ctx.cfg;
    const ChuaParams p = chua(c);
    const double dt = real(c, "dt");
    const double bd = real(c, "bit_duration");
    const TimeScaling ts = scaling_from(c);
    const std::string variant = text(c, "engine");
    const DecisionEngine engine = engine_from(c, variant, p);

    const TscskDecoderOptions opts;
    const auto payload = balanced_bits(count(c, "n_bits"), bd, c.seed);
    BitMessage framed{std::vector<int>(opts.preamble_bits, 0), bd};
    framed.bits.insert(framed.bits.end(), payload.bits.begin(), payload.bits.end());
    const auto sig = tscsk_transmit(framed, p, ts, engine, dt, vec3(c, "s0"));

    const StateVec r0 = vec3(c, "r0");
    auto decode = [&](const TimeScaling &rts, const DecisionEngine &reng) {
        auto d = tscsk_receive(sig.signal, p, rts, reng, bd, dt, r0, opts);
        d.bits.erase(d.bits.begin(), d.bits.begin() + static_cast<std::ptrdiff_t>(opts.preamble_bits));
        d.window_error.erase(d.window_error.begin(),
                             d.window_error.begin() + static_cast<std::ptrdiff_t>(opts.preamble_bits));
        return d;
    };

    const auto matched = decode(ts, engine);
    const double acc = payload_accuracy(payload.bits, matched.bits);
    ctx.art.write("bits.csv", [&](std::ostream &out) {
        write_bits(out, payload.bits, matched.bits, matched.window_error);
    });
    ctx.metric("accuracy", acc);
    ctx.metric("threshold", matched.threshold);

    // Receivers holding one wrong secret component.
    std::vector<std::pair<std::string, std::pair<TimeScaling, DecisionEngine>>> wrong;
    const double ratio = ts.lambda1 / ts.lambda0;
    if (variant != "eight_section") {
        DecisionEngine rotated = engine;
        std::visit(
            [](auto &e) {
                if constexpr (!std::is_same_v<std::decay_t<decltype(e)>, EightSection>) e.v = orthogonal(e.v);
            },
            rotated);
        wrong.push_back({"wrong_vector", {ts, rotated}});
    }
    wrong.push_back({"ratio_plus_10", {{ts.lambda0, ts.lambda0 * ratio * 1.1}, engine}});
    wrong.push_back({"ratio_minus_10", {{ts.lambda0, ts.lambda0 * ratio * 0.9}, engine}});
    for (const std::string other : {"two_region", "even_odd", "eight_section"}) {
        if (other != variant) wrong.push_back({"variant_" + other, {ts, engine_from(c, other, p)}});
    }
    const double n = static_cast<double>(payload.bits.size());
    const double band = 1.96 * std::sqrt(0.25 / n);
    bool chance_all = true;
    std::string worst;
    for (const auto &[name, secret] : wrong) {
        const auto d = decode(secret.first, secret.second);
        const double a = payload_accuracy(payload.bits, d.bits);
        ctx.metric("accuracy_" + name, a);
        const bool chance = std::abs(a - 0.5) <= band;
        chance_all &= chance;
        if (!chance) worst += (worst.empty() ? "" : ", ") + name + "=" + fmt(a);
    }
    ctx.verdict(4, "tscsk_round_trip", acc >= 0.95, "accuracy " + fmt(acc) + " (need >= 0.95)");
    ctx.verdict(4, "tscsk_secret_sensitivity", chance_all,
                chance_all ? "all wrong-secret receivers within 0.5 +- " + fmt(band)
                           : "outside 0.5 +- " + fmt(band) + ": " + worst);
}

void write_attack(Artifacts &art, const std::string &name, const AttackReport &rep) {
    art.write(name, [&](std::ostream &out) {
        out << "bit_index,truth,recovered,mean_amplitude,mean_center\n";
        for (std::size_t i = 0; i < rep.truth.size(); ++i) {
            out << i << ',' << rep.truth[i] << ',' << rep.recovered_bits[i] << ',' << fmt(rep.window_features[i][0])
                << ',' << fmt(rep.window_features[i][1]) << '\n';
        }
    });
}

void run_attack_rm(const Context &ctx) {
    const auto &c = ctx.cfg;
    const ChuaParams p = chua(c);
    const double dt = real(c, "dt");
    const double bd = real(c, "bit_duration");
    const double hyst = real(c, "hysteresis");
    const auto bits = balanced_bits(count(c, "n_bits"), bd, c.seed);
    const std::string target = text(c, "target");

    std::optional<AttackReport> csk;
    std::optional<AttackReport> ts;
    if (target != "tscsk") {
        ChuaParams p1 = p;
        p1.sigma *= real(c, "csk_sigma_factor");
        p1.beta *= real(c, "csk_beta_factor");
        const auto sig = csk_modulate(bits, p, p1, dt, vec3(c, "s0"));
        csk = rm_attack(sig, dt, bd, bits.bits, hyst);
        write_attack(ctx.art, "attack_csk.csv", *csk);
        ctx.metric("csk_accuracy", csk->accuracy);
        ctx.metric("csk_separability", csk->separability);
        ctx.verdict(5, "rm_attack_breaks_csk", csk->accuracy >= 0.9 && csk->separability > 1.0,
                    "accuracy " + fmt(csk->accuracy) + " (need >= 0.9), separability " + fmt(csk->separability) +
                        " (need > 1)");
    }
    if (target != "csk") {
        const auto engine = engine_from(c, text(c, "engine"), p);
        const auto sig = tscsk_transmit(bits, p, scaling_from(c), engine, dt, vec3(c, "s0"));
        ts = rm_attack(sig.signal, dt, bd, bits.bits, hyst);
        write_attack(ctx.art, "attack_tscsk.csv", *ts);
        ctx.metric("tscsk_accuracy", ts->accuracy);
        ctx.metric("tscsk_separability", ts->separability);
        ctx.verdict(5, "rm_attack_fails_on_tscsk", ts->accuracy <= 0.6 && ts->separability < 0.5,
                    "accuracy " + fmt(ts->accuracy) + " (need <= 0.6), separability " + fmt(ts->separability) +
                        " (need < 0.5)");
    }
    if (csk && ts) ctx.metric("accuracy_gap", csk->accuracy - ts->accuracy);
}

void run_attack_kpa(const Context &ctx) {
    const auto &c = ctx.cfg;
    KpaConfig k;
    k.p = chua(c);
    k.s0 = vec3(c, "s0");
    k.delta = real(c, "delta");
    k.horizon = real(c, "horizon");
    k.window = real(c, "window");
    k.floor = real(c, "floor");
    k.dt = real(c, "dt");
    k.amplitude_fraction = real(c, "amplitude_fraction");
    k.ts = scaling_from(c);
    k.engine = engine_from(c, text(c, "engine"), k.p);
    const auto bits = balanced_bits(count(c, "n_bits"), real(c, "bit_duration"), c.seed);
    const auto trials = count(c, "n_trials");
    const std::string pipeline = text(c, "pipeline");

    std::ostringstream rows;
    rows << "pipeline,trial_i,trial_j,distance\n";
    auto record = [&](const std::string &name, const KpaReport &rep) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < trials; ++i) {
            for (std::size_t j = i + 1; j < trials; ++j) {
                rows << name << ',' << i << ',' << j << ',' << fmt(rep.pairwise_distance[idx++]) << '\n';
            }
        }
        ctx.metric(name + "_min_distance", rep.min_distance);
    };

    for (const std::string name : {"masking", "tscsk"}) {
        if (pipeline != "both" && pipeline != name) continue;
        k.pipeline = name == "masking" ? KpaPipeline::Masking : KpaPipeline::Tscsk;
        const auto rep = kpa_harness(bits, k, trials);
        record(name, rep);
        ctx.verdict(10, name + "_replay_diverges", rep.replay_defeated,
                    "min pairwise distance " + fmt(rep.min_distance) + " of carrier RMS (floor " + fmt(k.floor) +
                        ")");
        if (rep.pooled_attack) {
            ctx.metric("tscsk_pooled_rm_accuracy", rep.pooled_attack->accuracy);
            ctx.verdict(10, "tscsk_pooled_rm_attack", rep.pooled_attack->accuracy <= 0.6,
                        "accuracy " + fmt(rep.pooled_attack->accuracy) + " (need <= 0.6)");
        }
        if (name == "masking") {
            KpaConfig exact = k;
            exact.delta = 0.0;
            const auto replay = kpa_harness(bits, exact, 2);
            ctx.metric("masking_exact_replay_distance", replay.min_distance);
            ctx.verdict(10, "exact_replay_reproduces", replay.min_distance == 0.0,
                        "distance " + fmt(replay.min_distance) + " with identical initial states");
        }
    }
    const std::string body = rows.str();
    ctx.art.write("kpa_pairs.csv", [&](std::ostream &out) { out << body; });
}

void run_retune(const Context &ctx) {
    const auto &c = ctx.cfg;
    JamConfig j;
    j.carrier = chua(c);
    j.carrier.time_scale = real(c, "carrier_scale");
    j.dt = real(c, "dt");
    j.horizon = real(c, "horizon");
    j.pulse_start = real(c, "pulse_start");
    j.pulse_width = real(c, "pulse_width");
    j.amplitude_fraction = real(c, "amplitude_fraction");
    j.lowpass_cutoff = real(c, "lowpass_cutoff");
    j.s0 = vec3(c, "s0");
    j.r0 = vec3(c, "r0");
    ChannelModel ch;
    ch.noise_sigma = real(c, "noise_sigma");
    ch.seed = c.seed;
    ch.jammer = Jammer{real(c, "jam_center"), real(c, "jam_bandwidth"), real(c, "jam_power")};
    const double scale = real(c, "scale");
    const auto rep = jam_and_retreat(j, ch, scale);

    ctx.metric("nmse_pre", rep.nmse_pre);
    ctx.metric("nmse_post", rep.nmse_post);
    ctx.metric("freq_pre", rep.freq_pre);
    ctx.metric("freq_post", rep.freq_post);
    ctx.metric("ratio_pre", rep.freq_pre / rep.message_freq);
    ctx.metric("ratio_post", rep.freq_post / rep.message_freq);
    ctx.art.write("retune.csv", [&](std::ostream &out) {
        out << "phase,time_scale,nmse,dominant_freq,carrier_to_message\n";
        out << "pre," << fmt(j.carrier.time_scale) << ',' << fmt(rep.nmse_pre) << ',' << fmt(rep.freq_pre) << ','
            << fmt(rep.freq_pre / rep.message_freq) << '\n';
        out << "post," << fmt(j.carrier.time_scale * scale) << ',' << fmt(rep.nmse_post) << ','
            << fmt(rep.freq_post) << ',' << fmt(rep.freq_post / rep.message_freq) << '\n';
    });
    const double shift = rep.freq_post / rep.freq_pre;
    ctx.verdict(8, "jam_breaks_baseline", rep.nmse_pre > 0.2, "nmse_pre " + fmt(rep.nmse_pre) + " (need > 0.2)");
    ctx.verdict(8, "retreat_restores", rep.nmse_post < 0.05, "nmse_post " + fmt(rep.nmse_post) + " (need < 0.05)");
    ctx.verdict(8, "frequency_shift", std::abs(shift - scale) <= 0.25 * scale,
                "post/pre frequency " + fmt(shift) + " (need " + fmt(scale) + " +- 25%)");
}

void run_lock(const Context &ctx) {
    const auto &c = ctx.cfg;
    const ChuaParams base = chua(c);
    const double dt = real(c, "dt");
    const std::vector<MemristorParams> mps(count(c, "n_elements"), MemristorParams::reference());
    const double tol = real(c, "tolerance");
    const std::size_t n = steps(real(c, "horizon"), dt) + 1;
    const auto probe = pulse_message(c, base, n);
    const StateVec s0 = vec3(c, "s0");
    const StateVec r0 = vec3(c, "r0");

    std::ostringstream rows;
    rows << "element,key_error,target,nmse,pass\n";
    bool nominal_pass = true;
    bool far_fail = true;
    bool near_pass = true;
    const std::vector<double> key_errors = *to_list(text(c, "key_errors"));
    for (std::size_t k = 0; k < mps.size(); ++k) {
        for (double e : key_errors) {
            MemristorKey key = nominal_key(mps, tol);
            key.targets[k] = mps[k].r_init * (1.0 + e);
            if (key.targets[k] < mps[k].r_on || key.targets[k] > mps[k].r_off) {
                rows << k << ',' << fmt(e) << ',' << fmt(key.targets[k]) << ",nan,unprogrammable\n";
                continue;
            }
            const auto res = lock_check(key, mps, base, probe, s0, r0);
            rows << k << ',' << fmt(e) << ',' << fmt(key.targets[k]) << ',' << fmt(res.nmse) << ','
                 << (res.pass ? "true" : "false") << '\n';
            if (e == 0.0) nominal_pass &= res.pass;
            if (std::abs(e) >= 0.2) far_fail &= !res.pass && res.nmse > 0.5;
            if (std::abs(e) <= 0.05 + 1e-12) near_pass &= res.pass;
        }
    }
    const std::string body = rows.str();
    ctx.art.write("lock_curve.csv", [&](std::ostream &out) { out << body; });

    // Chaos across the programmable +-5% key grid.
    std::ostringstream grid;
    grid << "target_0,target_1,sigma,beta,lyapunov\n";
    double min_lyap = std::numeric_limits<double>::infinity();
    for (double e0 : {-0.05, 0.0, 0.05}) {
        for (double e1 : {-0.05, 0.0, 0.05}) {
            MemristorKey key = nominal_key(mps, tol);
            key.targets[0] = mps[0].r_init * (1.0 + e0);
            if (mps.size() > 1) key.targets[1] = mps[1].r_init * (1.0 + e1);
            bool ok = true;
            for (std::size_t k = 0; k < mps.size(); ++k) {
                ok &= key.targets[k] >= mps[k].r_on && key.targets[k] <= mps[k].r_off;
            }
            if (!ok) continue;
            const auto p = effective_params(apply_key(key, mps), mps, base);
            const double lyap = lyapunov_max(p, real(c, "lyapunov_horizon"), dt, s0);
            min_lyap = std::min(min_lyap, lyap);
            grid << fmt(key.targets[0]) << ',' << fmt(mps.size() > 1 ? key.targets[1] : 0.0) << ',' << fmt(p.sigma)
                 << ',' << fmt(p.beta) << ',' << fmt(lyap) << '\n';
        }
    }
    const std::string grid_body = grid.str();
    ctx.art.write("key_grid.csv", [&](std::ostream &out) { out << grid_body; });
    ctx.metric("min_lyapunov_key_grid", min_lyap);
    ctx.verdict(9, "nominal_key_unlocks", nominal_pass, "nominal key NMSE below 0.05: " + std::string(nominal_pass ? "yes" : "no"));
    ctx.verdict(9, "wrong_key_locks", far_fail, "every target >= 20% off gives NMSE > 0.5: " + std::string(far_fail ? "yes" : "no"));
    ctx.verdict(9, "tolerant_key_unlocks", near_pass, "every target within 5% passes: " + std::string(near_pass ? "yes" : "no"));
    ctx.verdict(9, "chaos_across_key_grid", min_lyap > kChaosLyapunovFloor,
                "smallest Lyapunov exponent " + fmt(min_lyap) + " (need > " + fmt(kChaosLyapunovFloor) + ")");
}

void run_stability(const Context &ctx) {
    const auto &c = ctx.cfg;
    const ChuaParams base = chua(c);
    const double dt = real(c, "dt");
    const double frac = real(c, "grid_fraction");
    const std::size_t pts = count(c, "grid_points");
    std::ostringstream rows;
    rows << "sigma,beta,max_eig_origin,max_eig_outer,lyapunov\n";
    double min_lyap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts; ++i) {
        for (std::size_t j = 0; j < pts; ++j) {
            auto level = [&](std::size_t idx) {
                return pts == 1 ? 1.0 : 1.0 - frac + 2.0 * frac * static_cast<double>(idx) / static_cast<double>(pts - 1);
            };
            ChuaParams p = base;
            p.sigma *= level(i);
            p.beta *= level(j);
            const auto eq = equilibria(p);
            const double e_origin = max_real_eig(jacobian(eq[0], p));
            const double e_outer = eq.size() > 1 ? max_real_eig(jacobian(eq[1], p)) : std::nan("");
            const double lyap = lyapunov_max(p, real(c, "lyapunov_horizon"), dt, vec3(c, "s0"));
            min_lyap = std::min(min_lyap, lyap);
            rows << fmt(p.sigma) << ',' << fmt(p.beta) << ',' << fmt(e_origin) << ',' << fmt(e_outer) << ','
                 << fmt(lyap) << '\n';
        }
    }
    const std::string body = rows.str();
    ctx.art.write("stability.csv", [&](std::ostream &out) { out << body; });
    ctx.metric("min_lyapunov", min_lyap);
    ctx.verdict(9, "chaos_across_parameter_grid", min_lyap > kChaosLyapunovFloor,
                "smallest Lyapunov exponent " + fmt(min_lyap) + " (need > " + fmt(kChaosLyapunovFloor) + ")");
}

}  // namespace

// ---------------------------------------------------------------------------

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error([&] {
          std::string s;
          for (const auto &p : problems) s += (s.empty() ? "" : "\n") + p;
          return s;
      }()),
      problems_(std::move(problems)) {}

const std::vector<std::string> &experiment_names() {
    static const std::vector<std::string> names{"simulate",     "mask",        "tscsk",  "attack-rm", "attack-power",
                                                "attack-kpa",   "retune",      "lock",   "stability"};
    return names;
}

std::map<std::string, std::string> experiment_defaults(const std::string &experiment) {
    std::map<std::string, std::string> out;
    for (const auto &[k, s] : spec_for(experiment)) out[k] = s.def;
    return out;
}

ExperimentConfig parse_config(std::string_view text) {
    std::vector<Entry> entries;
    std::vector<std::string> errors;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            errors.push_back(where + ": expected `key = value`");
            continue;
        }
        Entry e{trim(t.substr(0, eq)), trim(t.substr(eq + 1)), where};
        if (e.key.empty()) {
            errors.push_back(where + ": missing key before '='");
            continue;
        }
        entries.push_back(std::move(e));
    }
    return build_config(entries, std::move(errors));
}

void apply_overrides(ExperimentConfig &cfg, const std::vector<std::string> &overrides) {
    std::vector<Entry> entries{{"experiment", cfg.experiment, "config"},
                               {"seed", std::to_string(cfg.seed), "config"},
                               {"output_dir", cfg.output_dir.string(), "config"}};
    for (const auto &[k, v] : cfg.params) entries.push_back({k, v, "config"});
    std::vector<std::string> errors;
    for (const auto &o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) {
            errors.push_back("--set " + o + ": expected key=value");
            continue;
        }
        const std::string key = trim(std::string_view(o).substr(0, eq));
        const std::string value = trim(std::string_view(o).substr(eq + 1));
        auto it = std::find_if(entries.begin(), entries.end(), [&](const Entry &e) { return e.key == key; });
        if (it == entries.end()) {
            entries.push_back({key, value, "--set " + o});
        } else {
            *it = {key, value, "--set " + o};
        }
    }
    cfg = build_config(entries, std::move(errors));
}

std::string echo_config(const ExperimentConfig &cfg) {
    std::ostringstream out;
    out << "experiment = " << cfg.experiment << '\n';
    out << "seed = " << cfg.seed << '\n';
    out << "output_dir = " << cfg.output_dir.string() << '\n';
    for (const auto &[k, v] : cfg.params) out << k << " = " << v << '\n';
    return out.str();
}

bool RunReport::all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict &v) { return v.pass; });
}

RunReport run_experiment(const ExperimentConfig &cfg) {
    const auto start = std::chrono::steady_clock::now();
    RunReport report;
    report.experiment = cfg.experiment;
    report.inputs = cfg.params;
    report.inputs["seed"] = std::to_string(cfg.seed);
    Artifacts art(cfg.output_dir);
    const Context ctx{cfg, report, art};
    try {
        const auto &e = cfg.experiment;
        if (e == "simulate") {
            run_simulate(ctx);
        } else if (e == "mask") {
            run_mask(ctx, false);
        } else if (e == "attack-power") {
            run_mask(ctx, true);
        } else if (e == "tscsk") {
            run_tscsk(ctx);
        } else if (e == "attack-rm") {
            run_attack_rm(ctx);
        } else if (e == "attack-kpa") {
            run_attack_kpa(ctx);
        } else if (e == "retune") {
            run_retune(ctx);
        } else if (e == "lock") {
            run_lock(ctx);
        } else if (e == "stability") {
            run_stability(ctx);
        } else {
            throw ConfigError({"unknown experiment '" + e + "'"});
        }
        const std::string echo = echo_config(cfg);
        art.write("config.echo", [&](std::ostream &out) { out << echo; });
        art.write("summary.txt", [&](std::ostream &out) { write_summary(out, report); });
    } catch (...) {
        art.rollback();
        throw;
    }
    report.artifacts = art.files();
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

void write_summary(std::ostream &out, const RunReport &report) {
    out << "experiment = " << report.experiment << '\n';
    for (const auto &[k, v] : report.inputs) out << "input." << k << " = " << v << '\n';
    for (const auto &[k, v] : report.metrics) out << k << " = " << v << '\n';
    for (const auto &v : report.verdicts) {
        out << "criterion_" << v.criterion << '.' << v.name << " = " << (v.pass ? "pass" : "fail") << "  # "
            << v.detail << '\n';
    }
    for (const auto &n : report.notes) out << "note = " << n << '\n';
    out << "status = " << (report.all_pass() ? "pass" : "fail") << '\n';
}

}  // namespace chaoscomm

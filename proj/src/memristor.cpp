#include "chaoscomm/memristor.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace chaoscomm {

void MemristorParams::validate() const {
    if (!(r_on > 0.0 && r_on < r_off)) throw InvalidArgument("MemristorParams: need 0 < r_on < r_off");
    if (!(r_init >= r_on && r_init <= r_off)) throw InvalidArgument("MemristorParams: need r_on <= r_init <= r_off");
    if (!(d > 0.0)) throw InvalidArgument("MemristorParams: d must be > 0");
    if (!(uv > 0.0)) throw InvalidArgument("MemristorParams: uv must be > 0");
    if (p < 1) throw InvalidArgument("MemristorParams: window exponent p must be >= 1");
}

void MemristorKey::validate(std::span<const MemristorParams> mps) const {
    if (targets.size() != mps.size()) {
        throw InvalidArgument("MemristorKey: expected " + std::to_string(mps.size()) + " targets, got " +
                              std::to_string(targets.size()));
    }
    if (!(tolerance > 0.0 && tolerance < 1.0)) throw InvalidArgument("MemristorKey: tolerance must lie in (0, 1)");
    for (std::size_t k = 0; k < targets.size(); ++k) {
        if (!(targets[k] >= mps[k].r_on && targets[k] <= mps[k].r_off)) {
            std::ostringstream os;
            os << "MemristorKey: target " << targets[k] << " for element " << k << " outside [" << mps[k].r_on
               << ", " << mps[k].r_off << "]";
            throw InvalidArgument(os.str());
        }
    }
}

double memristance(const MemristorState &st, const MemristorParams &mp) {
    const double frac = st.w / mp.d;
    return mp.r_on * frac + mp.r_off * (1.0 - frac);
}

double memristor_window(double w, const MemristorParams &mp) {
    const double u = 2.0 * w / mp.d - 1.0;
    return 1.0 - std::pow(u, 2 * mp.p);
}

MemristorState memristor_step(const MemristorState &st, double current, double dt, const MemristorParams &mp) {
    if (!(dt > 0.0)) throw InvalidArgument("memristor_step: dt must be > 0");
    const double rate = mp.uv * mp.r_on / (mp.d * mp.d) * current * memristor_window(st.w, mp);
    return {std::clamp(st.w + rate * dt, 0.0, mp.d)};
}

namespace {

void check_elements(std::span<const MemristorState> mstates, std::span<const MemristorParams> mps) {
    if (mstates.size() != mps.size()) throw ShapeMismatchError("memristor: states and params differ in length");
    if (mps.size() < 2) throw InvalidArgument("memristor: need at least a sigma and a beta element");
}

}  // namespace

ChuaParams effective_params(std::span<const MemristorState> mstates, std::span<const MemristorParams> mps,
                            const ChuaParams &base) {
    check_elements(mstates, mps);
    ChuaParams p = base;
    for (std::size_t k = 0; k < mps.size(); ++k) {
        const double ratio = mps[k].r_init / memristance(mstates[k], mps[k]);
        if (keyed_coefficient(k) == KeyedCoefficient::Sigma) {
            p.sigma *= ratio;
        } else {
            p.beta *= ratio;
        }
    }
    return p;
}

MemristorDeriv memristor_chua_deriv(const StateVec &s, std::span<const MemristorState> mstates,
                                    std::span<const MemristorParams> mps, const ChuaParams &base) {
    const ChuaParams p = effective_params(mstates, mps, base);
    MemristorDeriv out{chua_deriv(s, p), std::vector<double>(mps.size())};
    const double sigma_current = std::abs(s.x2 - s.x1 - nonlinearity(s.x1, p));
    const double beta_current = std::abs(s.x2);
    for (std::size_t k = 0; k < mps.size(); ++k) {
        out.currents[k] = keyed_coefficient(k) == KeyedCoefficient::Sigma ? sigma_current : beta_current;
    }
    return out;
}

std::vector<MemristorState> apply_key(const MemristorKey &key, std::span<const MemristorParams> mps) {
    key.validate(mps);
    std::vector<MemristorState> out;
    out.reserve(mps.size());
    for (std::size_t k = 0; k < mps.size(); ++k) {
        const auto &mp = mps[k];
        const double w = mp.d * (mp.r_off - key.targets[k]) / (mp.r_off - mp.r_on);
        out.push_back({std::clamp(w, 0.0, mp.d)});
    }
    return out;
}

MemristorKey nominal_key(std::span<const MemristorParams> mps, double tolerance) {
    MemristorKey key;
    key.tolerance = tolerance;
    for (const auto &mp : mps) key.targets.push_back(mp.r_init);
    return key;
}

std::uint64_t key_space_size(std::span<const MemristorParams> mps, double quantization) {
    if (!(quantization > 0.0)) throw InvalidArgument("key_space_size: quantization must be > 0");
    std::uint64_t total = 1;
    for (const auto &mp : mps) {
        // The small relative slack keeps exact multiples (850 / 85) from rounding down.
        const double levels = std::floor((mp.r_off - mp.r_on) / quantization * (1.0 + 1e-12));
        total *= static_cast<std::uint64_t>(levels) + 1;
    }
    return total;
}

MemristorRun simulate_memristor_chua(const StateVec &s0, std::vector<MemristorState> mstates,
                                     std::span<const MemristorParams> mps, const ChuaParams &base, double dt,
                                     std::size_t n, bool drift, double current_scale) {
    check_elements(mstates, mps);
    if (!(dt > 0.0) || n < 1) throw InvalidArgument("simulate_memristor_chua: need dt > 0 and n >= 1");

    MemristorRun run;
    run.trajectory.dt = dt;
    run.trajectory.states.reserve(n + 1);
    run.trajectory.states.push_back(s0);
    StateVec s = s0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto field = [&](const StateVec &x) { return memristor_chua_deriv(x, mstates, mps, base).deriv; };
        if (drift) {
            const auto currents = memristor_chua_deriv(s, mstates, mps, base).currents;
            s = rk4_step(s, dt, field);
            for (std::size_t e = 0; e < mstates.size(); ++e) {
                mstates[e] = memristor_step(mstates[e], current_scale * currents[e], dt, mps[e]);
            }
        } else {
            s = rk4_step(s, dt, field);
        }
        check_bounded(s, dt * static_cast<double>(k + 1));
        run.trajectory.states.push_back(s);
    }
    run.final_states = std::move(mstates);
    return run;
}

MemristorKey parse_key_file(std::istream &in, double tolerance) {
    std::vector<std::pair<long, double>> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw InvalidArgument("key file line " + std::to_string(line_no) + ": expected `index, memristance`");
        }
        try {
            std::size_t used = 0;
            const std::string idx_text = line.substr(0, comma);
            const long idx = std::stol(idx_text, &used);
            if (idx_text.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("idx");
            const std::string val_text = line.substr(comma + 1);
            const double value = std::stod(val_text, &used);
            if (val_text.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("val");
            entries.emplace_back(idx, value);
        } catch (const std::logic_error &) {
            throw InvalidArgument("key file line " + std::to_string(line_no) + ": malformed entry");
        }
    }
    MemristorKey key;
    key.tolerance = tolerance;
    key.targets.assign(entries.size(), 0.0);
    std::vector<bool> seen(entries.size(), false);
    for (const auto &[idx, value] : entries) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= entries.size() || seen[static_cast<std::size_t>(idx)]) {
            throw InvalidArgument("key file: element indices must be 0..n-1, each exactly once");
        }
        seen[static_cast<std::size_t>(idx)] = true;
        key.targets[static_cast<std::size_t>(idx)] = value;
    }
    return key;
}

void write_key_file(std::ostream &out, const MemristorKey &key) {
    const auto old = out.precision(17);
    for (std::size_t k = 0; k < key.targets.size(); ++k) out << k << ", " << key.targets[k] << '\n';
    out.precision(old);
}

}  // namespace chaoscomm

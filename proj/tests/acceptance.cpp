// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chaoscomm/comms.hpp"
#include "chaoscomm/dynamics.hpp"
#include "chaoscomm/harness.hpp"

using namespace chaoscomm;
namespace fs = std::filesystem;

namespace {

const fs::path kRunRoot = fs::temp_directory_path() / "chaoscomm_acceptance";

struct Outcome {
    bool pass{true};
    std::string detail;

    void check(bool ok, const std::string &what) {
        pass &= ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [fail]");
    }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

RunReport run(const std::string &experiment, const std::vector<std::string> &overrides = {}) {
    auto cfg = parse_config("experiment = " + experiment + "\n");
    apply_overrides(cfg, overrides);
    cfg.output_dir = kRunRoot / experiment;
    return run_experiment(cfg);
}

// Folds the harness verdicts for one criterion into the outcome.
void take_verdicts(Outcome &out, const RunReport &rep, int criterion) {
    bool any = false;
    for (const auto &v : rep.verdicts) {
        if (v.criterion != criterion) continue;
        any = true;
        out.check(v.pass, v.name + ": " + v.detail);
    }
    if (!any) out.check(false, rep.experiment + " produced no verdict");
}

void time_limit(Outcome &out, double seconds, double limit) {
    out.check(seconds < limit, "runtime " + num(seconds) + " s (limit " + num(limit) + " s)");
}

Outcome double_scroll() {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    const auto rep = run("simulate");
    take_verdicts(out, rep, 1);
    time_limit(out, seconds_since(start), 5.0);
    return out;
}

Outcome sync_floor() {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    const ChuaParams p = ChuaParams::canonical();
    const std::size_t n = 40001;
    AnalogMessage zero{std::vector<double>(n, 0.0), 1e-3, 0.0};
    const auto tx = transmit_masked(zero, p);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> gauss;
    double worst = 0.0;
    std::size_t starts = 0;
    for (double dist : {0.0, 1.0, 2.5, 5.0}) {
        for (int k = 0; k < 6; ++k) {
            StateVec dir{gauss(rng), gauss(rng), gauss(rng)};
            dir = (1.0 / dir.norm()) * dir;
            const StateVec r0 = tx.tx.states[0] + dist * dir;
            const auto rx = receive_masked(tx.ciphertext, p, r0);
            worst = std::max(worst, sync_error(tx.tx, rx.rx, kSyncTransient));
            ++starts;
        }
    }
    out.check(worst < 1e-3, "worst RMS sync error " + num(worst) + " over " + std::to_string(starts) +
                                " receiver starts within distance 5 (need < 1e-3)");
    time_limit(out, seconds_since(start), 5.0);
    return out;
}

Outcome masking() {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    take_verdicts(out, run("mask"), 3);
    time_limit(out, seconds_since(start), 10.0);
    return out;
}

Outcome tscsk() {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    take_verdicts(out, run("tscsk"), 4);
    time_limit(out, seconds_since(start), 30.0);
    return out;
}

Outcome rm_contrast() {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    take_verdicts(out, run("attack-rm"), 5);
    time_limit(out, seconds_since(start), 30.0);
    return out;
}

std::array<double, 6> bounding_box(const Trajectory &tr, std::size_t skip) {
    std::array<double, 6> b{1e300, -1e300, 1e300, -1e300, 1e300, -1e300};
    for (std::size_t k = skip; k < tr.size(); ++k) {
        const double v[3]{tr.states[k].x1, tr.states[k].x2, tr.states[k].x3};
        for (int i = 0; i < 3; ++i) {
            b[2 * i] = std::min(b[2 * i], v[i]);
            b[2 * i + 1] = std::max(b[2 * i + 1], v[i]);
        }
    }
    return b;
}

Outcome phase_space() {
    Outcome out;
    const ChuaParams p = ChuaParams::canonical();
    const double dt = 1e-3;
    const auto bits = balanced_bits(64, 60.0, 1);
    const auto sig = tscsk_transmit(bits, p, {1.0, 1.3}, TwoRegion{}, dt);
    const auto plain = integrate(p, {0.1, 0, 0}, dt, sig.tx.size() - 1);
    const auto skip = static_cast<std::size_t>(kDefaultTransient / dt);
    const auto bm = bounding_box(sig.tx, skip);
    const auto bp = bounding_box(plain, skip);
    double worst_box = 0.0;
    for (int i = 0; i < 6; ++i) {
        const double span = bp[2 * (i / 2) + 1] - bp[2 * (i / 2)];
        worst_box = std::max(worst_box, std::abs(bm[i] - bp[i]) / span);
    }
    out.check(worst_box <= 0.02, "largest bounding-box edge shift " + num(100 * worst_box) + "% of span (need <= 2%)");

    double worst_path = 0.0;
    for (double lambda : {0.5, 1.3, 2.0}) {
        const double dt_tau = 1e-3;
        const auto n = static_cast<std::size_t>(std::llround(10.0 / (lambda * dt_tau)));
        const auto scaled = integrate_scaled(p, {0.1, 0, 0}, [lambda](const StateVec &) { return lambda; }, dt_tau, n);
        const auto ref = integrate(p, {0.1, 0, 0}, lambda * dt_tau, n);
        for (std::size_t k = 0; k <= n; ++k) {
            worst_path = std::max(worst_path, (scaled.states[k] - ref.states[k]).max_abs());
            worst_path = std::max(worst_path, std::abs((*scaled.scaled_time)[k] - ref.time_at(k)));
        }
    }
    out.check(worst_path < 1e-6, "constant-lambda reparametrization max deviation " + num(worst_path) +
                                     " over 10 units, lambda in {0.5, 1.3, 2} (need < 1e-6)");
    return out;
}

Outcome side_channel() {
    Outcome out;
    take_verdicts(out, run("attack-power"), 7);
    return out;
}

Outcome retune() {
    Outcome out;
    take_verdicts(out, run("retune"), 8);
    return out;
}

Outcome memristor_lock() {
    Outcome out;
    take_verdicts(out, run("lock"), 9);
    take_verdicts(out, run("stability"), 9);
    return out;
}

Outcome kpa() {
    Outcome out;
    take_verdicts(out, run("attack-kpa"), 10);
    return out;
}

std::map<std::string, std::string> read_dir(const fs::path &dir) {
    std::map<std::string, std::string> files;
    for (const auto &e : fs::directory_iterator(dir)) {
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        files[e.path().filename().string()] = buf.str();
    }
    return files;
}

Outcome numerics() {
    Outcome out;
    const ChuaParams p = ChuaParams::canonical();
    const auto end_error = [&](const StateVec &s0, double horizon, double h) {
        const auto steps = [&](double step) { return static_cast<std::size_t>(std::llround(horizon / step)); };
        const auto ref = integrate(p, s0, h / 64, steps(h / 64)).states.back();
        return (integrate(p, s0, h, steps(h)).states.back() - ref).max_abs();
    };
    const StateVec s0{0.1, 0, 0};
    const double ratio = end_error(s0, 1.0, 2e-3) / end_error(s0, 1.0, 1e-3);
    const StateVec outer = equilibria(p)[1] + StateVec{0.05, 0, 0};
    const double smooth_ratio = end_error(outer, 1.0, 2e-3) / end_error(outer, 1.0, 1e-3);
    out.check(ratio >= 8.0, "RK4 halving ratio " + num(ratio) + " over 1 unit from (0.1, 0, 0) (need >= 8)");
    out.check(smooth_ratio >= 8.0, "RK4 halving ratio " + num(smooth_ratio) +
                                       " over 1 unit inside the outer region (need >= 8)");

    double residual = 0.0;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        ChuaParams q = p;
        if (k > 0) {
            q.sigma *= 1.0 + 0.5 * u(rng);
            q.beta *= 1.0 + 0.5 * u(rng);
            q.m0 *= 1.0 + 0.3 * u(rng);
            q.m1 *= 1.0 + 0.3 * u(rng);
        }
        for (const auto &e : equilibria(q)) residual = std::max(residual, chua_deriv(e, q).max_abs());
    }
    out.check(residual < 1e-12, "equilibria residual " + num(residual) + " over 200 parameter sets (need < 1e-12)");

    bool identical = true;
    for (const std::string exp : {"simulate", "tscsk"}) {
        auto cfg = parse_config("experiment = " + exp + "\n");
        cfg.output_dir = kRunRoot / ("determinism_" + exp);
        (void)run_experiment(cfg);
        const auto first = read_dir(cfg.output_dir);
        (void)run_experiment(cfg);
        identical &= !first.empty() && read_dir(cfg.output_dir) == first;
    }
    out.check(identical, std::string("repeated simulate and tscsk runs ") +
                             (identical ? "byte-identical" : "differ"));
    return out;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"double scroll", double_scroll},
        {"sync floor", sync_floor},
        {"masking round trip", masking},
        {"TS-CSK round trip", tscsk},
        {"RM attack contrast", rm_contrast},
        {"phase-space preservation", phase_space},
        {"side channel", side_channel},
        {"retune remedy", retune},
        {"memristor lock", memristor_lock},
        {"KPA immunity", kpa},
        {"numerics", numerics},
    };
    fs::remove_all(kRunRoot);
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o.check(false, std::string("threw: ") + e.what());
        }
        failed += !o.pass;
        std::printf("criterion %2zu %-26s %s  %s\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria pass\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}

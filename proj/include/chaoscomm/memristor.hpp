#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chaoscomm/dynamics.hpp"

namespace chaoscomm {

/// Linear-drift memristor with a polynomial window. Resistances are ohms,
/// `d` is metres and `uv` is the dopant mobility in m^2 / (V s).
struct MemristorParams {
    double r_on{0.8e3};
    double r_off{1.65e3};
    double r_init{1.65e3};
    double d{70e-9};
    double uv{10e-15};
    int p{1};

    /// Device constants used for the keyed Chua circuit.
    static constexpr MemristorParams reference() { return {}; }

    void validate() const;
};

/// Internal doped-region width, 0 <= w <= d.
struct MemristorState {
    double w{0.0};
};

/// Locking key: one target memristance per keyed element.
struct MemristorKey {
    std::vector<double> targets;
    double tolerance{0.05};

    void validate(std::span<const MemristorParams> mps) const;
};

/// M(w) = r_on w / d + r_off (1 - w / d)
[[nodiscard]] double memristance(const MemristorState &st, const MemristorParams &mp);

/// Joglekar window 1 - (2w/d - 1)^(2p).
[[nodiscard]] double memristor_window(double w, const MemristorParams &mp);

/// Forward-Euler drift dw/dt = uv r_on / d^2 * i * window(w), clamped to [0, d].
[[nodiscard]] MemristorState memristor_step(const MemristorState &st, double current, double dt,
                                            const MemristorParams &mp);

/// Coefficient a keyed element scales. Element k keys sigma when k is even and
/// beta when k is odd, so the minimum configuration is {sigma, beta}.
enum class KeyedCoefficient { Sigma, Beta };

[[nodiscard]] constexpr KeyedCoefficient keyed_coefficient(std::size_t element) {
    return element % 2 == 0 ? KeyedCoefficient::Sigma : KeyedCoefficient::Beta;
}

/// Chua coefficients realized by the given memristances:
/// sigma_eff = sigma * prod(r_init / M) over sigma elements, likewise beta.
[[nodiscard]] ChuaParams effective_params(std::span<const MemristorState> mstates,
                                          std::span<const MemristorParams> mps, const ChuaParams &base);

struct MemristorDeriv {
    StateVec deriv;
    std::vector<double> currents;
};

/// Vector field of the memristor-keyed oscillator plus per-element current
/// proxies (sigma element: |x2 - x1 - f(x1)|, beta element: |x2|).
[[nodiscard]] MemristorDeriv memristor_chua_deriv(const StateVec &s, std::span<const MemristorState> mstates,
                                                  std::span<const MemristorParams> mps, const ChuaParams &base);

/// Programs each element to its key target by inverting the linear memristance map.
[[nodiscard]] std::vector<MemristorState> apply_key(const MemristorKey &key, std::span<const MemristorParams> mps);

/// Key made of every element's r_init.
[[nodiscard]] MemristorKey nominal_key(std::span<const MemristorParams> mps, double tolerance = 0.05);

/// Product over elements of floor((r_off - r_on) / quantization) + 1.
[[nodiscard]] std::uint64_t key_space_size(std::span<const MemristorParams> mps, double quantization);

struct MemristorRun {
    Trajectory trajectory;
    std::vector<MemristorState> final_states;
};

/// Integrates the keyed oscillator. With `drift` false the memristor states stay
/// at their programmed values; otherwise each element's w follows
/// memristor_step driven by `current_scale` times its current proxy.
[[nodiscard]] MemristorRun simulate_memristor_chua(const StateVec &s0, std::vector<MemristorState> mstates,
                                                   std::span<const MemristorParams> mps, const ChuaParams &base,
                                                   double dt, std::size_t n, bool drift = false,
                                                   double current_scale = 1e-9);

/// Key file: one `element_index, target_memristance` line per element; `#`
/// starts a comment.
[[nodiscard]] MemristorKey parse_key_file(std::istream &in, double tolerance = 0.05);
void write_key_file(std::ostream &out, const MemristorKey &key);

}  // namespace chaoscomm

#include "chaoscomm/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chaoscomm/errors.hpp"
#include "detail/fft.hpp"

namespace chaoscomm {

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double rms(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s / static_cast<double>(x.size()));
}

std::vector<double> moving_average(std::span<const double> x, std::size_t window) {
    if (window <= 1 || x.empty()) return {x.begin(), x.end()};
    const std::size_t n = x.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
    std::vector<double> out(n);
    const std::size_t left = window / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= left ? i - left : 0;
        const std::size_t hi = std::min(n, i + (window - left));
        out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    }
    return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw ShapeMismatchError("pearson: inputs must share length >= 2");
    const double ma = mean(a);
    const double mb = mean(b);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) throw InvalidArgument("pearson: zero-variance input");
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double normalized_mse(std::span<const double> recovered, std::span<const double> message, std::size_t skip,
                      std::size_t smoothing) {
    if (recovered.size() != message.size()) throw ShapeMismatchError("normalized_mse: length mismatch");
    const auto smooth = moving_average(recovered, smoothing);
    double err = 0.0;
    double pow = 0.0;
    for (std::size_t i = skip; i < message.size(); ++i) {
        const double d = smooth[i] - message[i];
        err += d * d;
        pow += message[i] * message[i];
    }
    if (pow == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return err / pow;
}

std::vector<double> resample_linear(std::span<const double> x, double dt_in, double dt_out, std::size_t n_out) {
    if (x.empty()) throw InvalidArgument("resample_linear: empty input");
    std::vector<double> out(n_out);
    const double last = static_cast<double>(x.size() - 1);
    for (std::size_t i = 0; i < n_out; ++i) {
        const double pos = std::clamp(static_cast<double>(i) * dt_out / dt_in, 0.0, last);
        const auto k = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(k);
        out[i] = k + 1 < x.size() ? x[k] + frac * (x[k + 1] - x[k]) : x[k];
    }
    return out;
}

std::vector<double> lowpass(std::span<const double> x, double dt, double cutoff) {
    if (!(dt > 0.0) || !(cutoff > 0.0)) throw InvalidArgument("lowpass: need dt > 0 and cutoff > 0");
    if (x.size() < 2) return {x.begin(), x.end()};
    auto spectrum = detail::rfft(x);
    const double df = 1.0 / (static_cast<double>(x.size()) * dt);
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        if (static_cast<double>(k) * df > cutoff) spectrum[k] = 0.0;
    }
    return detail::irfft(spectrum, x.size());
}

}  // namespace chaoscomm

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace chaoscomm {

[[nodiscard]] double mean(std::span<const double> x);
[[nodiscard]] double rms(std::span<const double> x);

/// Centered moving average; the window shrinks at the edges.
[[nodiscard]] std::vector<double> moving_average(std::span<const double> x, std::size_t window);

/// Pearson correlation. Throws InvalidArgument when either input has zero variance.
[[nodiscard]] double pearson(std::span<const double> a, std::span<const double> b);

/// Normalized MSE of `recovered` against `message` over samples at or after
/// `skip`, after `smoothing`-sample moving-average smoothing of `recovered`.
/// Returns NaN when the message has no power in that window.
[[nodiscard]] double normalized_mse(std::span<const double> recovered, std::span<const double> message,
                                    std::size_t skip, std::size_t smoothing = 5);

/// Linear interpolation of samples on a grid with step `dt_in` onto `n_out`
/// points with step `dt_out`.
[[nodiscard]] std::vector<double> resample_linear(std::span<const double> x, double dt_in, double dt_out,
                                                  std::size_t n_out);

/// Zero-phase brick-wall low-pass: removes every DFT bin above `cutoff`
/// (cycles per time unit).
[[nodiscard]] std::vector<double> lowpass(std::span<const double> x, double dt, double cutoff);

}  // namespace chaoscomm

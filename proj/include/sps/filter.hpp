#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "sps/error.hpp"

namespace sps {

/// Symmetric (zero-phase) FIR low-pass. taps[k] multiplies x[n + k - half].
struct FirFilter {
  std::vector<double> taps{1.0};

  std::size_t half() const { return taps.size() / 2; }
  bool is_identity() const { return taps.size() == 1 && taps[0] == 1.0; }

  /// Zero-phase magnitude response at `freq` for sampling interval `dt`.
  double response(double freq, double dt) const {
    double h = 0.0;
    const auto m = static_cast<double>(half());
    for (std::size_t k = 0; k < taps.size(); ++k) {
      h += taps[k] * std::cos(2.0 * std::numbers::pi * freq * dt * (static_cast<double>(k) - m));
    }
    return h;
  }

  /// Convolution with zero padding outside the record; output has the input's length.
  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(x.size(), 0.0);
    apply_into(x, y);
    return y;
  }

  void apply_into(std::span<const double> x, std::span<double> y) const {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const auto m = static_cast<std::ptrdiff_t>(half());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      double acc = 0.0;
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, m - i);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(2 * m, n - 1 - i + m);
      for (std::ptrdiff_t k = lo; k <= hi; ++k) acc += taps[static_cast<std::size_t>(k)] * x[i + k - m];
      y[static_cast<std::size_t>(i)] = acc;
    }
  }
};

namespace detail {

/// Hamming-windowed sinc with cutoff `fc` (Hz), normalised to unit DC gain.
inline std::vector<double> windowed_sinc(double fc, double dt, std::size_t half) {
  const std::size_t n = 2 * half + 1;
  std::vector<double> taps(n);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double j = static_cast<double>(k) - static_cast<double>(half);
    const double x = 2.0 * fc * dt * j;
    const double sinc = (j == 0.0) ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double window = 0.54 + 0.46 * std::cos(std::numbers::pi * j / static_cast<double>(half + 1));
    taps[k] = sinc * window;
    sum += taps[k];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

}  // namespace detail

/// Low-pass whose −3 dB point sits at `bandwidth` Hz for samples spaced `dt` apart.
/// A bandwidth of 0 or at/above Nyquist returns the identity filter.
inline FirFilter design_lowpass(double bandwidth, double dt, std::size_t half = 0) {
  if (!(dt > 0.0)) throw InvalidArgument("sample interval must be > 0");
  if (!(bandwidth >= 0.0)) throw InvalidArgument("filter bandwidth must be >= 0");
  const double nyquist = 0.5 / dt;
  if (bandwidth == 0.0 || bandwidth >= nyquist) return FirFilter{};
  if (half == 0) half = std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(2.0 * nyquist / bandwidth)));

  const double target = 1.0 / std::numbers::sqrt2;
  double lo = 1e-3 * bandwidth;
  double hi = nyquist;
  FirFilter f;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    f.taps = detail::windowed_sinc(mid, dt, half);
    if (f.response(bandwidth, dt) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-12 * nyquist) break;
  }
  f.taps = detail::windowed_sinc(0.5 * (lo + hi), dt, half);
  return f;
}

}  // namespace sps

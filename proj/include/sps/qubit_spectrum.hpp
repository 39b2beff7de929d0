#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sps/constants.hpp"
#include "sps/error.hpp"

namespace sps {

/// Tunable-gap flux qubit near one degeneracy point.
struct FluxQubitParams {
  double gap = 6.728e9;              ///< tunnelling gap Δ/h [Hz]
  double persistent_current = 24e-9; ///< I_p [A]

  void validate() const {
    if (!(gap > 0.0)) throw InvalidArgument("gap must be > 0");
    if (!(persistent_current >= 0.0)) throw InvalidArgument("persistent current must be >= 0");
  }
};

/// Flux detuning from the degeneracy point, in units of Φ₀.
struct FluxBias {
  double dphi = 0.0;
  int n = 0;  // flux-quantum index, informational

  void validate() const {
    if (!(std::abs(dphi) < 0.5)) throw InvalidArgument("|dphi| must be < 0.5 flux quanta");
  }
};

/// Flux-to-frequency slope 2·I_p·Φ₀/h [Hz per Φ₀].
inline double flux_slope(const FluxQubitParams& params) {
  return 2.0 * params.persistent_current * kFluxQuantum / kPlanck;
}

/// Transition frequency ω₁₀/2π [Hz] at the given flux bias.
inline double transition_frequency(const FluxQubitParams& params, const FluxBias& bias) {
  return std::hypot(flux_slope(params) * bias.dphi, params.gap);
}

inline double transition_frequency(const FluxQubitParams& params, double dphi) {
  return transition_frequency(params, FluxBias{dphi, 0});
}

/// Non-negative flux detuning |δΦ| (Φ₀ units) at which the qubit sits at `target` Hz.
inline double flux_for_frequency(const FluxQubitParams& params, double target) {
  if (target < params.gap) {
    throw TargetBelowGap("target " + std::to_string(target) + " Hz is below the gap " +
                         std::to_string(params.gap) + " Hz");
  }
  if (target == params.gap) return 0.0;
  const double slope = flux_slope(params);
  if (slope == 0.0) throw TargetBelowGap("zero persistent current: only the gap is reachable");
  // (t - g)(t + g) avoids cancellation close to the gap.
  return std::sqrt((target - params.gap) * (target + params.gap)) / slope;
}

struct SpectrumPoint {
  double dphi;
  double frequency;
};

/// Resonance ridge over a uniform flux grid [lo, hi] with n_points samples.
inline std::vector<SpectrumPoint> sweep_spectrum(const FluxQubitParams& params,
                                                 std::pair<double, double> dphi_range,
                                                 std::size_t n_points) {
  if (n_points < 2) throw InvalidArgument("sweep_spectrum needs at least 2 points");
  const auto [lo, hi] = dphi_range;
  std::vector<SpectrumPoint> out;
  out.reserve(n_points);
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double denom = static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) {
    // mirrored grid points come out exactly opposite around mid
    const double k = 2.0 * static_cast<double>(i) - denom;
    const double d = mid + half * (k / denom);
    out.push_back({d, transition_frequency(params, d)});
  }
  return out;
}

}  // namespace sps

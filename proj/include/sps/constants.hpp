#pragma once

#include <numbers>

namespace sps {

// CODATA 2018 exact values.
inline constexpr double kPlanck = 6.62607015e-34;          // J s
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kHbar = kPlanck / (2.0 * std::numbers::pi);
inline constexpr double kFluxQuantum = kPlanck / (2.0 * kElementaryCharge);  // Wb

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Cyclic frequency (Hz) to angular frequency (rad/s). The only place the 2π enters.
constexpr double to_angular(double hz) { return kTwoPi * hz; }
constexpr double to_cyclic(double rad_per_s) { return rad_per_s / kTwoPi; }

}  // namespace sps

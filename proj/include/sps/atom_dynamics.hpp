#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sps/error.hpp"

namespace sps {

/// Decoherence budget of the two-level atom. All rates in rad/s.
struct AtomRates {
  double gamma1_c = 0.0;   ///< radiative decay into the control line
  double gamma1_e = 0.0;   ///< radiative decay into the emission line
  double gamma1_nr = 0.0;  ///< non-radiative decay
  double gamma_phi = 0.0;  ///< pure dephasing

  double gamma1() const { return gamma1_c + gamma1_e + gamma1_nr; }
  double gamma2() const { return 0.5 * gamma1() + gamma_phi; }

  void validate() const {
    if (!(gamma1_c >= 0.0 && gamma1_e >= 0.0 && gamma1_nr >= 0.0 && gamma_phi >= 0.0)) {
      throw InvalidArgument("rates must be non-negative");
    }
    if (!(gamma1() > 0.0)) throw InvalidArgument("total relaxation rate must be > 0");
  }
};

/// Rotating-frame drive: Rabi rate Ω and detuning δω = ω − ω₁₀ (rad/s), carrier in Hz.
struct Drive {
  double rabi = 0.0;
  double detuning = 0.0;
  double carrier = 6.728e9;
};

/// Bloch vector (⟨σx⟩, ⟨σy⟩, ⟨σz⟩). The ground state is sz = +1.
struct BlochState {
  double sx = 0.0;
  double sy = 0.0;
  double sz = 1.0;

  static constexpr BlochState ground() { return {0.0, 0.0, 1.0}; }
  static constexpr BlochState excited() { return {0.0, 0.0, -1.0}; }

  /// ⟨σ⁻⟩ = (sx + i·sy)/2
  std::complex<double> sigma_minus() const { return {0.5 * sx, 0.5 * sy}; }
  /// ⟨σ⁺⟩ = (sx − i·sy)/2
  std::complex<double> sigma_plus() const { return {0.5 * sx, -0.5 * sy}; }
  /// Excited-state population P₁ = (1 − sz)/2.
  double p1() const { return 0.5 * (1.0 - sz); }
  double norm2() const { return sx * sx + sy * sy + sz * sz; }
};

enum class PulseShape { rectangular };

struct PulseEnvelope {
  PulseShape shape = PulseShape::rectangular;
  double duration = 0.0;   ///< Δt [s]
  double rabi_peak = 0.0;  ///< Ω during the pulse [rad/s]
};

struct Trajectory {
  std::vector<double> times;
  std::vector<BlochState> states;

  const BlochState& back() const { return states.back(); }
  std::size_t size() const { return times.size(); }
};

// ---------------------------------------------------------------------------
// Closed-form steady state under constant drive.

namespace detail {
inline double saturation_denominator(const AtomRates& rates, const Drive& drive) {
  const double g1 = rates.gamma1();
  const double g2 = rates.gamma2();
  const double x = drive.detuning / g2;
  return 1.0 + x * x + drive.rabi * drive.rabi / (g1 * g2);
}
}  // namespace detail

/// ⟨σ⁻⟩ = −i (Ω/2Γ₂)(1 + iδω/Γ₂) / (1 + (δω/Γ₂)² + Ω²/Γ₁Γ₂)
inline std::complex<double> steady_state_sigma_minus(const AtomRates& rates, const Drive& drive) {
  const double g2 = rates.gamma2();
  const double d = detail::saturation_denominator(rates, drive);
  const std::complex<double> num{1.0, drive.detuning / g2};
  return std::complex<double>{0.0, -drive.rabi / (2.0 * g2)} * num / d;
}

inline double steady_state_population(const AtomRates& rates, const Drive& drive) {
  const double s = drive.rabi * drive.rabi / (rates.gamma1() * rates.gamma2());
  return s / (2.0 * detail::saturation_denominator(rates, drive));
}

inline BlochState steady_state(const AtomRates& rates, const Drive& drive) {
  const auto sm = steady_state_sigma_minus(rates, drive);
  return {2.0 * sm.real(), 2.0 * sm.imag(), 1.0 - 2.0 * steady_state_population(rates, drive)};
}

// ---------------------------------------------------------------------------
// Time-domain integration.

namespace detail {

using Vec3 = std::array<double, 3>;

/// Right-hand side of the Bloch equations: precession about (Ω, 0, δω),
/// transverse decay Γ₂, longitudinal relaxation Γ₁ toward sz = +1.
inline Vec3 bloch_rhs(const Vec3& s, const AtomRates& rates, const Drive& d) {
  const double g1 = rates.gamma1();
  const double g2 = rates.gamma2();
  return {-d.detuning * s[1] - g2 * s[0],
          d.detuning * s[0] - d.rabi * s[2] - g2 * s[1],
          d.rabi * s[1] - g1 * (s[2] - 1.0)};
}

/// Classical fourth-order Runge–Kutta step for a 3-vector system f(t, s).
template <typename F>
Vec3 rk4_step(F&& f, double t, const Vec3& s, double h) {
  auto axpy = [](const Vec3& x, double a, const Vec3& k) {
    return Vec3{x[0] + a * k[0], x[1] + a * k[1], x[2] + a * k[2]};
  };
  const Vec3 k1 = f(t, s);
  const Vec3 k2 = f(t + 0.5 * h, axpy(s, 0.5 * h, k1));
  const Vec3 k3 = f(t + 0.5 * h, axpy(s, 0.5 * h, k2));
  const Vec3 k4 = f(t + h, axpy(s, h, k3));
  Vec3 out;
  for (std::size_t i = 0; i < 3; ++i) {
    out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

inline void bound_rate(double& fastest, double rate) { fastest = std::max(fastest, std::abs(rate)); }

}  // namespace detail

/// Largest admissible step: min(1/Γ₁, 1/Γ₂, 1/Ω, 1/|δω|)/20 over the nonzero rates.
inline double max_step(const AtomRates& rates, const Drive& drive) {
  double fastest = 0.0;
  detail::bound_rate(fastest, rates.gamma1());
  detail::bound_rate(fastest, rates.gamma2());
  detail::bound_rate(fastest, drive.rabi);
  detail::bound_rate(fastest, drive.detuning);
  if (fastest == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (20.0 * fastest);
}

/// Integrates the Bloch equations over t_span with a uniform step no larger than `dt`.
/// `envelope` maps time to the instantaneous Drive.
template <typename Envelope>
  requires std::invocable<Envelope&, double>
Trajectory evolve(const BlochState& initial, const AtomRates& rates, Envelope&& envelope,
                  std::pair<double, double> t_span, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  const auto [t0, t1] = t_span;
  if (!(t1 >= t0)) throw InvalidArgument("t_span must be ordered");
  const double span = t1 - t0;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9)));
  const double h = span / static_cast<double>(steps);

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.times.push_back(t0);
  traj.states.push_back(initial);
  if (span == 0.0) return traj;

  auto rhs = [&](double t, const detail::Vec3& s) {
    return detail::bloch_rhs(s, rates, envelope(t));
  };
  detail::Vec3 s{initial.sx, initial.sy, initial.sz};
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = t0 + h * static_cast<double>(i);
    const double bound = max_step(rates, envelope(t));
    if (dt > bound * (1.0 + 1e-12)) {
      throw StepTooLarge("dt = " + std::to_string(dt) + " s exceeds bound " +
                         std::to_string(bound) + " s at t = " + std::to_string(t));
    }
    s = detail::rk4_step(rhs, t, s, h);
    traj.times.push_back(i + 1 == steps ? t1 : t0 + h * static_cast<double>(i + 1));
    traj.states.push_back({s[0], s[1], s[2]});
  }
  return traj;
}

/// Constant-drive convenience overload.
inline Trajectory evolve(const BlochState& initial, const AtomRates& rates, const Drive& drive,
                         std::pair<double, double> t_span, double dt) {
  return evolve(initial, rates, [&drive](double) { return drive; }, t_span, dt);
}

/// Rectangular-pulse trajectory from the ground state; the step is a quarter of the bound.
inline Trajectory pulse_trajectory(const AtomRates& rates, const PulseEnvelope& pulse,
                                   double detuning) {
  if (!(pulse.duration >= 0.0)) throw InvalidArgument("pulse duration must be >= 0");
  const Drive drive{pulse.rabi_peak, detuning};
  const double dt = std::min(0.25 * max_step(rates, drive), std::max(pulse.duration, 1e-300));
  return evolve(BlochState::ground(), rates, drive, {0.0, pulse.duration}, dt);
}

/// State at the end of one rectangular pulse applied to the ground state.
inline BlochState pulse_response(const AtomRates& rates, const PulseEnvelope& pulse,
                                 double detuning = 0.0) {
  return pulse_trajectory(rates, pulse, detuning).back();
}

}  // namespace sps

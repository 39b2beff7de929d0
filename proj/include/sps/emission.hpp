#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "sps/atom_dynamics.hpp"
#include "sps/constants.hpp"
#include "sps/error.hpp"

namespace sps {

enum class Line { control, emission };

/// Power-versus-time record. Times strictly increasing, same length as power.
struct EmissionTrace {
  std::vector<double> times;  ///< s
  std::vector<double> power;  ///< W
};

inline double line_rate(const AtomRates& rates, Line line) {
  return line == Line::control ? rates.gamma1_c : rates.gamma1_e;
}

/// W = ħωΓ₁^{line}·P₁
inline double instantaneous_power(const AtomRates& rates, double omega, double p1, Line line) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw InvalidArgument("p1 must lie in [0, 1]");
  return kHbar * omega * line_rate(rates, line) * p1;
}

/// Energy radiated into `line` by an excitation P₁ left to decay freely.
inline double emitted_energy(const AtomRates& rates, double omega, double p1, Line line) {
  return kHbar * omega * p1 * line_rate(rates, line) / rates.gamma1();
}

/// Emitted power after preparing |1⟩ at t = 0: ħωΓ₁ᵉ·exp(−Γ₁t).
inline EmissionTrace photon_wavepacket(const AtomRates& rates, double omega,
                                       const std::vector<double>& times) {
  EmissionTrace tr{times, {}};
  tr.power.reserve(times.size());
  const double w0 = instantaneous_power(rates, omega, 1.0, Line::emission);
  for (double t : times) tr.power.push_back(w0 * std::exp(-rates.gamma1() * t));
  return tr;
}

/// Lorentzian line of the emitted wavepacket in J/Hz. Centred at ω/2π with FWHM 2Γ₂/2π;
/// its area over frequency equals the energy ħωΓ₁ᵉ/Γ₁ emitted per excitation.
inline std::vector<double> wavepacket_spectrum(const AtomRates& rates, double omega,
                                               const std::vector<double>& freq_grid) {
  const double f0 = to_cyclic(omega);
  const double hwhm = to_cyclic(rates.gamma2());
  const double energy = emitted_energy(rates, omega, 1.0, Line::emission);
  std::vector<double> psd;
  psd.reserve(freq_grid.size());
  for (double f : freq_grid) {
    const double x = f - f0;
    psd.push_back(energy * hwhm / (std::numbers::pi * (x * x + hwhm * hwhm)));
  }
  return psd;
}

// ---------------------------------------------------------------------------
// Pulse-length (Rabi) sweep under a periodic pulse train.

struct RabiSweepPoint {
  double pulse_length;                     ///< Δt [s]
  std::complex<double> mean_sigma_minus;   ///< period average of ⟨σ⁻⟩
  double coherent_amp;                     ///< |mean_sigma_minus|
  double incoherent_power;                 ///< period average of P₁ − |⟨σ⁻⟩|²
};

namespace detail {

struct PeriodAverages {
  std::complex<double> sigma_minus;
  double incoherent;
};

/// Integrals over one pulse of ⟨σ⁻⟩ and P₁ − |⟨σ⁻⟩|², Simpson on an even RK4 grid.
inline PeriodAverages pulse_integrals(const AtomRates& rates, double rabi, double detuning,
                                      double duration, BlochState& end) {
  if (duration == 0.0) {
    end = BlochState::ground();
    return {{0.0, 0.0}, 0.0};
  }
  const Drive drive{rabi, detuning};
  const double h_target = 0.25 * max_step(rates, drive);
  const auto half = static_cast<std::size_t>(std::max(1.0, std::ceil(duration / (2.0 * h_target))));
  const std::size_t steps = 2 * half;
  const Trajectory traj = evolve(BlochState::ground(), rates, drive, {0.0, duration},
                                 duration / static_cast<double>(steps));
  std::complex<double> sm_sum{0.0, 0.0};
  double inc_sum = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const auto sm = traj.states[i].sigma_minus();
    sm_sum += w * sm;
    inc_sum += w * (traj.states[i].p1() - std::norm(sm));
  }
  const double h = duration / static_cast<double>(steps);
  end = traj.back();
  return {sm_sum * (h / 3.0), inc_sum * h / 3.0};
}

/// Exact integrals of the undriven Bloch solution over [0, tau] starting from `s`.
inline PeriodAverages free_decay_integrals(const AtomRates& rates, double detuning,
                                           const BlochState& s, double tau) {
  const double g1 = rates.gamma1();
  const double g2 = rates.gamma2();
  const std::complex<double> rate{g2, -detuning};  // σ⁻(t) = σ⁻(0)·exp(−rate·t)
  const std::complex<double> sm0 = s.sigma_minus();
  const std::complex<double> sm_int = sm0 * (1.0 - std::exp(-rate * tau)) / rate;
  const double p1_int = s.p1() * (-std::expm1(-g1 * tau)) / g1;
  const double coh2_int = std::norm(sm0) * (-std::expm1(-2.0 * g2 * tau)) / (2.0 * g2);
  return {sm_int, p1_int - coh2_int};
}

}  // namespace detail

/// One pulse of each length in `pulse_lengths` per period `period`; the train is in the
/// steady regime T ≫ 1/Γ₁, so each period starts from the ground state.
inline std::vector<RabiSweepPoint> rabi_sweep(const AtomRates& rates, double rabi,
                                              const std::vector<double>& pulse_lengths,
                                              double period, double detuning = 0.0) {
  rates.validate();
  if (period < 5.0 / rates.gamma1()) {
    throw PeriodTooShort("period " + std::to_string(period) + " s < 5/Γ₁ = " +
                         std::to_string(5.0 / rates.gamma1()) + " s");
  }
  std::vector<RabiSweepPoint> out;
  out.reserve(pulse_lengths.size());
  for (double dt : pulse_lengths) {
    if (!(dt >= 0.0 && dt < period)) throw InvalidArgument("pulse length must lie in [0, period)");
    BlochState end;
    const auto on = detail::pulse_integrals(rates, rabi, detuning, dt, end);
    const auto off = detail::free_decay_integrals(rates, detuning, end, period - dt);
    const std::complex<double> mean = (on.sigma_minus + off.sigma_minus) / period;
    out.push_back({dt, mean, std::abs(mean), (on.incoherent + off.incoherent) / period});
  }
  return out;
}

}  // namespace sps

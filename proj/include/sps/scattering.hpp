#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "sps/atom_dynamics.hpp"
#include "sps/constants.hpp"
#include "sps/error.hpp"
#include "sps/qubit_spectrum.hpp"

namespace sps {

/// Capacitive coupling of the atom to the control and emission half-spaces.
struct CouplingNetwork {
  double c_control = 1e-15;    ///< C_c [F]
  double c_emission = 5e-15;   ///< C_e [F]
  double line_impedance = 50;  ///< Z [Ω]
  double dipole_voltage = 0;   ///< ν_a [V]

  void validate() const {
    if (!(c_control > 0 && c_emission > 0 && line_impedance > 0 && dipole_voltage > 0)) {
      throw InvalidArgument("coupling network values must all be > 0");
    }
  }
};

struct ScatteringPoint {
  std::complex<double> r_c;
  std::complex<double> t_ce;
  std::complex<double> r_e;
};

// Travelling-wave amplitude convention P = V₀²/(2Z); every power/amplitude
// conversion goes through these two functions.
inline double amplitude_from_power(double power, double impedance) {
  return std::sqrt(2.0 * impedance * power);
}
inline double power_from_amplitude(double amplitude, double impedance) {
  return amplitude * amplitude / (2.0 * impedance);
}

inline double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

/// Radiative rates Γ₁^{c,e} = 2ωZ(C_{c,e}ν_a)²/ħ at angular frequency `omega`.
inline AtomRates rates_from_network(const CouplingNetwork& net, double omega) {
  if (!(omega > 0.0)) throw InvalidArgument("omega must be > 0");
  auto rate = [&](double c) {
    const double q = c * net.dipole_voltage;
    return 2.0 * omega * net.line_impedance * q * q / kHbar;
  };
  return AtomRates{rate(net.c_control), rate(net.c_emission), 0.0, 0.0};
}

/// ν_a such that Γ₁ᶜ + Γ₁ᵉ equals `target_gamma1` at `omega` (ν_a of `net` is ignored).
inline double dipole_for_target_rate(const CouplingNetwork& net, double omega,
                                     double target_gamma1) {
  if (!(target_gamma1 > 0.0)) throw InvalidArgument("target rate must be > 0");
  if (!(omega > 0.0)) throw InvalidArgument("omega must be > 0");
  const double c2 = net.c_control * net.c_control + net.c_emission * net.c_emission;
  return std::sqrt(target_gamma1 * kHbar / (2.0 * omega * net.line_impedance * c2));
}

/// Rabi rate Ω = 2V₀C_cν_a/ħ for a control-line drive of travelling-wave power `incident_power`.
inline double rabi_from_power(const CouplingNetwork& net, double incident_power) {
  if (!(incident_power >= 0.0)) throw InvalidArgument("incident power must be >= 0");
  const double v0 = amplitude_from_power(incident_power, net.line_impedance);
  return 2.0 * v0 * net.c_control * net.dipole_voltage / kHbar;
}

/// Same as rabi_from_power but for a drive entering through the emission line.
inline double rabi_from_power_emission(const CouplingNetwork& net, double incident_power) {
  if (!(incident_power >= 0.0)) throw InvalidArgument("incident power must be >= 0");
  const double v0 = amplitude_from_power(incident_power, net.line_impedance);
  return 2.0 * v0 * net.c_emission * net.dipole_voltage / kHbar;
}

/// Linear-response reflection and transmission at detuning δω (rad/s).
inline ScatteringPoint weak_coefficients(const AtomRates& rates, const CouplingNetwork& net,
                                         double detuning) {
  const double g2 = rates.gamma2();
  const std::complex<double> lorentz = 1.0 / std::complex<double>{1.0, -detuning / g2};
  ScatteringPoint p;
  p.r_c = 1.0 - (rates.gamma1_c / g2) * lorentz;
  p.t_ce = -(rates.gamma1_e / g2) * (net.c_control / net.c_emission) * lorentz;
  p.r_e = 1.0 - (rates.gamma1_e / g2) * lorentz;
  return p;
}

/// Emission-line reflection at arbitrary drive strength (drive enters via the emission line).
/// Equals 1 − 2iΓ₁ᵉ⟨σ⁻⟩/Ω with the full steady state, written in a form regular at Ω = 0.
inline std::complex<double> driven_reflection_emission(const AtomRates& rates, const Drive& drive) {
  if (!(drive.rabi >= 0.0)) throw InvalidArgument("rabi must be >= 0");
  const double g2 = rates.gamma2();
  const double d = detail::saturation_denominator(rates, drive);
  const std::complex<double> num{1.0, drive.detuning / g2};
  return 1.0 - (rates.gamma1_e / g2) * num / d;
}

/// Coupling impedance magnitude |Z_C| = 1/(ω(C_c + C_e)).
inline double coupling_impedance(const CouplingNetwork& net, double omega) {
  return 1.0 / (omega * (net.c_control + net.c_emission));
}

/// Fraction of power leaking directly between the lines, |2Z/Z_C|².
inline double direct_leakage(const CouplingNetwork& net, double omega) {
  if (!(omega >= 0.0)) throw InvalidArgument("omega must be >= 0");
  const double x = 2.0 * net.line_impedance * omega * (net.c_control + net.c_emission);
  return x * x;
}

/// Everything besides the radiative rates that sets the atom's linewidth.
struct RatesModel {
  CouplingNetwork network;
  double gamma1_nr = 0.0;  ///< rad/s
  double gamma_phi = 0.0;  ///< rad/s

  /// Full rate set at transition frequency `f10` [Hz]; radiative rates scale with ω.
  AtomRates at(double f10) const {
    AtomRates r = rates_from_network(network, to_angular(f10));
    r.gamma1_nr = gamma1_nr;
    r.gamma_phi = gamma_phi;
    return r;
  }
};

/// Normalised |t_ce/t₀| on a (flux, frequency) grid, row-major in flux.
struct TransmissionMap {
  std::vector<double> dphi;
  std::vector<double> frequency;
  std::vector<double> value;  ///< size dphi.size() * frequency.size()

  double at(std::size_t i_flux, std::size_t j_freq) const {
    return value[i_flux * frequency.size() + j_freq];
  }
};

inline TransmissionMap transmission_map(const FluxQubitParams& qubit, const RatesModel& model,
                                        const std::vector<double>& dphi_grid,
                                        const std::vector<double>& freq_grid) {
  if (dphi_grid.empty() || freq_grid.empty()) throw InvalidArgument("grids must be non-empty");
  TransmissionMap map{dphi_grid, freq_grid, {}};
  map.value.reserve(dphi_grid.size() * freq_grid.size());
  for (double d : dphi_grid) {
    const double f10 = transition_frequency(qubit, d);
    const AtomRates rates = model.at(f10);
    for (double f : freq_grid) {
      map.value.push_back(std::abs(weak_coefficients(rates, model.network, to_angular(f - f10)).t_ce));
    }
  }
  const double t0 = *std::max_element(map.value.begin(), map.value.end());
  if (t0 > 0.0) {
    for (double& v : map.value) v /= t0;
  }
  return map;
}

}  // namespace sps

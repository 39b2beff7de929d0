#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sps/atom_dynamics.hpp"
#include "sps/constants.hpp"
#include "sps/emission.hpp"
#include "sps/error.hpp"
#include "sps/qubit_spectrum.hpp"
#include "sps/scattering.hpp"

namespace sps {

struct LorentzianFit {
  double center = 0.0;     ///< Hz
  double fwhm = 0.0;       ///< Hz
  double amplitude = 0.0;  ///< peak height above offset
  double offset = 0.0;
  double residual_rms = 0.0;
  int iterations = 0;

  double operator()(double f) const {
    const double u = 2.0 * (f - center) / fwhm;
    return offset + amplitude / (1.0 + u * u);
  }
};

struct CircleFit {
  std::complex<double> center;
  double radius = 0.0;
  double residual_rms = 0.0;
};

namespace detail {

inline bool is_monotone(std::span<const double> y) {
  bool inc = true, dec = true;
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (y[i] < y[i - 1]) inc = false;
    if (y[i] > y[i - 1]) dec = false;
  }
  return inc || dec;
}

/// Linear interpolation of the abscissa where y crosses `level` between samples i and j.
inline double crossing(double x0, double y0, double x1, double y1, double level) {
  return (y1 == y0) ? 0.5 * (x0 + x1) : x0 + (level - y0) * (x1 - x0) / (y1 - y0);
}

/// Levenberg–Marquardt refinement of a Lorentzian in normalised units
/// (x in units of the initial width, y in units of the peak value).
inline LorentzianFit refine_lorentzian(const std::vector<double>& x, const std::vector<double>& y,
                                       Eigen::Vector4d theta, int max_iter) {
  // theta = (center, fwhm, amplitude, offset)
  const auto n = static_cast<Eigen::Index>(x.size());
  auto residuals = [&](const Eigen::Vector4d& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    r.resize(n);
    if (jac) jac->resize(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = 2.0 * (x[i] - p[0]) / p[1];
      const double q = 1.0 / (1.0 + u * u);
      r[i] = p[3] + p[2] * q - y[i];
      if (jac) {
        const double dq_du = -2.0 * u * q * q;
        (*jac)(i, 0) = p[2] * dq_du * (-2.0 / p[1]);
        (*jac)(i, 1) = p[2] * dq_du * (-u / p[1]);
        (*jac)(i, 2) = q;
        (*jac)(i, 3) = 1.0;
      }
    }
  };

  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  residuals(theta, r, &jac);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::Matrix4d jtj = jac.transpose() * jac;
    const Eigen::Vector4d g = jac.transpose() * r;
    bool accepted = false;
    Eigen::Vector4d step = Eigen::Vector4d::Zero();
    while (lambda < 1e20) {
      Eigen::Matrix4d a = jtj;
      a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-30);
      step = -a.ldlt().solve(g);
      Eigen::Vector4d trial = theta + step;
      Eigen::VectorXd r_trial;
      residuals(trial, r_trial, nullptr);
      const double c = r_trial.squaredNorm();
      if (std::isfinite(c) && c <= cost) {
        theta = trial;
        cost = c;
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    const double rel = step.cwiseAbs().maxCoeff() / std::max(theta.cwiseAbs().maxCoeff(), 1e-300);
    if (!accepted || rel < 1e-10) {
      // a rejected step at the damping ceiling means no descent direction is left
      residuals(theta, r, nullptr);
      LorentzianFit fit;
      fit.center = theta[0];
      fit.fwhm = std::abs(theta[1]);
      fit.amplitude = theta[2];
      fit.offset = theta[3];
      fit.residual_rms = std::sqrt(r.squaredNorm() / static_cast<double>(n));
      fit.iterations = it;
      return fit;
    }
    residuals(theta, r, &jac);
  }
  throw NonConvergence("Lorentzian fit did not converge in " + std::to_string(max_iter) +
                       " iterations");
}

}  // namespace detail

/// Least-squares fit of offset + amplitude/(1 + (2(f − center)/fwhm)²), started from `guess`.
inline LorentzianFit fit_lorentzian(const std::vector<double>& freq, const std::vector<double>& power,
                                    const LorentzianFit& guess, int max_iter = 200) {
  if (freq.size() != power.size()) throw InvalidArgument("series lengths differ");
  if (freq.size() < 5) throw InvalidArgument("Lorentzian fit needs at least 5 points");
  if (!(guess.fwhm > 0.0)) throw InvalidArgument("initial fwhm must be > 0");
  const double fscale = guess.fwhm;
  double pscale = 0.0;
  for (double p : power) pscale = std::max(pscale, std::abs(p));
  if (pscale == 0.0) throw NoPeak("all-zero power series");
  std::vector<double> x(freq.size()), y(power.size());
  for (std::size_t i = 0; i < freq.size(); ++i) {
    x[i] = (freq[i] - guess.center) / fscale;
    y[i] = power[i] / pscale;
  }
  const Eigen::Vector4d theta0{0.0, 1.0, guess.amplitude / pscale, guess.offset / pscale};
  LorentzianFit fit = detail::refine_lorentzian(x, y, theta0, max_iter);
  fit.center = guess.center + fit.center * fscale;
  fit.fwhm *= fscale;
  fit.amplitude *= pscale;
  fit.offset *= pscale;
  fit.residual_rms *= pscale;
  return fit;
}

/// Same, initialised from the peak sample and its half-maximum crossings.
inline LorentzianFit fit_lorentzian(const std::vector<double>& freq, const std::vector<double>& power,
                                    int max_iter = 200) {
  if (freq.size() != power.size()) throw InvalidArgument("series lengths differ");
  if (freq.size() < 5) throw InvalidArgument("Lorentzian fit needs at least 5 points");
  std::vector<std::size_t> order(freq.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return freq[a] < freq[b]; });
  std::vector<double> f, p;
  for (auto i : order) {
    f.push_back(freq[i]);
    p.push_back(power[i]);
  }
  if (detail::is_monotone(p)) throw NoPeak("power series is monotone");

  const auto peak = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  const double base = *std::min_element(p.begin(), p.end());
  const double half = base + 0.5 * (p[peak] - base);
  double left = f.front(), right = f.back();
  bool has_left = false, has_right = false;
  for (std::size_t i = peak; i > 0; --i) {
    if (p[i - 1] <= half) {
      left = detail::crossing(f[i - 1], p[i - 1], f[i], p[i], half);
      has_left = true;
      break;
    }
  }
  for (std::size_t i = peak; i + 1 < p.size(); ++i) {
    if (p[i + 1] <= half) {
      right = detail::crossing(f[i], p[i], f[i + 1], p[i + 1], half);
      has_right = true;
      break;
    }
  }
  double width = right - left;
  if (has_left && !has_right) width = 2.0 * (f[peak] - left);
  if (has_right && !has_left) width = 2.0 * (right - f[peak]);
  if (!(width > 0.0)) width = (f.back() - f.front()) / static_cast<double>(f.size());

  LorentzianFit guess;
  guess.center = f[peak];
  guess.fwhm = width;
  guess.amplitude = p[peak] - base;
  guess.offset = base;
  return fit_lorentzian(f, p, guess, max_iter);
}

/// Circle through complex points: algebraic (Kåsa) start, then Gauss–Newton on radial residuals.
inline CircleFit fit_circle(std::span<const std::complex<double>> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 3) throw Degenerate("circle fit needs at least 3 points");

  std::complex<double> mean{0.0, 0.0};
  for (const auto& z : points) mean += z;
  mean /= static_cast<double>(n);
  double scale = 0.0;
  for (const auto& z : points) scale = std::max(scale, std::abs(z - mean));
  if (scale == 0.0) throw Degenerate("all points coincide");

  Eigen::MatrixXd xy(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto z = (points[static_cast<std::size_t>(i)] - mean) / scale;
    xy(i, 0) = z.real();
    xy(i, 1) = z.imag();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> spread(xy);
  const auto sv = spread.singularValues();
  if (sv[1] <= 1e-12 * sv[0]) throw Degenerate("points are collinear");

  // Kåsa: x² + y² + D x + E y + F = 0 in the least-squares sense.
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = xy(i, 0);
    a(i, 1) = xy(i, 1);
    a(i, 2) = 1.0;
    b[i] = -(xy(i, 0) * xy(i, 0) + xy(i, 1) * xy(i, 1));
  }
  const Eigen::Vector3d def = a.colPivHouseholderQr().solve(b);
  Eigen::Vector3d p{-0.5 * def[0], -0.5 * def[1], 0.0};
  p[2] = std::sqrt(std::max(p[0] * p[0] + p[1] * p[1] - def[2], 1e-300));

  Eigen::VectorXd r(n);
  Eigen::MatrixXd jac(n, 3);
  auto eval = [&](const Eigen::Vector3d& q, bool with_jac) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dx = xy(i, 0) - q[0];
      const double dy = xy(i, 1) - q[1];
      const double d = std::hypot(dx, dy);
      r[i] = d - q[2];
      if (with_jac) {
        jac(i, 0) = d > 0 ? -dx / d : 0.0;
        jac(i, 1) = d > 0 ? -dy / d : 0.0;
        jac(i, 2) = -1.0;
      }
    }
    return r.squaredNorm();
  };

  double cost = eval(p, true);
  for (int it = 0; it < 100; ++it) {
    const Eigen::Vector3d step = jac.colPivHouseholderQr().solve(-r);
    double t = 1.0;
    Eigen::Vector3d trial = p + step;
    double c = eval(trial, false);
    while (!(c <= cost) && t > 1e-10) {
      t *= 0.5;
      trial = p + t * step;
      c = eval(trial, false);
    }
    if (!(c <= cost)) break;
    p = trial;
    cost = c;
    eval(p, true);
    if (t * step.norm() < 1e-15 * std::max(1.0, p.norm())) break;
  }
  eval(p, false);

  CircleFit fit;
  fit.center = mean + scale * std::complex<double>{p[0], p[1]};
  fit.radius = scale * std::abs(p[2]);
  fit.residual_rms = scale * std::sqrt(r.squaredNorm() / static_cast<double>(n));
  return fit;
}

inline CircleFit fit_circle(const std::vector<std::complex<double>>& points) {
  return fit_circle(std::span<const std::complex<double>>(points));
}

/// Lower bound on Γ₁ᵉ/Γ₁ from the weak-drive r_e circle: the radius Γ₁ᵉ/2Γ₂ itself.
inline double efficiency_bound_from_radius(const CircleFit& fit) {
  if (fit.radius > 1.0 + 1e-6) {
    throw OutOfRange("circle radius " + std::to_string(fit.radius) + " exceeds 1");
  }
  if (!(fit.radius > 0.0)) throw OutOfRange("circle radius must be > 0");
  return fit.radius;
}

struct PiPulseCalibration {
  double dt_pi = 0.0;      ///< s
  double rabi_freq = 0.0;  ///< π/dt_pi [rad/s]
};

/// π-pulse length from the first maximum of the incoherent emission, refined by a
/// parabola through that grid point and its neighbours.
inline PiPulseCalibration calibrate_pi_pulse(const std::vector<RabiSweepPoint>& sweep) {
  if (sweep.size() < 3) throw NoOscillation("sweep needs at least 3 points");
  std::vector<double> inc;
  inc.reserve(sweep.size());
  for (const auto& s : sweep) inc.push_back(s.incoherent_power);
  if (detail::is_monotone(inc)) throw NoOscillation("incoherent power is monotone over the sweep");

  std::size_t k = 0;
  for (std::size_t i = 1; i + 1 < inc.size(); ++i) {
    if (inc[i] > inc[i - 1] && inc[i] >= inc[i + 1]) {
      k = i;
      break;
    }
  }
  if (k == 0) throw NoOscillation("incoherent power has no interior maximum");
  double t_best = sweep[k].pulse_length;
  const double x0 = sweep[k - 1].pulse_length, x1 = sweep[k].pulse_length,
               x2 = sweep[k + 1].pulse_length;
  const double y0 = inc[k - 1], y1 = inc[k], y2 = inc[k + 1];
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double curv = (d12 - d01) / (x2 - x0);
  if (curv < 0.0) {
    // vertex of the interpolating parabola
    t_best = std::clamp(0.5 * (x0 + x1) - d01 / (2.0 * curv), x0, x2);
  }
  return {t_best, std::numbers::pi / t_best};
}

// ---------------------------------------------------------------------------
// Efficiency versus emission frequency.

/// Pure dephasing as a function of flux detuning (rad/s): a base rate, a term linear in
/// |δΦ|, and an optional Gaussian bump in |δΦ|.
struct DephasingModel {
  double base = 0.0;
  double per_flux = 0.0;      ///< rad/s per Φ₀
  double bump_height = 0.0;   ///< rad/s
  double bump_center = 0.0;   ///< |δΦ| of the bump
  double bump_width = 1e-3;   ///< Φ₀

  double operator()(double dphi) const {
    const double a = std::abs(dphi);
    const double u = (a - bump_center) / bump_width;
    return base + per_flux * a + bump_height * std::exp(-0.5 * u * u);
  }
};

struct EfficiencyPoint {
  double frequency;        ///< Hz
  double dphi;             ///< Φ₀
  AtomRates rates;
  CircleFit circle;
  double bound;            ///< fitted Γ₁ᵉ/2Γ₂
  double true_efficiency;  ///< Γ₁ᵉ/Γ₁ of the generating rates
};

struct EfficiencySweepOptions {
  std::size_t detuning_points = 101;
  double detuning_span = 5.0;  ///< in units of Γ₂, symmetric
};

/// Weak-drive r_e sampled uniformly over |δω| ≤ span·Γ₂.
inline std::vector<std::complex<double>> reflection_sweep(const AtomRates& rates,
                                                          const CouplingNetwork& net,
                                                          std::size_t points, double span) {
  if (points < 3) throw InvalidArgument("reflection sweep needs at least 3 points");
  std::vector<std::complex<double>> out;
  out.reserve(points);
  const double g2 = rates.gamma2();
  for (std::size_t i = 0; i < points; ++i) {
    const double u = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(points - 1);
    out.push_back(weak_coefficients(rates, net, u * span * g2).r_e);
  }
  return out;
}

/// For each target frequency: invert the flux, build the rates there, synthesise the
/// weak-drive r_e circle, fit it, and report the radius bound.
template <typename Dephasing>
std::vector<EfficiencyPoint> efficiency_sweep(const FluxQubitParams& qubit, const RatesModel& model,
                                              Dephasing&& dephasing,
                                              const std::vector<double>& targets,
                                              const EfficiencySweepOptions& opts = {}) {
  std::vector<EfficiencyPoint> out;
  out.reserve(targets.size());
  for (double f : targets) {
    const double dphi = flux_for_frequency(qubit, f);
    RatesModel local = model;
    local.gamma_phi = dephasing(dphi);
    const AtomRates rates = local.at(f);
    rates.validate();
    const auto points = reflection_sweep(rates, model.network, opts.detuning_points, opts.detuning_span);
    const CircleFit circle = fit_circle(points);
    out.push_back({f, dphi, rates, circle, efficiency_bound_from_radius(circle),
                   rates.gamma1_e / rates.gamma1()});
  }
  return out;
}

}  // namespace sps

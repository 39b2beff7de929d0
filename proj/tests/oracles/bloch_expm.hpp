#pragma once

// Test-only oracle: exact constant-drive Bloch evolution through the matrix
// exponential of the augmented 4x4 affine generator. Shares nothing with the
// Runge–Kutta path in the library.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <array>

namespace oracle {

struct Rates {
  double gamma1;
  double gamma2;
};

inline Eigen::Matrix4d generator(Rates r, double rabi, double detuning) {
  Eigen::Matrix4d m;
  // s' = M s + b with b = (0, 0, Γ₁); last row keeps the constant 1.
  m << -r.gamma2, -detuning, 0.0, 0.0,
       detuning, -r.gamma2, -rabi, 0.0,
       0.0, rabi, -r.gamma1, r.gamma1,
       0.0, 0.0, 0.0, 0.0;
  return m;
}

inline std::array<double, 3> propagate(std::array<double, 3> s, Rates r, double rabi,
                                       double detuning, double t) {
  const Eigen::Matrix4d u = (generator(r, rabi, detuning) * t).exp();
  const Eigen::Vector4d v = u * Eigen::Vector4d{s[0], s[1], s[2], 1.0};
  return {v[0], v[1], v[2]};
}

inline double p1(const std::array<double, 3>& s) { return 0.5 * (1.0 - s[2]); }

}  // namespace oracle

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles/bloch_expm.hpp"
#include "sps/atom_dynamics.hpp"
#include "sps/constants.hpp"

using namespace sps;

namespace {

AtomRates nominal_rates(double gamma_phi = 0.0) {
  // Γ₁/2π = 12.5 MHz split 1:25 between the control and emission lines.
  const double g1 = to_angular(12.5e6);
  return {g1 / 26.0, g1 * 25.0 / 26.0, 0.0, gamma_phi};
}

detail::Vec3 rhs_at(const BlochState& s, const AtomRates& r, const Drive& d) {
  return detail::bloch_rhs({s.sx, s.sy, s.sz}, r, d);
}

}  // namespace

TEST(SteadyState, UndrivenIsZero) {
  const auto r = nominal_rates();
  EXPECT_EQ(steady_state_sigma_minus(r, {0.0, 1e7}), std::complex<double>(0.0, 0.0));
  EXPECT_EQ(steady_state_population(r, {0.0, 1e7}), 0.0);
}

TEST(SteadyState, WeakResonantValue) {
  const auto sm = steady_state_sigma_minus(nominal_rates(), {to_angular(0.1e6), 0.0});
  // mpmath: −0.0079989761310552249312 i
  EXPECT_NEAR(sm.real(), 0.0, 1e-18);
  EXPECT_NEAR(sm.imag(), -0.0079989761310552249312, 1e-15);
}

TEST(SteadyState, Saturation) {
  const auto r = nominal_rates();
  const Drive strong{1e6 * r.gamma1(), 0.0};
  EXPECT_LT(std::abs(steady_state_sigma_minus(r, strong)), 1e-5);
  EXPECT_NEAR(steady_state_population(r, strong), 0.5, 1e-11);
}

TEST(SteadyState, QuarterPopulationAtUnitSaturation) {
  const auto r = nominal_rates(to_angular(1e6));
  const Drive d{std::sqrt(r.gamma1() * r.gamma2()), 0.0};
  EXPECT_NEAR(steady_state_population(r, d), 0.25, 1e-15);
  const auto traj = evolve(BlochState::ground(), r, d, {0.0, 60.0 / r.gamma1()}, max_step(r, d));
  EXPECT_NEAR(traj.back().p1(), 0.25, 1e-9);
}

// The closed form must be the stationary point of the integrated equations.
TEST(SteadyState, IsFixedPointOfBlochEquations) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const AtomRates r{u(rng) * 1e7, u(rng) * 1e8, u(rng) * 1e7, u(rng) * 5e7};
    const Drive d{u(rng) * 3e8, (u(rng) - 0.5) * 4e8};
    const BlochState s = steady_state(r, d);
    const auto f = rhs_at(s, r, d);
    const double scale = r.gamma1() + r.gamma2() + d.rabi + std::abs(d.detuning);
    for (double c : f) EXPECT_LT(std::abs(c), 1e-13 * scale);
    EXPECT_LE(std::abs(steady_state_sigma_minus(r, d)), 0.5);
    EXPECT_GE(steady_state_population(r, d), 0.0);
    EXPECT_LT(steady_state_population(r, d), 0.5);
  }
}

TEST(SteadyState, LinearAtWeakDrive) {
  const auto r = nominal_rates(to_angular(0.7e6));
  const double omax = std::sqrt(1e-4 * r.gamma1() * r.gamma2());
  for (double detune : {0.0, 0.5 * r.gamma2(), -3.0 * r.gamma2()}) {
    const double ref = std::abs(steady_state_sigma_minus(r, {1e-6 * omax, detune})) / (1e-6 * omax);
    for (double f : {0.1, 0.5, 1.0}) {
      const double v = std::abs(steady_state_sigma_minus(r, {f * omax, detune})) / (f * omax);
      EXPECT_NEAR(v / ref, 1.0, 0.01);
    }
  }
}

TEST(Evolve, FreeDecayFromExcitedState) {
  const auto r = nominal_rates();
  const double g1 = r.gamma1();
  const auto traj = evolve(BlochState::excited(), r, Drive{}, {0.0, 5.0 / g1}, max_step(r, Drive{}));
  for (std::size_t i = 0; i < traj.size(); ++i) {
    EXPECT_NEAR(traj.states[i].p1(), std::exp(-g1 * traj.times[i]), 1e-6);
  }
}

TEST(Evolve, GroundStateIsFixedPoint) {
  const auto r = nominal_rates();
  const auto traj = evolve(BlochState::ground(), r, Drive{}, {0.0, 1e-7}, 1e-10);
  for (const auto& s : traj.states) {
    EXPECT_EQ(s.sx, 0.0);
    EXPECT_EQ(s.sy, 0.0);
    EXPECT_EQ(s.sz, 1.0);
  }
}

TEST(Evolve, IdealPiRotation) {
  const AtomRates none{};
  const double rabi = to_angular(76.923e6);
  const Drive d{rabi, 0.0};
  const auto traj = evolve(BlochState::ground(), none, d, {0.0, std::numbers::pi / rabi}, max_step(none, d));
  EXPECT_NEAR(traj.back().p1(), 1.0, 1e-8);
}

TEST(Evolve, RejectsTooLargeStep) {
  const auto r = nominal_rates();
  const Drive d{to_angular(76.923e6), 0.0};
  EXPECT_THROW(evolve(BlochState::ground(), r, d, {0.0, 1e-8}, 2.0 * max_step(r, d)), StepTooLarge);
  EXPECT_THROW(evolve(BlochState::ground(), r, d, {0.0, 1e-8}, 0.0), InvalidArgument);
}

TEST(Evolve, TimeDependentEnvelopeChecksBoundEverywhere) {
  const auto r = nominal_rates();
  const double rabi = to_angular(500e6);
  auto env = [&](double t) { return Drive{t > 5e-9 ? rabi : 0.0, 0.0}; };
  EXPECT_THROW(evolve(BlochState::ground(), r, env, {0.0, 1e-8}, 1e-10), StepTooLarge);
}

TEST(Evolve, StaysInBlochBall) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const AtomRates r{u(rng) * 1e7, u(rng) * 1e8, 0.0, u(rng) * 2e7};
    const Drive d{u(rng) * 1e9, (u(rng) - 0.5) * 1e9};
    const double phi = 2 * std::numbers::pi * u(rng), theta = std::numbers::pi * u(rng);
    const BlochState s0{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
    const auto traj = evolve(s0, r, d, {0.0, 2e-7}, max_step(r, d));
    for (const auto& s : traj.states) EXPECT_LE(s.norm2(), 1.0 + 1e-9);
  }
}

TEST(Evolve, ConvergesToSteadyStateFromAnyStart) {
  const auto r = nominal_rates(to_angular(0.5e6));
  const Drive d{1.3 * std::sqrt(r.gamma1() * r.gamma2()), -0.8 * r.gamma2()};
  const BlochState target = steady_state(r, d);
  for (const BlochState s0 : {BlochState::ground(), BlochState::excited(), BlochState{1.0, 0.0, 0.0},
                              BlochState{0.0, -0.6, 0.8}}) {
    const auto end = evolve(s0, r, d, {0.0, 60.0 / r.gamma1()}, max_step(r, d)).back();
    EXPECT_NEAR(end.sx, target.sx, 1e-8);
    EXPECT_NEAR(end.sy, target.sy, 1e-8);
    EXPECT_NEAR(end.sz, target.sz, 1e-8);
  }
}

TEST(Evolve, TrajectoriesContract) {
  const auto r = nominal_rates(to_angular(0.3e6));
  const Drive d{to_angular(20e6), to_angular(3e6)};
  const double dt = max_step(r, d);
  const auto a = evolve(BlochState::ground(), r, d, {0.0, 3e-7}, dt);
  const auto b = evolve(BlochState{0.3, -0.7, -0.5}, r, d, {0.0, 3e-7}, dt);
  double prev = 1e9;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dx = a.states[i].sx - b.states[i].sx;
    const double dy = a.states[i].sy - b.states[i].sy;
    const double dz = a.states[i].sz - b.states[i].sz;
    const double n = std::sqrt(dx * dx + dy * dy + dz * dz);
    EXPECT_LE(n, prev * (1.0 + 1e-12));
    prev = n;
  }
}

TEST(PulseResponse, ZeroLengthIsGround) {
  const auto s = pulse_response(nominal_rates(), {PulseShape::rectangular, 0.0, 1e9});
  EXPECT_EQ(s.sz, 1.0);
  EXPECT_EQ(s.p1(), 0.0);
}

TEST(PulseResponse, HalfPiGivesEqualSuperposition) {
  const double rabi = to_angular(50e6);
  const auto s = pulse_response(AtomRates{}, {PulseShape::rectangular, 0.5 * std::numbers::pi / rabi, rabi});
  EXPECT_NEAR(s.sz, 0.0, 1e-9);
  EXPECT_NEAR(std::abs(s.sigma_minus()), 0.5, 1e-9);
}

TEST(PulseResponse, NominalPulseWithDecayMatchesExpmOracle) {
  const auto r = nominal_rates();
  const double rabi = to_angular(76.923e6);
  const auto s = pulse_response(r, {PulseShape::rectangular, 6.5e-9, rabi});
  // mpmath expm, 40 digits (tests/oracles/freeze_values.py)
  EXPECT_NEAR(s.p1(), 0.82988063750680216335, 1e-9);
  EXPECT_NEAR(s.sx, 0.0, 1e-12);
  EXPECT_NEAR(s.sy, -0.27148357163408466777, 1e-9);
  EXPECT_NEAR(s.sz, -0.65976127501360432671, 1e-9);

  // and against an in-process expm for a spread of detunings
  for (double det : {-2e7, 0.0, 5e7, 2e8}) {
    const auto got = pulse_response(r, {PulseShape::rectangular, 6.5e-9, rabi}, det);
    const auto want = oracle::propagate({0, 0, 1}, {r.gamma1(), r.gamma2()}, rabi, det, 6.5e-9);
    EXPECT_NEAR(got.sx, want[0], 1e-9);
    EXPECT_NEAR(got.sy, want[1], 1e-9);
    EXPECT_NEAR(got.sz, want[2], 1e-9);
  }
}

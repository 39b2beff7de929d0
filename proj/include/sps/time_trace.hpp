#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <thread>
#include <vector>

#include "sps/atom_dynamics.hpp"
#include "sps/emission.hpp"
#include "sps/error.hpp"
#include "sps/filter.hpp"
#include "sps/noise.hpp"

namespace sps {

struct PulseTrain {
  PulseEnvelope pulse;
  double period = 100e-9;  ///< T [s]
  int count = 1;

  void validate() const {
    if (!(period > pulse.duration)) throw InvalidArgument("train period must exceed the pulse length");
    if (count < 1) throw InvalidArgument("pulse count must be >= 1");
  }
};

/// Digitiser + amplifier model: additive white noise on the amplitude, FIR low-pass,
/// squaring, idle-trace subtraction and averaging.
struct MeasurementChain {
  double sample_interval = 4e-9;    ///< s
  double filter_bandwidth = 30e6;   ///< Hz; 0 disables the filter
  double noise_sigma = 0.0;         ///< per-sample noise on the amplitude [√W]
  std::int64_t averages = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(sample_interval > 0.0)) throw InvalidArgument("sample interval must be > 0");
    if (averages < 1) throw InvalidArgument("averages must be >= 1");
    if (!(noise_sigma >= 0.0)) throw InvalidArgument("noise sigma must be >= 0");
    if (!(filter_bandwidth >= 0.0)) throw InvalidArgument("filter bandwidth must be >= 0");
  }
};

/// Sample instants n·dt covering count·T.
inline std::vector<double> trace_times(const PulseTrain& train, const MeasurementChain& chain) {
  const double record = train.period * static_cast<double>(train.count);
  const auto n = static_cast<std::size_t>(std::llround(record / chain.sample_interval));
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = chain.sample_interval * static_cast<double>(i);
  return t;
}

/// Noise-free emitted amplitude √W(t). Pulse k starts at k·T and leaves the atom at
/// P₁(Δt) from pulse_response; the excitation then decays freely until the next pulse ends.
inline std::vector<double> emission_amplitude(const AtomRates& rates, double omega,
                                              const PulseTrain& train,
                                              const std::vector<double>& times) {
  const double p1 = pulse_response(rates, train.pulse).p1();
  const double w0 = instantaneous_power(rates, omega, p1, Line::emission);
  const double g1 = rates.gamma1();
  std::vector<double> a(times.size(), 0.0);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    double t_prep = -1.0;
    for (int k = 0; k < train.count; ++k) {
      const double tk = train.period * k + train.pulse.duration;
      if (tk <= t) t_prep = tk;
    }
    if (t_prep >= 0.0) a[i] = std::sqrt(w0) * std::exp(-0.5 * g1 * (t - t_prep));
  }
  return a;
}

namespace detail {

inline constexpr std::int64_t kRepetitionBlock = 2048;

/// Sum over repetitions [first, last) of filt(a + n₁)² − filt(n₂)², accumulated in index order.
inline std::vector<double> accumulate_block(const std::vector<double>& filtered_signal,
                                            const FirFilter& filter, const MeasurementChain& chain,
                                            std::int64_t first, std::int64_t last) {
  const std::size_t n = filtered_signal.size();
  std::vector<double> sum(n, 0.0), noise_on(n), noise_off(n), f_on(n), f_off(n);
  for (std::int64_t r = first; r < last; ++r) {
    CounterRng rng(chain.seed, static_cast<std::uint64_t>(r));
    for (std::size_t i = 0; i < n; ++i) noise_on[i] = chain.noise_sigma * rng.gaussian();
    for (std::size_t i = 0; i < n; ++i) noise_off[i] = chain.noise_sigma * rng.gaussian();
    filter.apply_into(noise_on, f_on);
    filter.apply_into(noise_off, f_off);
    for (std::size_t i = 0; i < n; ++i) {
      const double on = filtered_signal[i] + f_on[i];
      sum[i] += on * on - f_off[i] * f_off[i];
    }
  }
  return sum;
}

}  // namespace detail

/// Averaged, idle-subtracted emission power trace. Bit-identical for a given seed
/// regardless of `threads`: repetitions are summed in fixed blocks, blocks in index order.
inline EmissionTrace time_trace_experiment(const AtomRates& rates, double omega,
                                           const PulseTrain& train, const MeasurementChain& chain,
                                           unsigned threads = 1) {
  train.validate();
  chain.validate();
  EmissionTrace out;
  out.times = trace_times(train, chain);
  const FirFilter filter = design_lowpass(chain.filter_bandwidth, chain.sample_interval);
  const std::vector<double> signal =
      filter.apply(emission_amplitude(rates, omega, train, out.times));

  if (chain.noise_sigma == 0.0) {
    out.power.resize(signal.size());
    std::transform(signal.begin(), signal.end(), out.power.begin(), [](double y) { return y * y; });
    return out;
  }

  const std::int64_t n_blocks =
      (chain.averages + detail::kRepetitionBlock - 1) / detail::kRepetitionBlock;
  std::vector<std::vector<double>> partial(static_cast<std::size_t>(n_blocks));
  auto work = [&](std::int64_t b) {
    const std::int64_t first = b * detail::kRepetitionBlock;
    const std::int64_t last = std::min(chain.averages, first + detail::kRepetitionBlock);
    partial[static_cast<std::size_t>(b)] = detail::accumulate_block(signal, filter, chain, first, last);
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_blocks)));
  if (threads == 1) {
    for (std::int64_t b = 0; b < n_blocks; ++b) work(b);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::int64_t b = w; b < n_blocks; b += threads) work(b);
      });
    }
  }

  out.power.assign(signal.size(), 0.0);
  for (const auto& block : partial) {
    for (std::size_t i = 0; i < block.size(); ++i) out.power[i] += block[i];
  }
  const double inv = 1.0 / static_cast<double>(chain.averages);
  for (double& p : out.power) p *= inv;
  return out;
}

}  // namespace sps

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sps/sps.hpp"
#include "sps/harness/config.hpp"
#include "sps/harness/output.hpp"

namespace sps::harness {

using nlohmann::json;

struct OutputFile {
  std::string name;
  std::string content;
};

struct RunManifest {
  json document;
  std::filesystem::path directory;
};

struct RunOptions {
  unsigned threads = 1;
};

/// Physical device assembled from the shared config keys, in SI and rad/s.
struct Device {
  FluxQubitParams qubit;
  RatesModel model;

  double gap_omega() const { return to_angular(qubit.gap); }
  AtomRates rates_at_gap() const { return model.at(qubit.gap); }
};

inline double mhz_to_rate(double mhz) { return to_angular(mhz * 1e6); }

inline Device device_from(const Scenario& sc) {
  Device d;
  d.qubit.gap = sc.number("qubit.gap_ghz") * 1e9;
  d.qubit.persistent_current = sc.number("qubit.persistent_current_na") * 1e-9;
  auto& net = d.model.network;
  net.c_control = sc.number("network.c_control_ff") * 1e-15;
  net.c_emission = sc.number("network.c_emission_ff") * 1e-15;
  net.line_impedance = sc.number("network.impedance_ohm");
  net.dipole_voltage = sc.has("network.dipole_uv")
                           ? sc.number("network.dipole_uv") * 1e-6
                           : dipole_for_target_rate(net, d.gap_omega(),
                                                    mhz_to_rate(sc.number("calibration.gamma1_mhz")));
  d.model.gamma1_nr = mhz_to_rate(sc.number("rates.gamma_nr_mhz"));
  d.model.gamma_phi = mhz_to_rate(sc.number("rates.gamma_phi_mhz"));
  return d;
}

/// n points from lo to hi inclusive; a single point sits at lo.
inline std::vector<double> linspace(double lo, double hi, std::int64_t n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i)] =
        n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return v;
}

inline json rates_json(const AtomRates& r) {
  return {{"gamma1_c_rad_s", r.gamma1_c},   {"gamma1_e_rad_s", r.gamma1_e},
          {"gamma1_nr_rad_s", r.gamma1_nr}, {"gamma_phi_rad_s", r.gamma_phi},
          {"gamma1_rad_s", r.gamma1()},     {"gamma2_rad_s", r.gamma2()}};
}

inline json circle_json(const CircleFit& fit) {
  return {{"center_re", fit.center.real()},
          {"center_im", fit.center.imag()},
          {"radius", fit.radius},
          {"residual_rms", fit.residual_rms}};
}

inline std::string points_csv(const std::vector<std::complex<double>>& pts) {
  CsvTable t{"re", "im"};
  for (const auto& z : pts) t.row({z.real(), z.imag()});
  return t.text();
}

// ---------------------------------------------------------------------------
// Per-kind pipelines. Each returns its data files and, optionally, fit records.

struct KindResult {
  std::vector<OutputFile> files;
  json fits;  // null when the kind produces no fits
};

inline KindResult run_spectroscopy(const Scenario& sc, const Device& dev) {
  const auto flux = linspace(sc.number("spectroscopy.flux_min_mphi0") * 1e-3,
                             sc.number("spectroscopy.flux_max_mphi0") * 1e-3,
                             sc.integer("spectroscopy.flux_points"));
  const auto freq = linspace(sc.number("spectroscopy.freq_min_ghz") * 1e9,
                             sc.number("spectroscopy.freq_max_ghz") * 1e9,
                             sc.integer("spectroscopy.freq_points"));
  const TransmissionMap map = transmission_map(dev.qubit, dev.model, flux, freq);

  CsvTable grid{"dphi_phi0", "frequency_hz", "t_norm"};
  for (std::size_t i = 0; i < flux.size(); ++i) {
    for (std::size_t j = 0; j < freq.size(); ++j) grid.row({flux[i], freq[j], map.at(i, j)});
  }
  CsvTable ridge{"dphi_phi0", "frequency_hz"};
  for (double d : flux) ridge.row({d, transition_frequency(dev.qubit, d)});
  return {{{"transmission_map.csv", grid.text()}, {"ridge.csv", ridge.text()}}, nullptr};
}

inline KindResult run_smith(const Scenario& sc, const Device& dev) {
  const double pmin = sc.number("smith.power_min_dbm");
  const double pmax = sc.number("smith.power_max_dbm");
  const double pstep = sc.number("smith.power_step_db");
  const double atten = sc.number("smith.attenuation_db");
  const double noise = sc.number("smith.noise_sigma");
  const auto n_power = static_cast<std::int64_t>(std::floor((pmax - pmin) / pstep + 1e-9)) + 1;
  const double span = mhz_to_rate(sc.number("smith.detuning_span_mhz"));
  const auto detuning = linspace(-span, span, sc.integer("smith.detuning_points"));
  const AtomRates rates = dev.rates_at_gap();

  CsvTable table{"power_dbm", "rabi_rad_s", "detuning_rad_s", "re", "im"};
  json fits = json::array();
  for (std::int64_t k = 0; k < n_power; ++k) {
    const double dbm = pmin + pstep * static_cast<double>(k);
    const double rabi = rabi_from_power_emission(dev.model.network, dbm_to_watt(dbm - atten));
    CounterRng rng(sc.seed(), static_cast<std::uint64_t>(k));
    std::vector<std::complex<double>> pts;
    for (double dw : detuning) {
      auto r = driven_reflection_emission(rates, Drive{rabi, dw, dev.qubit.gap});
      if (noise > 0.0) r += std::complex<double>{noise * rng.gaussian(), noise * rng.gaussian()};
      pts.push_back(r);
      table.row({dbm, rabi, dw, r.real(), r.imag()});
    }
    json rec = {{"power_dbm", dbm},
                {"rabi_rad_s", rabi},
                {"saturation", rabi * rabi / (rates.gamma1() * rates.gamma2())},
                {"input_digest", sha256_hex(points_csv(pts))}};
    try {
      const CircleFit fit = fit_circle(pts);
      rec["circle"] = circle_json(fit);
      rec["efficiency_bound"] = fit.radius <= 1.0 + 1e-6 ? json(fit.radius) : json(nullptr);
    } catch (const Error& e) {
      rec["circle"] = nullptr;
      rec["error"] = e.what();
    }
    fits.push_back(rec);
  }
  json out = {{"weak_drive_radius", rates.gamma1_e / (2.0 * rates.gamma2())},
              {"rates", rates_json(rates)},
              {"records", fits}};
  return {{{"smith.csv", table.text()}}, out};
}

inline KindResult run_rabi(const Scenario& sc, const Device& dev) {
  const double step = sc.number("rabi.pulse_step_ns") * 1e-9;
  const double pmax = sc.number("rabi.pulse_max_ns") * 1e-9;
  const auto n = static_cast<std::int64_t>(std::floor(pmax / step + 1e-9)) + 1;
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = step * static_cast<double>(i);

  const AtomRates rates = dev.rates_at_gap();
  const double rabi = mhz_to_rate(sc.number("rabi.rabi_mhz"));
  const auto sweep = rabi_sweep(rates, rabi, grid, sc.number("rabi.period_ns") * 1e-9,
                                mhz_to_rate(sc.number("rabi.detuning_mhz")));

  CsvTable table{"pulse_s", "coherent_amp", "coherent_re", "coherent_im", "incoherent"};
  for (const auto& p : sweep) {
    table.row({p.pulse_length, p.coherent_amp, p.mean_sigma_minus.real(), p.mean_sigma_minus.imag(),
               p.incoherent_power});
  }
  json rec = {{"input_digest", sha256_hex(table.text())}, {"rates", rates_json(rates)},
              {"rabi_rad_s", rabi}};
  try {
    const auto cal = calibrate_pi_pulse(sweep);
    rec["pi_pulse"] = {{"dt_pi_s", cal.dt_pi}, {"rabi_freq_rad_s", cal.rabi_freq}};
  } catch (const Error& e) {
    rec["pi_pulse"] = nullptr;
    rec["error"] = e.what();
  }
  return {{{"rabi.csv", table.text()}}, rec};
}

inline KindResult run_wavepacket(const Scenario& sc, const Device& dev) {
  const AtomRates rates = dev.rates_at_gap();
  rates.validate();
  const double omega = dev.gap_omega();
  const auto times = linspace(0.0, sc.number("wavepacket.t_max_ns") * 1e-9, sc.integer("wavepacket.t_points"));
  const EmissionTrace packet = photon_wavepacket(rates, omega, times);
  CsvTable wp{"time_s", "power_W"};
  for (std::size_t i = 0; i < times.size(); ++i) wp.row({packet.times[i], packet.power[i]});

  const double span = sc.number("wavepacket.span_mhz") * 1e6;
  const auto freq = linspace(dev.qubit.gap - span, dev.qubit.gap + span, sc.integer("wavepacket.spectrum_points"));
  auto psd = wavepacket_spectrum(rates, omega, freq);
  if (const double rel = sc.number("wavepacket.noise_relative"); rel > 0.0) {
    const double peak = *std::max_element(psd.begin(), psd.end());
    CounterRng rng(sc.seed(), 0);
    for (double& p : psd) p += rel * peak * rng.gaussian();
  }
  CsvTable spec{"frequency_hz", "psd_J_per_Hz"};
  for (std::size_t i = 0; i < freq.size(); ++i) spec.row({freq[i], psd[i]});

  json rec = {{"input_digest", sha256_hex(spec.text())},
              {"expected_fwhm_hz", to_cyclic(2.0 * rates.gamma2())},
              {"emitted_energy_J", emitted_energy(rates, omega, 1.0, Line::emission)},
              {"rates", rates_json(rates)}};
  try {
    const LorentzianFit fit = fit_lorentzian(freq, psd);
    rec["lorentzian"] = {{"center_hz", fit.center},       {"fwhm_hz", fit.fwhm},
                         {"amplitude", fit.amplitude},    {"offset", fit.offset},
                         {"residual_rms", fit.residual_rms}, {"iterations", fit.iterations}};
  } catch (const Error& e) {
    rec["lorentzian"] = nullptr;
    rec["error"] = e.what();
  }
  return {{{"wavepacket.csv", wp.text()}, {"spectrum.csv", spec.text()}}, rec};
}

inline KindResult run_timetrace(const Scenario& sc, const Device& dev, const RunOptions& opts) {
  const AtomRates rates = dev.rates_at_gap();
  rates.validate();
  const double omega = dev.gap_omega();
  PulseTrain train;
  train.pulse.duration = sc.number("timetrace.pulse_ns") * 1e-9;
  train.pulse.rabi_peak = mhz_to_rate(sc.number("timetrace.rabi_mhz"));
  train.period = sc.number("timetrace.period_ns") * 1e-9;
  train.count = static_cast<int>(sc.integer("timetrace.count"));
  MeasurementChain chain;
  chain.sample_interval = sc.number("timetrace.sample_ns") * 1e-9;
  chain.filter_bandwidth = sc.number("timetrace.filter_mhz") * 1e6;
  chain.noise_sigma = sc.number("timetrace.noise_relative") *
                      std::sqrt(instantaneous_power(rates, omega, 1.0, Line::emission));
  chain.averages = sc.integer("timetrace.averages");
  chain.seed = sc.seed();

  const EmissionTrace trace = time_trace_experiment(rates, omega, train, chain, opts.threads);
  MeasurementChain clean = chain;
  clean.noise_sigma = 0.0;
  const EmissionTrace expected = time_trace_experiment(rates, omega, train, clean);

  CsvTable t{"time_s", "power_W"};
  for (std::size_t i = 0; i < trace.times.size(); ++i) t.row({trace.times[i], trace.power[i]});
  CsvTable e{"time_s", "power_W"};
  for (std::size_t i = 0; i < expected.times.size(); ++i) e.row({expected.times[i], expected.power[i]});
  return {{{"trace.csv", t.text()}, {"expected.csv", e.text()}}, nullptr};
}

inline KindResult run_efficiency(const Scenario& sc, const Device& dev) {
  const auto targets = linspace(sc.number("efficiency.freq_min_ghz") * 1e9,
                                sc.number("efficiency.freq_max_ghz") * 1e9, sc.integer("efficiency.points"));
  DephasingModel deph;
  deph.base = dev.model.gamma_phi;
  deph.per_flux = mhz_to_rate(sc.number("dephasing.slope_mhz_per_mphi0")) * 1e3;
  deph.bump_height = mhz_to_rate(sc.number("dephasing.bump_height_mhz"));
  deph.bump_center = flux_for_frequency(dev.qubit, sc.number("dephasing.bump_freq_ghz") * 1e9);
  deph.bump_width = sc.number("dephasing.bump_width_mphi0") * 1e-3;
  EfficiencySweepOptions opts;
  opts.detuning_points = static_cast<std::size_t>(sc.integer("efficiency.detuning_points"));

  const auto sweep = efficiency_sweep(dev.qubit, dev.model, deph, targets, opts);
  CsvTable table{"frequency_hz", "dphi_phi0", "gamma_phi_rad_s", "bound", "true_efficiency"};
  json records = json::array();
  for (const auto& p : sweep) {
    table.row({p.frequency, p.dphi, p.rates.gamma_phi, p.bound, p.true_efficiency});
    const auto pts = reflection_sweep(p.rates, dev.model.network, opts.detuning_points, opts.detuning_span);
    records.push_back({{"frequency_hz", p.frequency},
                       {"dphi_phi0", p.dphi},
                       {"input_digest", sha256_hex(points_csv(pts))},
                       {"circle", circle_json(p.circle)},
                       {"efficiency_bound", p.bound},
                       {"rates", rates_json(p.rates)}});
  }
  return {{{"efficiency.csv", table.text()}}, json{{"records", records}}};
}

// ---------------------------------------------------------------------------

/// Output directory precedence: explicit override, config key, $SPS_OUTPUT_ROOT/<kind>, ./sps_out/<kind>.
inline std::filesystem::path resolve_output_dir(const Scenario& sc, const std::string& override_dir) {
  if (!override_dir.empty()) return override_dir;
  if (sc.has("output_dir")) return sc.text("output_dir");
  const char* root = std::getenv("SPS_OUTPUT_ROOT");
  const std::filesystem::path base = (root != nullptr && *root != '\0') ? root : "sps_out";
  return base / sc.kind();
}

/// Executes the scenario, writes its CSV/JSON outputs and manifest.json into `dir`.
inline RunManifest run(const Scenario& sc, const std::filesystem::path& dir, const RunOptions& opts = {}) {
  const Device dev = device_from(sc);
  KindResult result;
  const auto& kind = sc.kind();
  if (kind == "spectroscopy") result = run_spectroscopy(sc, dev);
  else if (kind == "smith_power_sweep") result = run_smith(sc, dev);
  else if (kind == "rabi") result = run_rabi(sc, dev);
  else if (kind == "wavepacket") result = run_wavepacket(sc, dev);
  else if (kind == "timetrace") result = run_timetrace(sc, dev, opts);
  else if (kind == "efficiency_sweep") result = run_efficiency(sc, dev);
  else throw ConfigError({{"kind", "unknown scenario kind '" + kind + "'; allowed kinds: " + allowed_kinds()}});

  if (!result.fits.is_null()) result.files.push_back({"fits.json", result.fits.dump(2) + "\n"});

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

  json outputs = json::array();
  for (const auto& f : result.files) {
    write_file(dir / f.name, f.content);
    outputs.push_back({{"file", f.name}, {"sha256", sha256_hex(f.content)}, {"bytes", f.content.size()}});
  }
  json params = json::object();
  for (const auto& [k, v] : sc.parameters()) params[k] = v;
  params["network.dipole_uv.resolved"] = format_double(dev.model.network.dipole_voltage * 1e6);

  RunManifest m;
  m.directory = dir;
  m.document = {{"toolkit", "sps"},
                {"version", kVersion},
                {"timestamp", timestamp_utc()},
                {"kind", kind},
                {"seed", sc.seed()},
                {"scenario_digest", sha256_hex(sc.canonical())},
                {"parameters", params},
                {"outputs", outputs}};
  write_file(dir / "manifest.json", m.document.dump(2) + "\n");
  return m;
}

}  // namespace sps::harness

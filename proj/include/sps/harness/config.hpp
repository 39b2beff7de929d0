#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sps/error.hpp"
#include "sps/qubit_spectrum.hpp"

namespace sps::harness {

struct Diagnostic {
  std::string key;  ///< dotted key path, or "line N" for syntax problems
  std::string message;
};

inline std::string format(const Diagnostic& d) { return d.key + ": " + d.message; }

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<Diagnostic> diags)
      : Error("ConfigError: " + join(diags)), diagnostics_(std::move(diags)) {}
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  static std::string join(const std::vector<Diagnostic>& diags) {
    std::string s;
    for (const auto& d : diags) s += (s.empty() ? "" : "; ") + format(d);
    return s;
  }
  std::vector<Diagnostic> diagnostics_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("IoError: " + what) {}
};

// ---------------------------------------------------------------------------
// Schema

enum class ValueType { number, integer, text };

struct KeySpec {
  std::string_view key;
  ValueType type;
  std::string_view section;        ///< "" for keys shared by every kind
  std::string_view default_value;  ///< empty: optional without default (or required)
  double lower = -std::numeric_limits<double>::infinity();
  bool lower_open = false;
  double upper = std::numeric_limits<double>::infinity();
  bool upper_open = false;
  std::string_view doc = {};
};

inline constexpr std::string_view kKinds[] = {"spectroscopy", "smith_power_sweep", "rabi",
                                              "wavepacket",   "timetrace",         "efficiency_sweep"};

inline std::string allowed_kinds() {
  std::string s;
  for (auto k : kKinds) s += (s.empty() ? "" : ", ") + std::string(k);
  return s;
}

/// Config sections each scenario kind may use besides the shared ones.
inline std::vector<std::string_view> sections_for(std::string_view kind) {
  if (kind == "spectroscopy") return {"spectroscopy"};
  if (kind == "smith_power_sweep") return {"smith"};
  if (kind == "rabi") return {"rabi"};
  if (kind == "wavepacket") return {"wavepacket"};
  if (kind == "timetrace") return {"timetrace"};
  if (kind == "efficiency_sweep") return {"efficiency", "dephasing"};
  return {};
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// clang-format off
inline const std::vector<KeySpec>& schema() {
  using V = ValueType;
  static const std::vector<KeySpec> keys = {
    {"kind", V::text, "", "", -kInf, false, kInf, false, "scenario kind"},
    {"seed", V::integer, "", "0", 0, false, kInf, false, "master RNG seed"},
    {"output_dir", V::text, "", "", -kInf, false, kInf, false, "output directory"},

    {"qubit.gap_ghz", V::number, "", "6.728", 0, true, kInf, false, "tunnelling gap Δ/h [GHz]"},
    {"qubit.persistent_current_na", V::number, "", "24", 0, false, kInf, false, "I_p [nA]"},
    {"network.c_control_ff", V::number, "", "1", 0, true, kInf, false, "C_c [fF]"},
    {"network.c_emission_ff", V::number, "", "5", 0, true, kInf, false, "C_e [fF]"},
    {"network.impedance_ohm", V::number, "", "50", 0, true, kInf, false, "line impedance Z [Ω]"},
    {"network.dipole_uv", V::number, "", "", 0, true, kInf, false, "ν_a [µV]; calibrated when absent"},
    {"calibration.gamma1_mhz", V::number, "", "12.5", 0, true, kInf, false, "radiative Γ₁/2π at the gap used to calibrate ν_a [MHz]"},
    {"rates.gamma_phi_mhz", V::number, "", "0", 0, false, kInf, false, "pure dephasing γ/2π [MHz]"},
    {"rates.gamma_nr_mhz", V::number, "", "0", 0, false, kInf, false, "non-radiative Γ₁ⁿʳ/2π [MHz]"},

    {"spectroscopy.flux_min_mphi0", V::number, "spectroscopy", "-50", -500, true, 500, true, "flux grid start [mΦ₀]"},
    {"spectroscopy.flux_max_mphi0", V::number, "spectroscopy", "50", -500, true, 500, true, "flux grid end [mΦ₀]"},
    {"spectroscopy.flux_points", V::integer, "spectroscopy", "101", 1, false, 100000, false, "flux grid size"},
    {"spectroscopy.freq_min_ghz", V::number, "spectroscopy", "6.5", 0, true, kInf, false, "frequency grid start [GHz]"},
    {"spectroscopy.freq_max_ghz", V::number, "spectroscopy", "9.1", 0, true, kInf, false, "frequency grid end [GHz]"},
    {"spectroscopy.freq_points", V::integer, "spectroscopy", "261", 1, false, 100000, false, "frequency grid size"},

    {"smith.power_min_dbm", V::number, "smith", "-149", -kInf, false, 30, false, "weakest probe power [dBm]"},
    {"smith.power_max_dbm", V::number, "smith", "-125", -kInf, false, 30, false, "strongest probe power [dBm]"},
    {"smith.power_step_db", V::number, "smith", "3", 0, true, kInf, false, "probe power step [dB]"},
    {"smith.attenuation_db", V::number, "smith", "0", 0, false, kInf, false, "attenuation between source and sample [dB]"},
    {"smith.detuning_span_mhz", V::number, "smith", "40", 0, true, kInf, false, "half-span of the detuning sweep [MHz]"},
    {"smith.detuning_points", V::integer, "smith", "201", 3, false, 100000, false, "detuning points per power"},
    {"smith.noise_sigma", V::number, "smith", "0", 0, false, kInf, false, "complex Gaussian noise per quadrature on r_e"},

    {"rabi.rabi_mhz", V::number, "rabi", "76.923", 0, true, kInf, false, "Rabi frequency Ω/2π [MHz]"},
    {"rabi.pulse_max_ns", V::number, "rabi", "30", 0, true, kInf, false, "longest pulse [ns]"},
    {"rabi.pulse_step_ns", V::number, "rabi", "0.1", 0, true, kInf, false, "pulse length step [ns]"},
    {"rabi.period_ns", V::number, "rabi", "100", 0, true, kInf, false, "train period T [ns]"},
    {"rabi.detuning_mhz", V::number, "rabi", "0", -kInf, false, kInf, false, "drive detuning δω/2π [MHz]"},

    {"wavepacket.t_max_ns", V::number, "wavepacket", "100", 0, true, kInf, false, "time window [ns]"},
    {"wavepacket.t_points", V::integer, "wavepacket", "501", 2, false, 10000000, false, "time samples"},
    {"wavepacket.span_mhz", V::number, "wavepacket", "100", 0, true, kInf, false, "spectrum half-span [MHz]"},
    {"wavepacket.spectrum_points", V::integer, "wavepacket", "401", 5, false, 10000000, false, "spectrum samples"},
    {"wavepacket.noise_relative", V::number, "wavepacket", "0", 0, false, kInf, false, "Gaussian noise on the spectrum, relative to its peak"},

    {"timetrace.period_ns", V::number, "timetrace", "100", 0, true, kInf, false, "train period T [ns]"},
    {"timetrace.count", V::integer, "timetrace", "3", 1, false, 100000, false, "pulses per record"},
    {"timetrace.pulse_ns", V::number, "timetrace", "6.5", 0, false, kInf, false, "excitation pulse length [ns]"},
    {"timetrace.rabi_mhz", V::number, "timetrace", "76.923", 0, false, kInf, false, "Rabi frequency during the pulse [MHz]"},
    {"timetrace.sample_ns", V::number, "timetrace", "4", 0, true, kInf, false, "ADC sample interval [ns]"},
    {"timetrace.filter_mhz", V::number, "timetrace", "30", 0, false, kInf, false, "digital filter -3 dB bandwidth [MHz]; 0 disables"},
    {"timetrace.noise_relative", V::number, "timetrace", "1", 0, false, kInf, false, "amplifier noise σ relative to √(ħωΓ₁ᵉ)"},
    {"timetrace.averages", V::integer, "timetrace", "100000", 1, false, 1e12, false, "number of averaged repetitions"},

    {"efficiency.freq_min_ghz", V::number, "efficiency", "6.728", 0, true, kInf, false, "lowest emission frequency [GHz]"},
    {"efficiency.freq_max_ghz", V::number, "efficiency", "9.1", 0, true, kInf, false, "highest emission frequency [GHz]"},
    {"efficiency.points", V::integer, "efficiency", "25", 1, false, 100000, false, "number of target frequencies"},
    {"efficiency.detuning_points", V::integer, "efficiency", "101", 3, false, 100000, false, "r_e samples per circle"},
    {"dephasing.slope_mhz_per_mphi0", V::number, "dephasing", "0", 0, false, kInf, false, "γ/2π increase per mΦ₀ of |δΦ| [MHz]"},
    {"dephasing.bump_freq_ghz", V::number, "dephasing", "7.25", 0, true, kInf, false, "frequency of the dephasing bump [GHz]"},
    {"dephasing.bump_height_mhz", V::number, "dephasing", "0", 0, false, kInf, false, "γ/2π added at the bump [MHz]"},
    {"dephasing.bump_width_mphi0", V::number, "dephasing", "1", 0, true, kInf, false, "Gaussian width of the bump in |δΦ| [mΦ₀]"},
  };
  return keys;
}
// clang-format on

inline const KeySpec* find_key(std::string_view key) {
  for (const auto& k : schema()) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Parsing

struct RawEntry {
  std::string value;
  int line = 0;
};

struct RawConfig {
  std::map<std::string, RawEntry> entries;
  std::vector<Diagnostic> syntax;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline bool valid_key(std::string_view k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '.';
  });
}

inline std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> parse_integer(std::string_view s) {
  std::int64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

}  // namespace detail

/// Flat `key = value` text. `[section]` headers prefix following keys with `section.`;
/// `#` and `;` start comments; values may be double-quoted.
inline RawConfig parse_config(std::string_view text) {
  RawConfig cfg;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);

    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) {
      // a comment marker inside quotes is kept
      const auto q = line.find('"');
      if (q == std::string_view::npos || c < q) line = line.substr(0, c);
    }
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        cfg.syntax.push_back({where, "unterminated section header"});
        continue;
      }
      const auto name = detail::trim(line.substr(1, line.size() - 2));
      if (!name.empty() && !detail::valid_key(name)) {
        cfg.syntax.push_back({where, "invalid section name '" + std::string(name) + "'"});
        continue;
      }
      section = std::string(name);
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      cfg.syntax.push_back({where, "expected 'key = value'"});
      continue;
    }
    const auto key = detail::trim(line.substr(0, eq));
    auto value = detail::trim(line.substr(eq + 1));
    if (!detail::valid_key(key)) {
      cfg.syntax.push_back({where, "invalid key '" + std::string(key) + "'"});
      continue;
    }
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    } else if (value.find('"') != std::string_view::npos) {
      cfg.syntax.push_back({where, "unbalanced quote in value"});
      continue;
    }
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (cfg.entries.contains(full)) {
      cfg.syntax.push_back({full, "duplicate key (first set on line " +
                                      std::to_string(cfg.entries[full].line) + ")"});
      continue;
    }
    cfg.entries[full] = {std::string(value), line_no};
  }
  return cfg;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

// ---------------------------------------------------------------------------
// Validated scenario

/// A validated configuration with every schema default filled in.
class Scenario {
 public:
  const std::string& kind() const { return kind_; }
  std::uint64_t seed() const { return static_cast<std::uint64_t>(integer("seed")); }
  void set_seed(std::uint64_t s) { values_["seed"] = std::to_string(s); }

  bool has(const std::string& key) const { return values_.contains(key); }
  double number(const std::string& key) const { return *detail::parse_number(at(key)); }
  std::int64_t integer(const std::string& key) const { return *detail::parse_integer(at(key)); }
  const std::string& text(const std::string& key) const { return at(key); }

  /// Resolved key/value pairs in key order (excludes output_dir).
  std::map<std::string, std::string> parameters() const {
    auto p = values_;
    p.erase("output_dir");
    return p;
  }

  /// Canonical `key=value` lines; the basis of the scenario digest.
  std::string canonical() const {
    std::string s;
    for (const auto& [k, v] : parameters()) s += k + "=" + v + "\n";
    return s;
  }

 private:
  friend Scenario build_scenario(const RawConfig&);
  const std::string& at(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw Error("scenario has no key '" + key + "'");
    return it->second;
  }
  std::string kind_;
  std::map<std::string, std::string> values_;
};

namespace detail {

inline bool key_allowed(const KeySpec& spec, std::string_view kind) {
  if (spec.section.empty()) return true;
  const auto secs = sections_for(kind);
  return std::find(secs.begin(), secs.end(), spec.section) != secs.end();
}

inline std::string describe_range(const KeySpec& s) {
  std::string r;
  if (std::isfinite(s.lower)) r += (s.lower_open ? "> " : ">= ") + std::to_string(s.lower);
  if (std::isfinite(s.upper)) {
    r += (r.empty() ? "" : " and ") + std::string(s.upper_open ? "< " : "<= ") + std::to_string(s.upper);
  }
  return r;
}

inline std::optional<Diagnostic> check_value(const KeySpec& spec, const std::string& value) {
  const std::string key(spec.key);
  double v = 0.0;
  switch (spec.type) {
    case ValueType::text:
      if (value.empty()) return Diagnostic{key, "must not be empty"};
      return std::nullopt;
    case ValueType::integer: {
      const auto i = parse_integer(value);
      if (!i) return Diagnostic{key, "expected an integer, got '" + value + "'"};
      v = static_cast<double>(*i);
      break;
    }
    case ValueType::number: {
      const auto d = parse_number(value);
      if (!d) return Diagnostic{key, "expected a finite number, got '" + value + "'"};
      v = *d;
      break;
    }
  }
  const bool lo_ok = spec.lower_open ? v > spec.lower : v >= spec.lower;
  const bool hi_ok = spec.upper_open ? v < spec.upper : v <= spec.upper;
  if (!lo_ok || !hi_ok) return Diagnostic{key, "value " + value + " out of range (must be " + describe_range(spec) + ")"};
  return std::nullopt;
}

}  // namespace detail

/// All schema violations of `cfg`, each naming its key path. Empty iff valid.
inline std::vector<Diagnostic> validate(const RawConfig& cfg) {
  std::vector<Diagnostic> diags = cfg.syntax;
  std::string kind;
  if (const auto it = cfg.entries.find("kind"); it == cfg.entries.end()) {
    diags.push_back({"kind", "required; allowed kinds: " + allowed_kinds()});
  } else {
    kind = it->second.value;
    if (std::find(std::begin(kKinds), std::end(kKinds), kind) == std::end(kKinds)) {
      diags.push_back({"kind", "unknown scenario kind '" + kind + "'; allowed kinds: " + allowed_kinds()});
      kind.clear();
    }
  }

  std::map<std::string, std::string> resolved;
  for (const auto& [key, entry] : cfg.entries) {
    const KeySpec* spec = find_key(key);
    if (spec == nullptr) {
      diags.push_back({key, "unknown key"});
      continue;
    }
    if (!kind.empty() && !detail::key_allowed(*spec, kind)) {
      diags.push_back({key, "key belongs to section '" + std::string(spec->section) +
                                "', which scenario kind '" + kind + "' does not use"});
      continue;
    }
    if (auto d = detail::check_value(*spec, entry.value)) {
      diags.push_back(*d);
      continue;
    }
    resolved[key] = entry.value;
  }
  if (kind.empty()) return diags;

  // Cross-field checks on values that passed individually (defaults fill the gaps).
  auto num = [&](const std::string& key) -> std::optional<double> {
    if (const auto it = resolved.find(key); it != resolved.end()) return detail::parse_number(it->second);
    if (cfg.entries.contains(key)) return std::nullopt;  // present but invalid
    const KeySpec* s = find_key(key);
    return s && !s->default_value.empty() ? detail::parse_number(s->default_value) : std::nullopt;
  };
  auto ordered = [&](const std::string& lo, const std::string& hi) {
    const auto a = num(lo), b = num(hi);
    if (a && b && *a > *b) diags.push_back({hi, "must be >= " + lo});
  };
  if (kind == "spectroscopy") {
    ordered("spectroscopy.flux_min_mphi0", "spectroscopy.flux_max_mphi0");
    ordered("spectroscopy.freq_min_ghz", "spectroscopy.freq_max_ghz");
  } else if (kind == "smith_power_sweep") {
    ordered("smith.power_min_dbm", "smith.power_max_dbm");
  } else if (kind == "rabi") {
    const auto pmax = num("rabi.pulse_max_ns"), period = num("rabi.period_ns"), step = num("rabi.pulse_step_ns");
    if (pmax && period && *pmax >= *period) diags.push_back({"rabi.pulse_max_ns", "must be < rabi.period_ns"});
    if (pmax && step && *pmax / *step > 1e6) diags.push_back({"rabi.pulse_step_ns", "grid exceeds 1e6 points"});
  } else if (kind == "timetrace") {
    const auto pulse = num("timetrace.pulse_ns"), period = num("timetrace.period_ns");
    if (pulse && period && *pulse >= *period) diags.push_back({"timetrace.pulse_ns", "must be < timetrace.period_ns"});
  } else if (kind == "efficiency_sweep") {
    ordered("efficiency.freq_min_ghz", "efficiency.freq_max_ghz");
    const auto gap = num("qubit.gap_ghz"), fmin = num("efficiency.freq_min_ghz"),
               fmax = num("efficiency.freq_max_ghz"), ip = num("qubit.persistent_current_na");
    if (gap && fmin && *fmin < *gap) diags.push_back({"efficiency.freq_min_ghz", "must be >= qubit.gap_ghz"});
    const auto bump = num("dephasing.bump_freq_ghz");
    if (gap && bump && *bump < *gap) diags.push_back({"dephasing.bump_freq_ghz", "must be >= qubit.gap_ghz"});
    if (gap && ip && fmax) {
      const FluxQubitParams q{*gap * 1e9, *ip * 1e-9};
      const double reach = transition_frequency(q, 0.4999) * 1e-9;
      if (*fmax > reach) diags.push_back({"efficiency.freq_max_ghz", "above the reachable maximum " + std::to_string(reach) + " GHz"});
    }
  }
  return diags;
}

/// Validated scenario or ConfigError carrying every diagnostic.
inline Scenario build_scenario(const RawConfig& cfg) {
  auto diags = validate(cfg);
  if (!diags.empty()) throw ConfigError(std::move(diags));
  Scenario sc;
  sc.kind_ = cfg.entries.at("kind").value;
  for (const auto& spec : schema()) {
    if (!detail::key_allowed(spec, sc.kind_)) continue;
    if (const auto it = cfg.entries.find(std::string(spec.key)); it != cfg.entries.end()) {
      sc.values_[std::string(spec.key)] = it->second.value;
    } else if (!spec.default_value.empty()) {
      sc.values_[std::string(spec.key)] = std::string(spec.default_value);
    }
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path) { return build_scenario(parse_config(read_file(path))); }

}  // namespace sps::harness

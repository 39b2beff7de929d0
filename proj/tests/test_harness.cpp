#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sps/harness/config.hpp"
#include "sps/harness/output.hpp"
#include "sps/harness/run.hpp"

using namespace sps::harness;
namespace fs = std::filesystem;

namespace {

std::vector<Diagnostic> diagnose(const std::string& text) {
  return validate(parse_config(text));
}

bool has_key(const std::vector<Diagnostic>& d, const std::string& key) {
  for (const auto& x : d) {
    if (x.key == key) return true;
  }
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("sps_test_" + name);
  fs::remove_all(p);
  return p;
}

const char* kSmallRabi =
    "kind = rabi\n"
    "seed = 3\n"
    "[rabi]\n"
    "pulse_max_ns = 12\n"
    "pulse_step_ns = 0.5\n";

}  // namespace

TEST(Config, MinimalScenarioFillsDefaults) {
  const auto sc = build_scenario(parse_config("kind = spectroscopy\n"));
  EXPECT_EQ(sc.kind(), "spectroscopy");
  EXPECT_EQ(sc.integer("spectroscopy.flux_points"), 101);
  EXPECT_DOUBLE_EQ(sc.number("qubit.gap_ghz"), 6.728);
  EXPECT_FALSE(sc.has("rabi.rabi_mhz"));
  EXPECT_FALSE(sc.has("network.dipole_uv"));
}

TEST(Config, CommentsSectionsAndWhitespace) {
  const auto sc = build_scenario(parse_config(
      "# header\nkind=rabi   # trailing\n\n[rabi]\n  rabi_mhz =  50 \n[network]\nc_emission_ff = 4\n"));
  EXPECT_DOUBLE_EQ(sc.number("rabi.rabi_mhz"), 50.0);
  EXPECT_DOUBLE_EQ(sc.number("network.c_emission_ff"), 4.0);
}

TEST(Config, NegativeCapacitanceNamesKey) {
  const auto d = diagnose("kind = spectroscopy\nnetwork.c_control_ff = -1\n");
  ASSERT_TRUE(has_key(d, "network.c_control_ff"));
  EXPECT_THROW(build_scenario(parse_config("kind = spectroscopy\nnetwork.c_control_ff = -1\n")), ConfigError);
}

TEST(Config, UnknownKindListsAllowedKinds) {
  const auto d = diagnose("kind = laser\n");
  ASSERT_TRUE(has_key(d, "kind"));
  for (const auto& x : d) {
    if (x.key != "kind") continue;
    for (auto k : kKinds) EXPECT_NE(x.message.find(k), std::string::npos) << x.message;
  }
}

TEST(Config, MissingKind) { EXPECT_TRUE(has_key(diagnose("seed = 1\n"), "kind")); }

TEST(Config, EmptyFluxGrid) {
  EXPECT_TRUE(has_key(diagnose("kind = spectroscopy\n[spectroscopy]\nflux_points = 0\n"),
                      "spectroscopy.flux_points"));
  EXPECT_TRUE(has_key(diagnose("kind = spectroscopy\n[spectroscopy]\nflux_min_mphi0 = 5\nflux_max_mphi0 = -5\n"),
                      "spectroscopy.flux_max_mphi0") ||
              has_key(diagnose("kind = spectroscopy\n[spectroscopy]\nflux_min_mphi0 = 5\nflux_max_mphi0 = -5\n"),
                      "spectroscopy.flux_min_mphi0"));
}

TEST(Config, UnknownAndForeignKeys) {
  EXPECT_TRUE(has_key(diagnose("kind = rabi\nrabi.colour = 3\n"), "rabi.colour"));
  EXPECT_TRUE(has_key(diagnose("kind = rabi\nsmith.noise_sigma = 0.1\n"), "smith.noise_sigma"));
}

TEST(Config, TypeErrors) {
  EXPECT_TRUE(has_key(diagnose("kind = rabi\nrabi.rabi_mhz = fast\n"), "rabi.rabi_mhz"));
  EXPECT_TRUE(has_key(diagnose("kind = timetrace\ntimetrace.averages = 2.5\n"), "timetrace.averages"));
}

TEST(Config, TargetsBelowGapRejected) {
  EXPECT_TRUE(has_key(diagnose("kind = efficiency_sweep\n[efficiency]\nfreq_min_ghz = 6.0\n"),
                      "efficiency.freq_min_ghz"));
}

TEST(Config, SyntaxErrorsCarryLineNumbers) {
  const auto cfg = parse_config("kind = rabi\nthis line has no equals\n[unclosed\n");
  ASSERT_EQ(cfg.syntax.size(), 2u);
  EXPECT_EQ(cfg.syntax[0].key, "line 2");
}

TEST(Config, FuzzNeverCrashes) {
  std::mt19937_64 rng(7);
  const std::string alphabet = "kind=rabi.\n[]#-0123456789e ";
  std::vector<std::string> keys;
  for (const auto& s : schema()) keys.emplace_back(s.key);
  for (int i = 0; i < 3000; ++i) {
    std::string text;
    if (i % 2 == 0) {
      text = "kind = " + std::string(kKinds[rng() % std::size(kKinds)]) + "\n";
      for (int k = 0; k < 4; ++k) {
        text += keys[rng() % keys.size()] + " = ";
        for (int c = 0; c < 4; ++c) text += alphabet[rng() % alphabet.size()];
        text += "\n";
      }
    } else {
      for (int c = 0; c < 60; ++c) text += alphabet[rng() % alphabet.size()];
    }
    try {
      (void)build_scenario(parse_config(text));
    } catch (const ConfigError& e) {
      EXPECT_FALSE(e.diagnostics().empty());
    }
  }
}

TEST(Output, FormatRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 6.62607015e-34, -2.5e300, 0.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Output, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Output, CsvRowWidth) {
  CsvTable t{"a", "b"};
  t.row({1.0, 2.0});
  EXPECT_EQ(t.text(), "a,b\n1,2\n");
  EXPECT_THROW(t.row({1.0}), sps::Error);
}

TEST(Run, ManifestChecksumsMatchFiles) {
  setenv("SOURCE_DATE_EPOCH", "0", 1);
  const auto dir = scratch("manifest");
  const auto m = run(build_scenario(parse_config(kSmallRabi)), dir);
  EXPECT_EQ(m.document["timestamp"], "1970-01-01T00:00:00Z");
  EXPECT_EQ(m.document["seed"], 3);
  EXPECT_EQ(m.document["kind"], "rabi");
  ASSERT_EQ(m.document["outputs"].size(), 2u);
  for (const auto& o : m.document["outputs"]) {
    const std::string content = slurp(dir / o["file"].get<std::string>());
    EXPECT_EQ(o["sha256"], sha256_hex(content));
    EXPECT_EQ(o["bytes"], content.size());
  }
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  fs::remove_all(dir);
}

TEST(Run, DeterministicAcrossRunsAndThreads) {
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  const auto sc = build_scenario(parse_config(
      "kind = timetrace\nseed = 11\n[timetrace]\naverages = 3000\ncount = 1\n"));
  const auto a = scratch("det_a"), b = scratch("det_b");
  run(sc, a, {1});
  run(sc, b, {3});
  for (const auto& e : fs::directory_iterator(a)) {
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path().filename();
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Run, SeedChangesNoisyOutputOnly) {
  auto sc = build_scenario(parse_config("kind = wavepacket\n[wavepacket]\nnoise_relative = 0.01\n"));
  const auto a = scratch("seed_a"), b = scratch("seed_b");
  const auto ma = run(sc, a);
  sc.set_seed(sc.seed() + 1);
  const auto mb = run(sc, b);
  EXPECT_EQ(slurp(a / "wavepacket.csv"), slurp(b / "wavepacket.csv"));
  EXPECT_NE(slurp(a / "spectrum.csv"), slurp(b / "spectrum.csv"));
  EXPECT_NE(ma.document["scenario_digest"], mb.document["scenario_digest"]);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Run, OutputDirectoryPrecedence) {
  auto sc = build_scenario(parse_config("kind = rabi\n"));
  EXPECT_EQ(resolve_output_dir(sc, "x"), fs::path("x"));
  setenv("SPS_OUTPUT_ROOT", "/tmp/root", 1);
  EXPECT_EQ(resolve_output_dir(sc, ""), fs::path("/tmp/root/rabi"));
  unsetenv("SPS_OUTPUT_ROOT");
  EXPECT_EQ(resolve_output_dir(sc, ""), fs::path("sps_out/rabi"));
  auto sc2 = build_scenario(parse_config("kind = rabi\noutput_dir = here\n"));
  EXPECT_EQ(resolve_output_dir(sc2, ""), fs::path("here"));
}

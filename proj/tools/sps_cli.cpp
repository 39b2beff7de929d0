// Command-line harness: `sps run <config>` and `sps validate <config>`.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sps/harness/config.hpp"
#include "sps/harness/run.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int do_validate(const std::string& path) {
  const auto cfg = sps::harness::parse_config(sps::harness::read_file(path));
  const auto diags = sps::harness::validate(cfg);
  for (const auto& d : diags) std::cerr << path << ": " << sps::harness::format(d) << "\n";
  if (diags.empty()) std::cout << path << ": ok\n";
  return diags.empty() ? kExitOk : kExitConfig;
}

int do_run(const std::string& path, std::optional<std::uint64_t> seed, const std::string& output_dir,
           unsigned threads) {
  auto scenario = sps::harness::load_scenario(path);
  if (seed) scenario.set_seed(*seed);
  const auto dir = sps::harness::resolve_output_dir(scenario, output_dir);
  const auto manifest = sps::harness::run(scenario, dir, {threads});
  std::cout << "wrote " << manifest.document["outputs"].size() << " files + manifest.json to "
            << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-photon source simulator and estimation harness"};
  app.set_version_flag("--version", sps::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  unsigned threads = 1;

  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write CSV/JSON outputs");
  run_cmd->add_option("config", config_path, "Scenario config file")->required();
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_option("--output-dir", output_dir,
                      "Output directory (default: config output_dir, then $SPS_OUTPUT_ROOT/<kind>)");
  run_cmd->add_option("--threads", threads, "Worker threads for Monte-Carlo averaging")
      ->check(CLI::Range(1u, 1024u));

  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario config and list problems");
  validate_cmd->add_option("config", config_path, "Scenario config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*validate_cmd) return do_validate(config_path);
    return do_run(config_path, seed, output_dir, threads);
  } catch (const sps::harness::ConfigError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << config_path << ": " << sps::harness::format(d) << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

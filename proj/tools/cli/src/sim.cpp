#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "fibrenet/cli/config.hpp"
#include "fibrenet/cli/runner.hpp"
#include "fibrenet/errors.hpp"

using namespace fibrenet;

namespace {

Scenario resolve(const std::string& config, const std::string& preset_name) {
  std::optional<std::string> p;
  if (!preset_name.empty()) p = preset_name;
  if (config.empty()) {
    if (!p) throw ConfigError("need a config file or --preset");
    return cli::parse_config("", p);
  }
  return cli::load_config(config, p);
}

bool deterministic_env() {
  const char* v = std::getenv("SIM_DETERMINISTIC");
  return v && std::string(v) == "1";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fibrenet optical frequency dissemination simulator"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");

  std::string config, preset_name, out_dir = "out", engine;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  auto* run = app.add_subcommand("run", "run a scenario");
  run->add_option("config", config, "scenario YAML (optional with --preset)");
  run->add_option("--preset", preset_name, "base preset");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--engine", engine, "fast, slow or both")->check(CLI::IsMember({"fast", "slow", "both"}));
  run->add_option("--seed", seed, "master seed");
  run->add_option("--jobs", jobs, "number of seeds to run in parallel")->check(CLI::PositiveNumber);

  app.add_subcommand("presets", "list the shipped presets");

  std::string check_config, check_preset;
  auto* check = app.add_subcommand("check", "validate a config without running it");
  check->add_option("config", check_config, "scenario YAML");
  check->add_option("--preset", check_preset, "base preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : cli::kExitConfig;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

  try {
    if (app.got_subcommand("presets")) {
      for (const auto& p : list_presets()) std::cout << p.name << "\t" << p.description << "\n";
      return cli::kExitOk;
    }
    if (app.got_subcommand("check")) {
      const Scenario s = resolve(check_config, check_preset);
      std::cout << "ok: " << s.name << " (" << to_string(s.kind) << ", engine " << to_string(s.engine) << ")\n";
      return cli::kExitOk;
    }
    Scenario s = resolve(config, preset_name);
    if (!engine.empty()) s.engine = engine_mode_from(engine);
    if (seed) s.seed = *seed;
    s.validate();
    cli::RunOptions opt;
    opt.jobs = jobs;
    opt.deterministic = deterministic_env();
    const auto m = cli::run(s, out_dir, opt);
    std::cout << "wrote " << m.outputs.size() << " files to " << out_dir << "\n";
    return cli::kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cli::kExitConfig;
  } catch (const SimulationError& e) {
    std::cerr << "simulation diverged: " << e.what() << "\n";
    return cli::kExitDivergence;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return cli::kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

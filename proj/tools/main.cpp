#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "runner/config.hpp"
#include "runner/experiments.hpp"

using namespace cqlab::runner;

int main(int argc, char** argv) {
  CLI::App app{"cqlab experiment runner"};
  app.set_version_flag("--version", "cqlab 0.1.0");

  std::string subcommand;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> walkers;
  std::optional<std::size_t> grid_points;
  bool quiet = false;

  app.add_option("subcommand", subcommand, "geometry-identities | dynamics-checks | reconstruct | born-diffusion | solid-com | all")
      ->required()
      ->check(CLI::IsMember(subcommands()));
  app.add_option("--config", config_path, "JSON configuration file (defaults apply when omitted)");
  app.add_option("--out", out_dir, "Output directory for report.json and CSV tables")->required();
  app.add_option("--seed", seed, "Master seed, overrides the config");
  app.add_option("--walkers", walkers, "Walker count, overrides the config");
  app.add_option("--grid", grid_points, "Grid points, overrides the config");
  app.add_flag("-q,--quiet", quiet, "Only print the overall verdict");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (walkers) cfg.diffusion.n_walkers = *walkers;
    if (grid_points) cfg.grid.n_points = *grid_points;

    std::ostringstream sink;
    const int code = run(subcommand, cfg, out_dir, quiet ? static_cast<std::ostream&>(sink) : std::cout);
    std::cout << subcommand << ": "
              << (code == kPass ? "PASS" : code == kCheckFailed ? "FAIL" : "BREAKDOWN") << '\n';
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBreakdown;
  }
}

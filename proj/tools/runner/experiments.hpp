#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "report.hpp"

namespace cqlab::runner {

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kConfigError = 2, kBreakdown = 3 };

const std::vector<std::string>& subcommands();

// Individual sections append their checks, metrics and CSV tables.
void run_geometry_identities(const ExperimentConfig& cfg, const std::filesystem::path& out, Report& report);
void run_dynamics_checks(const ExperimentConfig& cfg, const std::filesystem::path& out, Report& report);
void run_reconstruct(const ExperimentConfig& cfg, const std::filesystem::path& out, Report& report);
void run_born_diffusion(const ExperimentConfig& cfg, const std::filesystem::path& out, Report& report);
void run_solid_com(const ExperimentConfig& cfg, const std::filesystem::path& out, Report& report);

// Runs a subcommand, writes report.json (deterministic) and timing.json (wall
// time) into out, and returns the exit code. Throws ConfigError for an invalid
// configuration or an unknown subcommand.
int run(const std::string& subcommand, const ExperimentConfig& cfg, const std::filesystem::path& out,
        std::ostream& log);

}  // namespace cqlab::runner

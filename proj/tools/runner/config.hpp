#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <cqlab/potential.hpp>

namespace cqlab::runner {

// Anything wrong with the configuration itself: maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridConfig {
  std::size_t n_points = 512;
  double x_min = -16.0;
  double x_max = 16.0;
  bool periodic = true;
};

struct PhysicsConfig {
  double hbar = 1.0;
  double mass = 1.0;
  double sigma = 0.5;
};

struct DynamicsConfig {
  double dt = 1e-3;
  double t_final = 6.283185307179586;
  double a0 = 1.0;
  double p0 = 0.0;
  double quartic_dt = 1e-4;
};

struct ReconstructConfig {
  std::vector<int> dimensions{16, 32, 64};
  int solve_dimension = 32;
  double omega0 = 1.0;
};

struct DiffusionSection {
  std::size_t n_walkers = 100000;
  double tau = 1.0;
  std::optional<double> diffusion_sigma;  // defaults to physics.sigma
  int substeps = 8;
  int superpositions = 10;
  double lattice_spacing = 4.0;
  std::size_t pde_bins = 256;
  int epochs = 2;
};

struct SolidConfig {
  std::vector<std::size_t> n_cells{1, 10, 100};
  double kick_std = 0.5;
};

struct ExperimentConfig {
  std::string experiment = "cqlab";
  std::uint64_t seed = 42;
  GridConfig grid;
  PhysicsConfig physics;
  nlohmann::json potential = {{"kind", "harmonic"}};
  DynamicsConfig dynamics;
  ReconstructConfig reconstruct;
  DiffusionSection diffusion;
  SolidConfig solid;

  double diffusion_sigma() const { return diffusion.diffusion_sigma.value_or(physics.sigma); }
};

// Physical quantities are written as {"value": x, "unit": "<dimension>"}; the
// unit string must name the expected dimension (see README). Missing keys keep
// their defaults.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Throws ConfigError for values outside their domain.
void validate(const ExperimentConfig& cfg);

// Config echo for reports; round-trips through parse_config.
nlohmann::json to_json(const ExperimentConfig& cfg);

// The configured potential on the configured grid.
PotentialSpec build_potential(const ExperimentConfig& cfg);

}  // namespace cqlab::runner

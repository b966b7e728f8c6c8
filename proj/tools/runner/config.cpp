#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>

#include <cqlab/numerics.hpp>
#include <cqlab/rng.hpp>

namespace cqlab::runner {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double quantity(const json& obj, const std::string& where, const char* key, const char* unit, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& q = obj.at(key);
  const std::string path = where + "." + key;
  if (!q.is_object() || !q.contains("value") || !q.contains("unit"))
    throw ConfigError(path + ": expected {\"value\": number, \"unit\": \"" + unit + "\"}");
  if (!q.at("value").is_number()) throw ConfigError(path + ".value: expected a number");
  if (!q.at("unit").is_string()) throw ConfigError(path + ".unit: expected a string");
  const std::string got = q.at("unit").get<std::string>();
  if (got != unit) throw ConfigError(path + ": unit '" + got + "' where '" + unit + "' is required");
  const double v = q.at("value").get<double>();
  if (!std::isfinite(v)) throw ConfigError(path + ": value is not finite");
  return v;
}

json quantity_json(double value, const char* unit) { return {{"value", value}, {"unit", unit}}; }

template <class T>
T integer(const json& obj, const std::string& where, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  if constexpr (std::is_unsigned_v<T>) {
    if (v.get<long long>() < 0) throw ConfigError(where + "." + key + ": must be non-negative");
  }
  return v.get<T>();
}

template <class T>
std::vector<T> integer_list(const json& obj, const std::string& where, const char* key, std::vector<T> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError(where + "." + key + ": expected a non-empty integer array");
  std::vector<T> out;
  for (const json& e : v) {
    if (!e.is_number_integer() || e.get<long long>() < 0)
      throw ConfigError(where + "." + key + ": expected non-negative integers");
    out.push_back(e.get<T>());
  }
  return out;
}

void check_potential_json(const json& p, const std::string& where, bool allow_noise) {
  if (!p.is_object() || !p.contains("kind") || !p.at("kind").is_string())
    throw ConfigError(where + ": expected an object with a string 'kind'");
  const std::string kind = p.at("kind").get<std::string>();
  if (kind == "free") {
    check_keys(p, where, {"kind"});
  } else if (kind == "linear") {
    check_keys(p, where, {"kind", "slope"});
    quantity(p, where, "slope", "energy/length", 0.0);
  } else if (kind == "harmonic") {
    check_keys(p, where, {"kind", "stiffness", "center"});
    quantity(p, where, "stiffness", "energy/length^2", 1.0);
    quantity(p, where, "center", "length", 0.0);
  } else if (kind == "polynomial") {
    check_keys(p, where, {"kind", "coefficients"});
    if (!p.contains("coefficients") || !p.at("coefficients").is_array() || p.at("coefficients").empty())
      throw ConfigError(where + ".coefficients: expected a non-empty number array");
    for (const json& c : p.at("coefficients"))
      if (!c.is_number()) throw ConfigError(where + ".coefficients: expected numbers");
  } else if (kind == "tabulated") {
    check_keys(p, where, {"kind", "values", "unit"});
    if (!p.contains("unit") || p.at("unit") != "energy") throw ConfigError(where + ".unit: 'energy' is required");
    if (!p.contains("values") || !p.at("values").is_array()) throw ConfigError(where + ".values: expected an array");
    for (const json& c : p.at("values"))
      if (!c.is_number()) throw ConfigError(where + ".values: expected numbers");
  } else if (kind == "noisy") {
    if (!allow_noise) throw ConfigError(where + ": noisy potentials cannot be nested");
    check_keys(p, where, {"kind", "base", "force_std", "step", "stream"});
    if (!p.contains("base")) throw ConfigError(where + ".base: required");
    check_potential_json(p.at("base"), where + ".base", false);
    if (quantity(p, where, "force_std", "energy/length", 0.0) < 0.0)
      throw ConfigError(where + ".force_std: must be non-negative");
    if (!(quantity(p, where, "step", "time", 1e-3) > 0.0)) throw ConfigError(where + ".step: must be positive");
    integer<std::uint64_t>(p, where, "stream", 0);
  } else {
    throw ConfigError(where + ".kind: unknown potential kind '" + kind + "'");
  }
}

PotentialSpec potential_from_json(const json& p, const Grid& grid, std::uint64_t seed) {
  const std::string where = "potential";
  const std::string kind = p.at("kind").get<std::string>();
  if (kind == "free") return PotentialSpec::free();
  if (kind == "linear") return PotentialSpec::linear(quantity(p, where, "slope", "energy/length", 0.0));
  if (kind == "harmonic")
    return PotentialSpec::harmonic(quantity(p, where, "stiffness", "energy/length^2", 1.0),
                                   quantity(p, where, "center", "length", 0.0));
  if (kind == "polynomial") return PotentialSpec::polynomial(p.at("coefficients").get<std::vector<double>>());
  if (kind == "tabulated") {
    const auto values = p.at("values").get<std::vector<double>>();
    if (values.size() != grid.size()) throw ConfigError("potential.values: one sample per grid point is required");
    return PotentialSpec::tabulated(grid, Eigen::Map<const RealVector>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
  NoiseSpec noise;
  noise.force_std = quantity(p, where, "force_std", "energy/length", 0.0);
  noise.step = quantity(p, where, "step", "time", 1e-3);
  noise.seed = seed;
  noise.stream = integer<std::uint64_t>(p, where, "stream", 0);
  return PotentialSpec::noisy(potential_from_json(p.at("base"), grid, seed), noise);
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  check_keys(j, "config",
             {"experiment", "seed", "grid", "physics", "potential", "dynamics", "reconstruct", "diffusion", "solid"});
  if (j.contains("experiment")) {
    if (!j.at("experiment").is_string()) throw ConfigError("config.experiment: expected a string");
    c.experiment = j.at("experiment").get<std::string>();
  }
  c.seed = integer<std::uint64_t>(j, "config", "seed", c.seed);

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_keys(g, "grid", {"n_points", "x_min", "x_max", "periodic"});
    c.grid.n_points = integer<std::size_t>(g, "grid", "n_points", c.grid.n_points);
    c.grid.x_min = quantity(g, "grid", "x_min", "length", c.grid.x_min);
    c.grid.x_max = quantity(g, "grid", "x_max", "length", c.grid.x_max);
    if (g.contains("periodic")) {
      if (!g.at("periodic").is_boolean()) throw ConfigError("grid.periodic: expected a boolean");
      c.grid.periodic = g.at("periodic").get<bool>();
    }
  }
  if (j.contains("physics")) {
    const json& p = j.at("physics");
    check_keys(p, "physics", {"hbar", "mass", "sigma"});
    c.physics.hbar = quantity(p, "physics", "hbar", "action", c.physics.hbar);
    c.physics.mass = quantity(p, "physics", "mass", "mass", c.physics.mass);
    c.physics.sigma = quantity(p, "physics", "sigma", "length", c.physics.sigma);
  }
  if (j.contains("potential")) {
    check_potential_json(j.at("potential"), "potential", true);
    c.potential = j.at("potential");
  }
  if (j.contains("dynamics")) {
    const json& d = j.at("dynamics");
    check_keys(d, "dynamics", {"dt", "t_final", "a0", "p0", "quartic_dt"});
    c.dynamics.dt = quantity(d, "dynamics", "dt", "time", c.dynamics.dt);
    c.dynamics.t_final = quantity(d, "dynamics", "t_final", "time", c.dynamics.t_final);
    c.dynamics.a0 = quantity(d, "dynamics", "a0", "length", c.dynamics.a0);
    c.dynamics.p0 = quantity(d, "dynamics", "p0", "momentum", c.dynamics.p0);
    c.dynamics.quartic_dt = quantity(d, "dynamics", "quartic_dt", "time", c.dynamics.quartic_dt);
  }
  if (j.contains("reconstruct")) {
    const json& r = j.at("reconstruct");
    check_keys(r, "reconstruct", {"dimensions", "solve_dimension", "omega0"});
    c.reconstruct.dimensions = integer_list<int>(r, "reconstruct", "dimensions", c.reconstruct.dimensions);
    c.reconstruct.solve_dimension = integer<int>(r, "reconstruct", "solve_dimension", c.reconstruct.solve_dimension);
    c.reconstruct.omega0 = quantity(r, "reconstruct", "omega0", "1/time", c.reconstruct.omega0);
  }
  if (j.contains("diffusion")) {
    const json& d = j.at("diffusion");
    check_keys(d, "diffusion",
               {"n_walkers", "tau", "diffusion_sigma", "substeps", "superpositions", "lattice_spacing", "pde_bins",
                "epochs"});
    c.diffusion.n_walkers = integer<std::size_t>(d, "diffusion", "n_walkers", c.diffusion.n_walkers);
    c.diffusion.tau = quantity(d, "diffusion", "tau", "time", c.diffusion.tau);
    if (d.contains("diffusion_sigma"))
      c.diffusion.diffusion_sigma = quantity(d, "diffusion", "diffusion_sigma", "length", 0.0);
    c.diffusion.substeps = integer<int>(d, "diffusion", "substeps", c.diffusion.substeps);
    c.diffusion.superpositions = integer<int>(d, "diffusion", "superpositions", c.diffusion.superpositions);
    c.diffusion.lattice_spacing = quantity(d, "diffusion", "lattice_spacing", "length", c.diffusion.lattice_spacing);
    c.diffusion.pde_bins = integer<std::size_t>(d, "diffusion", "pde_bins", c.diffusion.pde_bins);
    c.diffusion.epochs = integer<int>(d, "diffusion", "epochs", c.diffusion.epochs);
  }
  if (j.contains("solid")) {
    const json& s = j.at("solid");
    check_keys(s, "solid", {"n_cells", "kick_std"});
    c.solid.n_cells = integer_list<std::size_t>(s, "solid", "n_cells", c.solid.n_cells);
    c.solid.kick_std = quantity(s, "solid", "kick_std", "length", c.solid.kick_std);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j);
}

void validate(const ExperimentConfig& c) {
  if (c.grid.n_points < 16) throw ConfigError("grid.n_points must be at least 16");
  if (!(c.grid.x_max > c.grid.x_min)) throw ConfigError("grid.x_max must exceed grid.x_min");
  if (!(c.physics.hbar > 0.0) || !(c.physics.mass > 0.0) || !(c.physics.sigma > 0.0))
    throw ConfigError("physics.hbar, physics.mass and physics.sigma must be positive");
  if (!(c.dynamics.dt > 0.0) || !(c.dynamics.quartic_dt > 0.0)) throw ConfigError("dynamics time steps must be positive");
  if (!(c.dynamics.t_final >= 0.0)) throw ConfigError("dynamics.t_final must be non-negative");
  if (c.reconstruct.dimensions.empty()) throw ConfigError("reconstruct.dimensions must not be empty");
  for (int n : c.reconstruct.dimensions)
    if (n < 16) throw ConfigError("reconstruct.dimensions entries must be at least 16");
  if (c.reconstruct.solve_dimension < 16) throw ConfigError("reconstruct.solve_dimension must be at least 16");
  if (!(c.reconstruct.omega0 > 0.0)) throw ConfigError("reconstruct.omega0 must be positive");
  if (c.diffusion.n_walkers < 2) throw ConfigError("diffusion.n_walkers must be at least 2");
  if (!(c.diffusion.tau > 0.0)) throw ConfigError("diffusion.tau must be positive");
  if (!(c.diffusion_sigma() >= 0.0)) throw ConfigError("diffusion.diffusion_sigma must be non-negative");
  if (c.diffusion.substeps < 1) throw ConfigError("diffusion.substeps must be at least 1");
  if (c.diffusion.superpositions < 0) throw ConfigError("diffusion.superpositions must be non-negative");
  if (!(c.diffusion.lattice_spacing > 0.0)) throw ConfigError("diffusion.lattice_spacing must be positive");
  if (c.diffusion.pde_bins < 2) throw ConfigError("diffusion.pde_bins must be at least 2");
  if (c.diffusion.epochs < 0) throw ConfigError("diffusion.epochs must be non-negative");
  for (std::size_t n : c.solid.n_cells)
    if (n < 1) throw ConfigError("solid.n_cells entries must be at least 1");
  if (!(c.solid.kick_std >= 0.0)) throw ConfigError("solid.kick_std must be non-negative");
  try {
    build_potential(c);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("potential: ") + e.what());
  }
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["seed"] = c.seed;
  j["grid"] = {{"n_points", c.grid.n_points},
               {"x_min", quantity_json(c.grid.x_min, "length")},
               {"x_max", quantity_json(c.grid.x_max, "length")},
               {"periodic", c.grid.periodic}};
  j["physics"] = {{"hbar", quantity_json(c.physics.hbar, "action")},
                  {"mass", quantity_json(c.physics.mass, "mass")},
                  {"sigma", quantity_json(c.physics.sigma, "length")}};
  j["potential"] = c.potential;
  j["dynamics"] = {{"dt", quantity_json(c.dynamics.dt, "time")},
                   {"t_final", quantity_json(c.dynamics.t_final, "time")},
                   {"a0", quantity_json(c.dynamics.a0, "length")},
                   {"p0", quantity_json(c.dynamics.p0, "momentum")},
                   {"quartic_dt", quantity_json(c.dynamics.quartic_dt, "time")}};
  j["reconstruct"] = {{"dimensions", c.reconstruct.dimensions},
                      {"solve_dimension", c.reconstruct.solve_dimension},
                      {"omega0", quantity_json(c.reconstruct.omega0, "1/time")}};
  j["diffusion"] = {{"n_walkers", c.diffusion.n_walkers},
                    {"tau", quantity_json(c.diffusion.tau, "time")},
                    {"diffusion_sigma", quantity_json(c.diffusion_sigma(), "length")},
                    {"substeps", c.diffusion.substeps},
                    {"superpositions", c.diffusion.superpositions},
                    {"lattice_spacing", quantity_json(c.diffusion.lattice_spacing, "length")},
                    {"pde_bins", c.diffusion.pde_bins},
                    {"epochs", c.diffusion.epochs}};
  j["solid"] = {{"n_cells", c.solid.n_cells}, {"kick_std", quantity_json(c.solid.kick_std, "length")}};
  return j;
}

PotentialSpec build_potential(const ExperimentConfig& cfg) {
  const Grid grid(cfg.grid.n_points, cfg.grid.x_min, cfg.grid.x_max, cfg.grid.periodic);
  return potential_from_json(cfg.potential, grid, cfg.seed);
}

}  // namespace cqlab::runner

#include "experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include <cqlab/diffusion.hpp>
#include <cqlab/dynamics.hpp>
#include <cqlab/geometry.hpp>
#include <cqlab/reconstruct.hpp>
#include <cqlab/rng.hpp>

namespace cqlab::runner {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Stream indices inside StreamPurpose::test_data used by the runner.
constexpr std::uint64_t kAnticommutatorState = 1000;
constexpr std::uint64_t kNullTestForce = 2000;
constexpr std::uint64_t kInvariancePairs = 3000;

template <class F>
void guarded(Report& report, const std::string& name, F&& body) {
  try {
    body();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(name + ": " + e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(name + ": " + e.what());
  } catch (const std::exception& e) {
    report.add_breakdown(name, e.what());
  }
}

Grid config_grid(const ExperimentConfig& cfg) {
  return Grid(cfg.grid.n_points, cfg.grid.x_min, cfg.grid.x_max, cfg.grid.periodic);
}

double grid_middle(const ExperimentConfig& cfg) { return 0.5 * (cfg.grid.x_min + cfg.grid.x_max); }

PhysicsParams config_physics(const ExperimentConfig& cfg) { return {cfg.physics.hbar, cfg.physics.mass}; }

DiffusionConfig config_diffusion(const ExperimentConfig& cfg) {
  DiffusionConfig d;
  d.n_walkers = cfg.diffusion.n_walkers;
  d.tau = cfg.diffusion.tau;
  d.diffusion_sigma = cfg.diffusion_sigma();
  d.seed = cfg.seed;
  d.substeps = cfg.diffusion.substeps;
  return d;
}

StateVector random_state(const Grid& grid, std::uint64_t seed, std::uint64_t index) {
  RngStream rng(seed, stream_id(StreamPurpose::test_data, index));
  StateVector psi(grid);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double re = rng.normal();
    const double im = rng.normal();
    psi[j] = Complex(re, im);
  }
  return psi.normalized();
}

Eigen::MatrixXcd random_hermitian(Eigen::Index n, RngStream& rng) {
  Eigen::MatrixXcd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double re = rng.normal();
      const double im = rng.normal();
      r(i, j) = Complex(re, im);
    }
  return 0.5 * (r + r.adjoint());
}

Eigen::MatrixXcd random_unitary(Eigen::Index n, RngStream& rng) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(random_hermitian(n, rng));
  Eigen::VectorXcd phases(n);
  for (Eigen::Index k = 0; k < n; ++k) phases[k] = std::polar(1.0, eig.eigenvalues()[k]);
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

struct ClosedForm {
  double fibre, position, momentum, spread;
};

ClosedForm decomposition_closed_form(const GaussianParams& q, const PotentialSpec& V, const PhysicsParams& ph) {
  const double s = q.sigma;
  const double v1 = V.derivative(q.a);
  const double v2 = V.second_derivative(q.a);
  const double energy =
      q.p * q.p / (2.0 * ph.mass) + ph.hbar * ph.hbar / (8.0 * ph.mass * s * s) + V.value(q.a) + 0.5 * v2 * s * s;
  return {energy / ph.hbar, q.p / ph.mass / (2.0 * s), -v1 * s / ph.hbar,
          std::sqrt(2.0) * ph.hbar / (8.0 * s * s * ph.mass) - v2 * s * s / (std::sqrt(2.0) * ph.hbar)};
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"geometry-identities", "dynamics-checks", "reconstruct",
                                              "born-diffusion",      "solid-com",       "all"};
  return names;
}

void run_geometry_identities(const ExperimentConfig& cfg, const fs::path& out, Report& report) {
  const Grid grid = config_grid(cfg);
  const double s = cfg.physics.sigma;
  const double hbar = cfg.physics.hbar;
  const double mid = grid_middle(cfg);
  const KernelSpace ks(s, grid);

  guarded(report, "kernel.composition", [&] {
    report.add(bound_check("kernel.composition_deviation", ks.composition_deviation(), 1e-10));
  });

  guarded(report, "overlap_distance", [&] {
    CsvWriter csv(out / "overlap_distance.csv",
                  {"separation_over_sigma", "fs_distance", "cos2_fs_distance", "expected", "deviation"});
    report.add_artifact("overlap_distance.csv");
    double worst = 0.0;
    for (double r : {0.5, 1.0, 2.0, 4.0}) {
      const double d = fs_distance(embed_point(mid, ks), embed_point(mid + r * s, ks));
      const double c2 = std::cos(d) * std::cos(d);
      const double expected = std::exp(-r * r / 4.0);
      worst = std::max(worst, std::abs(c2 - expected));
      csv.row(r, d, c2, expected, std::abs(c2 - expected));
    }
    report.add(bound_check("overlap_distance.max_deviation", worst, 1e-8));
  });

  guarded(report, "isometry", [&] {
    const double v = 1.3;
    const double g = -0.8;
    const DeltaPath uniform = [&](double t) { return mid + v * t; };
    const DeltaPath accelerated = [&](double t) { return mid + v * t + 0.5 * g * t * t; };
    report.add(relative_check("isometry.velocity_norm", 2.0 * s * h_norm_velocity(uniform, ks), std::abs(v), 1e-4));
    report.add(relative_check("projection.uniform_velocity", 2.0 * s * delta_path_projection(uniform, 1, ks), v, 1e-3));
    report.add(
        relative_check("projection.accelerated_velocity", 2.0 * s * delta_path_projection(accelerated, 1, ks), v, 1e-3));
    report.add(relative_check("projection.accelerated_acceleration",
                              2.0 * s * delta_path_projection(accelerated, 2, ks), g, 1e-3));
  });

  guarded(report, "fs_metric", [&] {
    CsvWriter csv(out / "fs_metric.csv", {"da", "dp", "lhs", "rhs", "relative_error"});
    report.add_artifact("fs_metric.csv");
    const GaussianParams q{mid, 0.7 * hbar / s, s};
    const double ha = 0.01 * s;
    const double hp = 0.01 * hbar / s;
    double worst = 0.0;
    for (int i = -1; i <= 1; ++i) {
      for (int j = -1; j <= 1; ++j) {
        if (i == 0 && j == 0) continue;
        const MetricSample m = fs_metric_restriction_check(grid, q, i * ha, j * hp, hbar);
        const double rel = std::abs(m.lhs - m.rhs) / m.rhs;
        worst = std::max(worst, rel);
        csv.row(i * ha, j * hp, m.lhs, m.rhs, rel);
      }
    }
    report.add(bound_check("fs_metric.max_relative_error", worst, 1e-3));
  });

  guarded(report, "completeness", [&] {
    // Nodes one sigma apart: the Gram matrix of the embedded points is well
    // conditioned enough for a meaningful rank.
    const Grid coarse(128, mid - 64.0 * s, mid + 64.0 * s, true);
    const KernelSpace cks(s, coarse);
    const auto rank = static_cast<double>(completeness_rank(cks));
    report.add(absolute_check("completeness.coarse_rank", rank, static_cast<double>(coarse.size()), 0.0));
    report.add_metric("completeness.fine_grid_rank_fraction",
                      static_cast<double>(completeness_rank(ks)) / static_cast<double>(grid.size()));
  });
}

void run_dynamics_checks(const ExperimentConfig& cfg, const fs::path& out, Report& report) {
  const Grid grid = config_grid(cfg);
  const PhysicsParams ph = config_physics(cfg);
  const double s = cfg.physics.sigma;
  const double mid = grid_middle(cfg);

  guarded(report, "decomposition", [&] {
    CsvWriter csv(out / "decomposition.csv",
                  {"potential", "a", "p", "fibre", "position", "momentum", "spread", "total_norm", "closure_error",
                   "nonlinear_warning"});
    report.add_artifact("decomposition.csv");
    const std::pair<const char*, PotentialSpec> family[] = {{"free", PotentialSpec::free()},
                                                            {"linear", PotentialSpec::linear(0.5)},
                                                            {"harmonic", PotentialSpec::harmonic(1.0, mid)}};
    double closure = 0.0;
    double component = 0.0;
    double speed = 0.0;
    int warnings = 0;
    for (const auto& [name, V] : family) {
      for (int i = -2; i <= 2; ++i) {
        for (int k = -2; k <= 2; ++k) {
          const GaussianParams q{mid + i, k * ph.hbar / (2.0 * s), s};
          const VelocityDecomposition d = velocity_decomposition(grid, q, V, ph);
          const ClosedForm c = decomposition_closed_form(q, V, ph);
          const double sum = d.fibre_component * d.fibre_component + d.position_component * d.position_component +
                             d.momentum_component * d.momentum_component + d.spread_component * d.spread_component;
          const double total2 = d.total_norm * d.total_norm;
          const double err = std::abs(total2 - sum) / total2;
          closure = std::max(closure, err);
          component = std::max({component, std::abs(d.fibre_component - c.fibre),
                                std::abs(d.position_component - c.position),
                                std::abs(d.momentum_component - c.momentum), std::abs(d.spread_component - c.spread)});
          const double dh = d.energy_uncertainty / ph.hbar;
          speed = std::max(speed, std::abs(d.projective_speed - dh) / dh);
          warnings += d.nonlinear_warning ? 1 : 0;
          csv.row(std::string(name), q.a, q.p, d.fibre_component, d.position_component, d.momentum_component,
                  d.spread_component, d.total_norm, err, d.nonlinear_warning);
        }
      }
    }
    report.add(bound_check("decomposition.closure_max_relative", closure, 1e-3));
    report.add(bound_check("decomposition.closed_form_max_abs", component, 1e-3));
    report.add(bound_check("decomposition.projective_speed_max_relative", speed, 1e-3));
    report.add_metric("decomposition.nonlinear_warnings", warnings);

    const VelocityDecomposition d = velocity_decomposition(grid, {mid, 1.0, s}, PotentialSpec::free(), ph);
    const ClosedForm c = decomposition_closed_form({mid, 1.0, s}, PotentialSpec::free(), ph);
    report.add(absolute_check("decomposition.free.fibre", d.fibre_component, c.fibre, 1e-3));
    report.add(absolute_check("decomposition.free.position", d.position_component, c.position, 1e-3));
    report.add(absolute_check("decomposition.free.momentum", d.momentum_component, c.momentum, 1e-3));
    report.add(absolute_check("decomposition.free.spread", d.spread_component, c.spread, 1e-3));
    report.add(absolute_check("decomposition.free.total_norm_squared", d.total_norm * d.total_norm,
                              c.fibre * c.fibre + c.position * c.position + c.momentum * c.momentum +
                                  c.spread * c.spread,
                              1e-3));
  });

  guarded(report, "ehrenfest", [&] {
    const StateVector psi = realize(grid, {cfg.dynamics.a0, cfg.dynamics.p0, s}, ph.hbar);
    const EhrenfestResidual h = ehrenfest_check(psi, PotentialSpec::harmonic(1.0, mid), ph, cfg.dynamics.dt);
    report.add(bound_check("ehrenfest.harmonic.position", h.position, 1e-5));
    report.add(bound_check("ehrenfest.harmonic.momentum", h.momentum, 1e-5));
    const StateVector broad = realize(grid, {mid + 0.3, 0.2, 2.0 * s}, ph.hbar);
    const PotentialSpec quartic = PotentialSpec::polynomial({mid * mid * mid * mid, -4.0 * mid * mid * mid,
                                                             6.0 * mid * mid, -4.0 * mid, 1.0});
    const EhrenfestResidual q = ehrenfest_check(broad, quartic, ph, cfg.dynamics.quartic_dt);
    report.add(bound_check("ehrenfest.quartic.position", q.position, 1e-5));
    report.add_metric("ehrenfest.quartic.momentum", q.momentum);
  });

  guarded(report, "anticommutator", [&] {
    const Grid small(64, -8.0, 8.0, true);
    const StateVector psi = random_state(small, cfg.seed, kAnticommutatorState);
    const PotentialSpec V = PotentialSpec::harmonic(1.0);
    report.add(bound_check("anticommutator.identity",
                           anticommutator_identity_check(psi, Observable::identity, V, ph).residual, 1e-8));
    report.add(bound_check("anticommutator.position",
                           anticommutator_identity_check(psi, Observable::position, V, ph).residual, 1e-6));
    report.add(bound_check("anticommutator.momentum",
                           anticommutator_identity_check(psi, Observable::momentum, V, ph).residual, 1e-6));
    StateVector wave(small);
    const double k = 2.0 * kPi * 3.0 / small.length();
    for (std::size_t j = 0; j < small.size(); ++j) wave[j] = std::polar(1.0, k * small.x(j));
    wave = wave.normalized();
    report.add(bound_check("anticommutator.plane_wave_momentum",
                           anticommutator_identity_check(wave, Observable::momentum, PotentialSpec::free(), ph).residual,
                           1e-8));
  });

  guarded(report, "constrained_motion", [&] {
    const PotentialSpec V = build_potential(cfg);
    const GaussianParams q0{cfg.dynamics.a0, cfg.dynamics.p0, s};
    const ConstrainedMotion m = constrained_motion_check(grid, q0, V, ph, cfg.dynamics.t_final, cfg.dynamics.dt);
    CsvWriter csv(out / "trajectory.csv", {"t", "x_quantum", "p_quantum", "a_newton", "p_newton"});
    report.add_artifact("trajectory.csv");
    for (const MotionSample& x : m.samples) csv.row(x.t, x.x_quantum, x.p_quantum, x.a_newton, x.p_newton);
    report.add(bound_check("constrained_motion.max_deviation", m.max_deviation, 1e-4));
    report.add_metric("constrained_motion.max_position_deviation", m.max_position_deviation);
    report.add_metric("constrained_motion.max_momentum_deviation", m.max_momentum_deviation);

    const StateVector end = propagate(realize(grid, q0, ph.hbar), V, ph, cfg.dynamics.t_final, cfg.dynamics.dt);
    report.add(absolute_check("propagate.norm", end.norm(), 1.0, 1e-8));

    if (!V.time_dependent()) {
      const auto traj = newton_integrate(q0.a, q0.p, V, ph, cfg.dynamics.t_final, cfg.dynamics.dt);
      const double e0 = classical_energy(q0.a, q0.p, V, ph);
      double drift = 0.0;
      for (const PhasePoint& pt : traj)
        drift = std::max(drift, std::abs(classical_energy(pt.a, pt.p, V, ph) - e0) / std::max(std::abs(e0), 1e-12));
      report.add(bound_check("newton.energy_drift_relative", drift, 1e-6));
    }
  });
}

void run_reconstruct(const ExperimentConfig& cfg, const fs::path& out, Report& report) {
  const PhysicsParams ph = config_physics(cfg);
  const double omega0 = cfg.reconstruct.omega0;
  const int n_solve = cfg.reconstruct.solve_dimension;
  const PotentialSpec configured = build_potential(cfg);
  const bool configured_polynomial = !configured.time_dependent() && configured.polynomial_coefficients().has_value();
  const PotentialSpec kernel_potential = configured_polynomial ? configured : PotentialSpec::harmonic(1.0);

  guarded(report, "reconstruct.kernel", [&] {
    CsvWriter csv(out / "kernel.csv", {"N", "interior", "kernel_dimension"});
    report.add_artifact("kernel.csv");
    for (int n : cfg.reconstruct.dimensions) {
      const OperatorTriple ops = build_operators(n, ph, kernel_potential, -1, omega0);
      const std::size_t dim = kernel_of_constraints(ops);
      csv.row(n, ops.interior(), dim);
      report.add(absolute_check("reconstruct.kernel_dimension.N" + std::to_string(n), static_cast<double>(dim), 1.0, 0.0));
    }
  });

  guarded(report, "reconstruct.solve", [&] {
    CsvWriter csv(out / "reconstruct.csv",
                  {"potential", "N", "interior", "block_error", "residual_x", "residual_p", "gauge_constant"});
    report.add_artifact("reconstruct.csv");
    std::vector<std::pair<std::string, PotentialSpec>> cases{{"free", PotentialSpec::free()},
                                                             {"linear", PotentialSpec::linear(0.7)},
                                                             {"harmonic", PotentialSpec::harmonic(1.0)}};
    if (configured_polynomial) cases.emplace_back("configured", configured);
    for (const auto& [name, V] : cases) {
      const OperatorTriple ops = build_operators(n_solve, ph, V, -1, omega0);
      const ReconstructionResult r = solve_hamiltonian(ops, ph);
      csv.row(name, n_solve, ops.interior(), r.block_error, r.residual_x, r.residual_p, r.gauge_constant);
      const std::string prefix = "reconstruct." + name + ".";
      report.add(bound_check(prefix + "block_error", r.block_error, 1e-6));
      report.add(bound_check(prefix + "gauge_constant", std::abs(r.gauge_constant), 1e-8));
      report.add(bound_check(prefix + "hermiticity", (r.H_solved - r.H_solved.adjoint()).norm(), 1e-10));
      Eigen::MatrixXcd shifted = r.H_extended;
      shifted.diagonal().array() += 3.7;
      const ConstraintResiduals moved = constraint_residuals(ops, shifted);
      report.add(bound_check(prefix + "gauge_invariance",
                             std::abs(moved.residual_x - r.residual_x) + std::abs(moved.residual_p - r.residual_p),
                             1e-10));
    }
    const OperatorTriple ops = build_operators(n_solve, ph, PotentialSpec::harmonic(1.0), -1, omega0);
    report.add(bound_check("reconstruct.canonical_defect", canonical_defect(ops), 1e-10));
  });

  guarded(report, "reconstruct.null_test", [&] {
    OperatorTriple ops = build_operators(n_solve, ph, PotentialSpec::harmonic(1.0), -1, omega0);
    RngStream rng(cfg.seed, stream_id(StreamPurpose::test_data, kNullTestForce));
    ops.F = random_hermitian(ops.dimension, rng);
    const ReconstructionResult r = solve_hamiltonian(ops, ph);
    const double ratio = r.residual_p / ops.F.topLeftCorner(ops.interior(), ops.interior()).norm();
    report.add(at_least_check("reconstruct.null_test.residual_ratio", ratio, 1e-2));
  });

  guarded(report, "reconstruct.coherent", [&] {
    const OperatorTriple ops = build_operators(n_solve, ph, PotentialSpec::harmonic(1.0), -1, omega0);
    const ReconstructionResult r = solve_hamiltonian(ops, ph);
    std::vector<double> times;
    for (int k = 0; k <= 10; ++k) times.push_back(0.1 * k);
    const double a0 = cfg.dynamics.a0;
    const std::vector<double> matrix_x = coherent_position_trajectory(ops, r.H_solved, a0, 0.0, times);

    const Grid grid = config_grid(cfg);
    StateVector psi = realize(grid, {a0, 0.0, ops.position_scale}, ph.hbar);
    CsvWriter csv(out / "coherent.csv", {"t", "x_matrix", "x_grid"});
    report.add_artifact("coherent.csv");
    double worst = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (k > 0) psi = propagate(psi, PotentialSpec::harmonic(1.0), ph, times[k] - times[k - 1], cfg.dynamics.dt);
      const double xg = expect_position(psi);
      worst = std::max(worst, std::abs(xg - matrix_x[k]));
      csv.row(times[k], matrix_x[k], xg);
    }
    report.add(bound_check("reconstruct.coherent_trajectory_max_deviation", worst, 1e-3));
  });
}

void run_born_diffusion(const ExperimentConfig& cfg, const fs::path& out, Report& report) {
  const Grid grid = config_grid(cfg);
  const double s = cfg.physics.sigma;
  const DiffusionConfig base = config_diffusion(cfg);

  guarded(report, "pde", [&] {
    const Grid bins(cfg.diffusion.pde_bins, cfg.grid.x_min, cfg.grid.x_max, false);
    const PdeCheck pde = verify_diffusion_pde(base, bins, grid_middle(cfg), cfg.diffusion.epochs);
    CsvWriter csv(out / "pde_density.csv", {"epoch", "x", "density", "heat_kernel"});
    report.add_artifact("pde_density.csv");
    for (const PdeEpoch& e : pde.epochs) {
      for (std::size_t j = 0; j < pde.bin_centers.size(); ++j) csv.row(e.epoch, pde.bin_centers[j], e.density[j], e.heat_kernel[j]);
      if (e.epoch > 0)
        report.add(relative_check("pde.variance.epoch" + std::to_string(e.epoch), e.variance, e.expected_variance, 0.05));
    }
    report.add(bound_check("pde.sup_residual", pde.max_residual, 0.03));
    if (cfg.diffusion.epochs >= 2) report.add(bound_check("pde.variance_additivity", pde.max_variance_error, 0.05));
  });

  guarded(report, "born", [&] {
    const LatticeSpec lattice{s, cfg.diffusion.lattice_spacing, grid_middle(cfg), 0.05};
    CsvWriter hist(out / "born_histograms.csv", {"case", "bin_lo", "bin_hi", "count", "density", "reference"});
    CsvWriter comps(out / "born_components.csv",
                    {"case", "center", "expected", "observed", "standard_error", "within_3sd"});
    report.add_artifact("born_histograms.csv");
    report.add_artifact("born_components.csv");
    double worst_l1 = 0.0;
    for (int i = 0; i < cfg.diffusion.superpositions; ++i) {
      const Superposition sup = random_superposition(grid, lattice, cfg.seed, static_cast<std::uint64_t>(i));
      DiffusionConfig dc = base;
      dc.seed = cfg.seed + 1 + static_cast<std::uint64_t>(i);
      const DensityEstimate est = simulate_state_diffusion(sup.state, dc, lattice);
      for (std::size_t b = 0; b < est.counts.size(); ++b)
        hist.row(i, est.bin_edges[b], est.bin_edges[b + 1], est.counts[b], est.density[b], est.reference[b]);
      int outside = 0;
      for (const ComponentMass& c : est.components) {
        comps.row(i, c.center, c.expected, c.observed, c.standard_error, c.within_3sd);
        outside += c.within_3sd ? 0 : 1;
      }
      const std::string prefix = "born.case" + std::to_string(i) + ".";
      report.add(bound_check(prefix + "l1_error", est.l1_error, 0.02));
      report.add(bound_check(prefix + "components_outside_3sd", outside, 0.0));
      report.add_metric(prefix + "components", static_cast<double>(est.components.size()));
      report.add_metric(prefix + "l1_error_fine_bins", est.l1_error_fine);
      report.add_metric(prefix + "ks_statistic", est.ks_statistic);
      report.add_metric(prefix + "ks_critical_1pct", est.ks_critical);
      worst_l1 = std::max(worst_l1, est.l1_error);
    }
    report.add_metric("born.max_l1_error", worst_l1);
  });

  guarded(report, "transition_density", [&] {
    const Grid small(64, -8.0, 8.0, true);
    RngStream rng(cfg.seed, stream_id(StreamPurpose::test_data, kInvariancePairs));
    double invariance = 0.0;
    double exchange = 0.0;
    double form = 0.0;
    for (int k = 0; k < 50; ++k) {
      const StateVector phi = random_state(small, cfg.seed, kInvariancePairs + 1 + 2 * static_cast<std::uint64_t>(k));
      const StateVector psi = random_state(small, cfg.seed, kInvariancePairs + 2 + 2 * static_cast<std::uint64_t>(k));
      const Eigen::MatrixXcd U = random_unitary(64, rng);
      const StateVector phi_u(small, U * phi.amplitudes());
      const StateVector psi_u(small, U * psi.amplitudes());
      const double rho = density_functional(phi, psi, s);
      invariance = std::max(invariance, std::abs(density_functional(phi_u, psi_u, s) - rho));
      exchange = std::max(exchange, std::abs(density_functional(psi, phi, s) - rho));
      form = std::max(form, std::abs(density_functional_quadratic_form(phi, psi, s) - rho) / rho);
    }
    report.add(bound_check("transition_density.unitary_invariance", invariance, 1e-8));
    report.add(bound_check("transition_density.exchange_symmetry", exchange, 0.0));
    report.add(bound_check("transition_density.quadratic_form_relative", form, 1e-10));
  });
}

void run_solid_com(const ExperimentConfig& cfg, const fs::path& out, Report& report) {
  guarded(report, "solid_com", [&] {
    const DiffusionConfig dc = config_diffusion(cfg);
    const SolidComResult single = solid_com_diffusion(1, cfg.solid.kick_std, dc);
    CsvWriter csv(out / "solid_com.csv",
                  {"n_cells", "variance", "diffusion_coefficient", "ratio_to_single", "expected_ratio"});
    report.add_artifact("solid_com.csv");
    double previous = std::numeric_limits<double>::infinity();
    int non_monotone = 0;
    std::vector<std::size_t> cells = cfg.solid.n_cells;
    std::sort(cells.begin(), cells.end());
    for (std::size_t n : cells) {
      const SolidComResult r = n == 1 ? single : solid_com_diffusion(n, cfg.solid.kick_std, dc);
      const double ratio = r.diffusion_coefficient / single.diffusion_coefficient;
      const double expected = 1.0 / static_cast<double>(n);
      csv.row(n, r.variance, r.diffusion_coefficient, ratio, expected);
      report.add(relative_check("solid_com.ratio.n" + std::to_string(n), ratio, expected, 0.10));
      if (r.diffusion_coefficient >= previous) ++non_monotone;
      previous = r.diffusion_coefficient;
    }
    report.add(relative_check("solid_com.single_cell_k", single.diffusion_coefficient,
                              cfg.solid.kick_std * cfg.solid.kick_std / (2.0 * cfg.diffusion.tau), 0.05));
    report.add(bound_check("solid_com.non_monotone_steps", non_monotone, 0.0));
  });
}

int run(const std::string& subcommand, const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), subcommand) == names.end())
    throw ConfigError("unknown subcommand '" + subcommand + "'");
  validate(cfg);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("cannot create output directory " + out.string() + ": " + ec.message());

  Report report(cfg.experiment, subcommand, to_json(cfg));
  nlohmann::json timing = nlohmann::json::object();
  const auto start = std::chrono::steady_clock::now();
  auto section = [&](const char* name, void (*fn)(const ExperimentConfig&, const fs::path&, Report&)) {
    if (subcommand != "all" && subcommand != name) return;
    const auto t0 = std::chrono::steady_clock::now();
    log << "running " << name << "\n";
    fn(cfg, out, report);
    timing[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  section("geometry-identities", run_geometry_identities);
  section("dynamics-checks", run_dynamics_checks);
  section("reconstruct", run_reconstruct);
  section("born-diffusion", run_born_diffusion);
  section("solid-com", run_solid_com);
  timing["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  report.write(out / "report.json");
  {
    std::ofstream t(out / "timing.json");
    t << timing.dump(2) << '\n';
  }
  for (const CheckRecord& c : report.checks())
    log << (c.pass ? "pass  " : "FAIL  ") << c.name << " = " << format_number(c.value) << '\n';
  for (const auto& b : report.to_json().at("breakdowns")) log << "BREAKDOWN  " << b.at("check").get<std::string>() << ": " << b.at("message").get<std::string>() << '\n';

  if (report.broke_down()) return kBreakdown;
  return report.passed() ? kPass : kCheckFailed;
}

}  // namespace cqlab::runner

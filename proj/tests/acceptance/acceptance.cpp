// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes within its runtime budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <Eigen/Eigenvalues>

#include <cqlab/diffusion.hpp>
#include <cqlab/dynamics.hpp>
#include <cqlab/geometry.hpp>
#include <cqlab/reconstruct.hpp>
#include <cqlab/rng.hpp>

#include "oracles.hpp"

using namespace cqlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_seconds;
  std::function<Outcome()> body;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

const Grid kGrid(512, -16.0, 16.0, true);
constexpr double kSigma = 0.5;
const PhysicsParams kUnit{1.0, 1.0};

StateVector random_state(const Grid& g, RngStream& rng) {
  StateVector psi(g);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double re = rng.normal();
    const double im = rng.normal();
    psi[j] = Complex(re, im);
  }
  return psi.normalized();
}

Outcome overlap_distance() {
  const KernelSpace ks(kSigma, kGrid);
  double worst = 0.0;
  for (double r : {0.5, 1.0, 2.0, 4.0}) {
    const double d = fs_distance(embed_point(0.0, ks), embed_point(r * kSigma, ks));
    worst = std::max(worst, std::abs(std::cos(d) * std::cos(d) - std::exp(-r * r / 4.0)));
  }
  return {worst < 1e-8, "max deviation " + num(worst)};
}

Outcome isometry_projection() {
  const KernelSpace ks(kSigma, kGrid);
  double iso = 0.0, proj = 0.0;
  for (double v : {-2.0, 0.4, 1.3, 3.0}) {
    const DeltaPath uniform = [v](double t) { return 0.1 + v * t; };
    iso = std::max(iso, std::abs(2.0 * kSigma * h_norm_velocity(uniform, ks) - std::abs(v)) / std::abs(v));
    proj = std::max(proj, std::abs(2.0 * kSigma * delta_path_projection(uniform, 1, ks) - v) / std::abs(v));
    for (double g : {-0.8, 1.5}) {
      const DeltaPath accel = [v, g](double t) { return 0.1 + v * t + 0.5 * g * t * t; };
      proj = std::max(proj, std::abs(2.0 * kSigma * delta_path_projection(accel, 1, ks) - v) / std::abs(v));
      proj = std::max(proj, std::abs(2.0 * kSigma * delta_path_projection(accel, 2, ks) - g) / std::abs(g));
    }
  }
  return {iso < 1e-4 && proj < 1e-3, "isometry rel " + num(iso) + ", projection rel " + num(proj)};
}

Outcome fs_metric() {
  const GaussianParams q{0.3, 0.7, kSigma};
  double worst = 0.0;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) {
      if (i == 0 && j == 0) continue;
      const double da = 0.01 * i * kSigma, dp = 0.01 * j / kSigma;
      const MetricSample m = fs_metric_restriction_check(kGrid, q, da, dp);
      const double rhs = da * da / (4.0 * kSigma * kSigma) + kSigma * kSigma * dp * dp;
      worst = std::max(worst, std::abs(m.lhs - rhs) / rhs);
    }
  return {worst < 1e-3, "max relative error " + num(worst)};
}

Outcome decomposition() {
  const PotentialSpec family[] = {PotentialSpec::free(), PotentialSpec::linear(0.5), PotentialSpec::harmonic(1.0)};
  double closure = 0.0, closed = 0.0;
  for (const PotentialSpec& V : family)
    for (int i = -2; i <= 2; ++i)
      for (int k = -2; k <= 2; ++k) {
        const GaussianParams q{0.5 * i, 0.5 * k, kSigma};
        const VelocityDecomposition d = velocity_decomposition(kGrid, q, V, kUnit);
        const double sum = d.fibre_component * d.fibre_component + d.position_component * d.position_component +
                           d.momentum_component * d.momentum_component + d.spread_component * d.spread_component;
        closure = std::max(closure, std::abs(d.total_norm * d.total_norm - sum) / sum);
        const double v1 = V.derivative(q.a), v2 = V.second_derivative(q.a);
        const double e = oracle::packet_energy(q.p, kSigma, V.value(q.a), v2, 1.0, 1.0);
        closed = std::max({closed, std::abs(d.fibre_component - e), std::abs(d.position_component - q.p / (2.0 * kSigma)),
                           std::abs(d.momentum_component + v1 * kSigma),
                           std::abs(d.spread_component - (std::sqrt(2.0) / (8.0 * kSigma * kSigma) -
                                                          v2 * kSigma * kSigma / std::sqrt(2.0)))});
      }
  const VelocityDecomposition f = velocity_decomposition(kGrid, {0.0, 1.0, kSigma}, PotentialSpec::free(), kUnit);
  const double frozen = std::max({std::abs(f.fibre_component - 1.0), std::abs(f.position_component - 1.0),
                                  std::abs(f.momentum_component), std::abs(f.spread_component - std::sqrt(2.0) / 2.0),
                                  std::abs(f.mean_energy - 1.0), std::abs(f.total_norm * f.total_norm - 2.5)});
  return {closure < 1e-3 && closed < 1e-3 && frozen < 1e-6,
          "closure rel " + num(closure) + ", closed-form abs " + num(closed) + ", free-particle values abs " + num(frozen)};
}

Outcome ehrenfest_anticommutator() {
  const EhrenfestResidual h = ehrenfest_check(realize(kGrid, {1.0, 0.0, kSigma}), PotentialSpec::harmonic(1.0), kUnit, 1e-3);
  const EhrenfestResidual q =
      ehrenfest_check(realize(kGrid, {0.3, 0.2, 1.0}), PotentialSpec::polynomial({0, 0, 0, 0, 1}), kUnit, 1e-4);
  const double ehr = std::max({h.position, h.momentum, q.position, q.momentum});

  const Grid g(64, -8.0, 8.0, true);
  const PotentialSpec V = PotentialSpec::harmonic(1.0);
  RngStream rng(42, stream_id(StreamPurpose::test_data, 5));
  const StateVector psi = random_state(g, rng);
  const Eigen::MatrixXcd H = oracle::hamiltonian_matrix(g, V.sample(g), 1.0, 1.0);
  Eigen::MatrixXcd X = Eigen::MatrixXcd::Zero(64, 64);
  for (Eigen::Index j = 0; j < 64; ++j) X(j, j) = g.x(static_cast<std::size_t>(j));
  const Eigen::MatrixXcd mats[] = {Eigen::MatrixXcd::Identity(64, 64), X, oracle::momentum_matrix(g, 1.0)};
  const Observable obs[] = {Observable::identity, Observable::position, Observable::momentum};
  double anti = 0.0;
  const Eigen::VectorXcd& v = psi.amplitudes();
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXcd dpsi = Complex(0.0, -1.0) * (H * v);
    const Complex lhs = 2.0 * oracle::inner(dpsi, Complex(0.0, -1.0) * (mats[k] * v), g.dx());
    const Complex rhs = oracle::inner(v, (mats[k] * H + H * mats[k]) * v, g.dx()) -
                        oracle::inner(v, (mats[k] * H - H * mats[k]) * v, g.dx());
    const AnticommutatorResult lib = anticommutator_identity_check(psi, obs[k], V, kUnit);
    anti = std::max({anti, lib.residual, std::abs(lib.lhs - lhs), std::abs(lib.rhs - rhs)});
  }
  return {ehr < 1e-5 && anti < 1e-6, "Ehrenfest max " + num(ehr) + ", anticommutator max " + num(anti)};
}

Outcome constrained_motion() {
  const ConstrainedMotion m = constrained_motion_check(kGrid, {1.0, 0.0, kSigma}, PotentialSpec::harmonic(1.0), kUnit,
                                                       2.0 * std::numbers::pi, 1e-3);
  return {m.max_deviation < 1e-4, "max deviation " + num(m.max_deviation)};
}

Outcome reconstruction() {
  double worst = 0.0;
  for (const PotentialSpec& V : {PotentialSpec::free(), PotentialSpec::linear(0.7), PotentialSpec::harmonic(1.0)})
    worst = std::max(worst, solve_hamiltonian(build_operators(32, kUnit, V), kUnit).block_error);
  bool unique = true;
  std::string dims;
  for (int n : {16, 32, 64}) {
    const std::size_t k = kernel_of_constraints(build_operators(n, kUnit, PotentialSpec::harmonic(1.0)));
    unique = unique && k == 1;
    dims += (dims.empty() ? "" : "/") + std::to_string(k);
  }
  return {worst < 1e-6 && unique, "block error " + num(worst) + ", kernel dimensions " + dims};
}

Outcome diffusion_pde() {
  DiffusionConfig cfg;
  cfg.seed = 42;
  const PdeCheck pde = verify_diffusion_pde(cfg, Grid(256, -16.0, 16.0, false), 0.0, 2);
  return {pde.max_residual < 0.03 && pde.max_variance_error < 0.05,
          "sup residual " + num(pde.max_residual) + ", variance additivity " + num(pde.max_variance_error)};
}

Outcome born_rule() {
  const LatticeSpec lattice{kSigma, 4.0, 0.0, 0.05};
  double worst = 0.0;
  int outside = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const Superposition s = random_superposition(kGrid, lattice, 42, i);
    DiffusionConfig cfg;
    cfg.seed = 43 + i;
    const DensityEstimate est = simulate_state_diffusion(s.state, cfg, lattice);
    worst = std::max(worst, est.l1_error);
    for (const ComponentMass& c : est.components) outside += c.within_3sd ? 0 : 1;
  }
  return {worst < 0.02 && outside == 0, "max L1 " + num(worst) + ", components outside 3 SD " + std::to_string(outside)};
}

Outcome transition_density() {
  const Grid g(64, -8.0, 8.0, true);
  RngStream rng(42, stream_id(StreamPurpose::test_data, 6));
  double inv = 0.0;
  bool exchange = true;
  for (int k = 0; k < 50; ++k) {
    Eigen::MatrixXcd a(64, 64);
    for (Eigen::Index i = 0; i < 64; ++i)
      for (Eigen::Index j = 0; j < 64; ++j) {
        const double re = rng.normal();
        const double im = rng.normal();
        a(i, j) = Complex(re, im);
      }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (a + a.adjoint()));
    Eigen::VectorXcd ph(64);
    for (Eigen::Index i = 0; i < 64; ++i) ph[i] = std::polar(1.0, eig.eigenvalues()[i]);
    const Eigen::MatrixXcd U = eig.eigenvectors() * ph.asDiagonal() * eig.eigenvectors().adjoint();
    const StateVector phi = random_state(g, rng), psi = random_state(g, rng);
    const double rho = density_functional(phi, psi, kSigma);
    inv = std::max(inv, std::abs(density_functional(StateVector(g, U * phi.amplitudes()),
                                                    StateVector(g, U * psi.amplitudes()), kSigma) -
                                 rho));
    exchange = exchange && density_functional(psi, phi, kSigma) == rho;
  }
  return {inv < 1e-8 && exchange, "unitary invariance " + num(inv) + (exchange ? ", exchange exact" : ", exchange broken")};
}

Outcome com_suppression() {
  DiffusionConfig cfg;
  cfg.seed = 42;
  const double k1 = solid_com_diffusion(1, 0.5, cfg).diffusion_coefficient;
  double worst = 0.0;
  for (std::size_t n : {10u, 100u}) {
    const double ratio = solid_com_diffusion(n, 0.5, cfg).diffusion_coefficient / k1;
    worst = std::max(worst, std::abs(ratio * static_cast<double>(n) - 1.0));
  }
  return {worst < 0.10, "max relative deviation from 1/n " + num(worst)};
}

int run_cli(const fs::path& out, const char* threads) {
  fs::remove_all(out);
  const std::string cmd =
      std::string("CQLAB_THREADS=") + threads + " " + CQLAB_CLI_PATH + " all --quiet --seed 42 --out " + out.string() + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "cqlab_acceptance";
  const fs::path a = base / "run1", b = base / "run2";
  const int ca = run_cli(a, "1");
  const int cb = run_cli(b, "3");
  if (ca != cb) return {false, "exit codes differ: " + std::to_string(ca) + " vs " + std::to_string(cb)};
  if (ca != 0 && ca != 1) return {false, "run did not complete (exit " + std::to_string(ca) + ")"};
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const std::string name = entry.path().filename().string();
    if (name == "timing.json") continue;
    if (!fs::exists(b / name)) return {false, name + " missing from second run"};
    if (slurp(entry.path()) != slurp(b / name)) return {false, name + " differs"};
    ++compared;
  }
  if (compared < 2) return {false, "no outputs to compare"};
  return {true, std::to_string(compared) + " files byte-identical (1 vs 3 threads), exit " + std::to_string(ca)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "overlap-distance identity", 1.0, overlap_distance},
      {2, "isometry and projections", 5.0, isometry_projection},
      {3, "FS-metric restriction", 5.0, fs_metric},
      {4, "velocity decomposition closure", 10.0, decomposition},
      {5, "Ehrenfest and anticommutator identities", 10.0, ehrenfest_anticommutator},
      {6, "constrained classical motion", 10.0, constrained_motion},
      {7, "Hamiltonian reconstruction", 30.0, reconstruction},
      {8, "diffusion PDE", 30.0, diffusion_pde},
      {9, "Born rule", 60.0, born_rule},
      {10, "transition density symmetry", 10.0, transition_density},
      {11, "COM diffusion suppression", 30.0, com_suppression},
      {12, "determinism of `all`", 600.0, determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = t < c.budget_seconds;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s criterion %2d  %-42s %s; %.2fs of %.0fs%s\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                o.detail.c_str(), t, c.budget_seconds, in_time ? "" : " (over budget)");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

#pragma once

// Schrodinger propagation, Newtonian integration and the checks that relate them.

#include <vector>

#include "cqlab/fft.hpp"
#include "cqlab/geometry.hpp"
#include "cqlab/numerics.hpp"
#include "cqlab/potential.hpp"

namespace cqlab {

struct PhysicsParams {
  double hbar = 1.0;
  double mass = 1.0;

  void validate() const;
};

// Strang split-step propagator: half potential step, exact kinetic step in
// Fourier space, half potential step. V is evaluated at the step midpoint, so
// piecewise-constant noise stays exact when the noise step is a multiple of dt.
class SplitStepPropagator {
 public:
  SplitStepPropagator(const Grid& grid, PotentialSpec potential, PhysicsParams phys);

  const Grid& grid() const { return ops_.grid(); }
  const PotentialSpec& potential() const { return potential_; }
  const PhysicsParams& physics() const { return phys_; }

  // steps steps of size h starting at t0; h may be negative.
  void advance(ComplexVector& psi, double t0, double h, long long steps) const;

  // Largest phase advance per step over the support of psi (|psi|^2 above
  // 1e-10 of its peak, in position and in momentum).
  double max_phase_step(const StateVector& psi, double h, double t0 = 0.0) const;

 private:
  SpectralOps ops_;
  PotentialSpec potential_;
  PhysicsParams phys_;
  RealVector static_v_;
  RealVector nodes_;
};

inline constexpr double kMaxPhaseStep = 0.5;

// Propagates psi over [0, t_final] with steps of at most dt. Throws
// std::invalid_argument for dt <= 0, a negative t_final, a non-periodic grid or a
// phase step above kMaxPhaseStep; std::domain_error if V is not finite.
StateVector propagate(const StateVector& psi, const PotentialSpec& V, const PhysicsParams& phys, double t_final,
                      double dt);

StateVector apply_hamiltonian(const StateVector& psi, const PotentialSpec& V, const PhysicsParams& phys,
                              double t = 0.0);
StateVector apply_momentum(const StateVector& psi, double hbar = 1.0);
double expect_momentum(const StateVector& psi, double hbar = 1.0);
double expect_force(const StateVector& psi, const PotentialSpec& V, double t = 0.0);

struct PhasePoint {
  double t = 0.0;
  double a = 0.0;
  double p = 0.0;
};

// Velocity Verlet. Returns the initial point followed by one point per step.
std::vector<PhasePoint> newton_integrate(double a0, double p0, const PotentialSpec& V, const PhysicsParams& phys,
                                         double t_final, double dt);
double classical_energy(double a, double p, const PotentialSpec& V, const PhysicsParams& phys);

// Components of d phi/dt = (-i/hbar) h phi at phi = Omega(q), as Re inner
// products with unit tangent directions. The fibre component is taken along
// -i phi, the direction of phase rotation for positive energy.
struct VelocityDecomposition {
  double fibre_component = 0.0;     // E/hbar
  double position_component = 0.0;  // v/(2 sigma)
  double momentum_component = 0.0;  // m w sigma/hbar, m w = -V'(a)
  double spread_component = 0.0;    // sqrt2 hbar/(8 sigma^2 m) - V''(a) sigma^2/(sqrt2 hbar)
  double total_norm = 0.0;          // |d phi/dt|
  double energy_uncertainty = 0.0;  // Delta h
  double mean_energy = 0.0;
  double projective_speed = 0.0;  // |d phi/dt - fibre part|
  double linearity_ratio = 0.0;   // |V''(a)| sigma / max(|V'(a)|, 1e-6)
  bool nonlinear_warning = false;
};

inline constexpr double kLinearityThreshold = 0.05;

VelocityDecomposition velocity_decomposition(const Grid& grid, const GaussianParams& q, const PotentialSpec& V,
                                             const PhysicsParams& phys);

struct StateVelocity {
  double mean_energy = 0.0;
  double energy_uncertainty = 0.0;  // sqrt((psi, h^2 psi) - E^2)
  double total_norm = 0.0;
  double projective_speed = 0.0;  // |(h - E) psi| / hbar
};

StateVelocity state_velocity(const StateVector& psi, const PotentialSpec& V, const PhysicsParams& phys,
                             double t = 0.0);

struct EhrenfestResidual {
  double position = 0.0;  // |d<x>/dt - <p>/m|
  double momentum = 0.0;  // |d<p>/dt + <V'>|
};

// Central differences over one propagation step of +-dt.
EhrenfestResidual ehrenfest_check(const StateVector& psi, const PotentialSpec& V, const PhysicsParams& phys,
                                  double dt);

enum class Observable { identity, position, momentum };

// 2 (d psi/dt, -i A psi) = [(psi, {A,h} psi) - (psi, [A,h] psi)] / hbar.
// The real part carries the anticommutator, the imaginary part the commutator.
struct AnticommutatorResult {
  Complex lhs;
  Complex rhs;
  double residual_real = 0.0;
  double residual_imag = 0.0;
  double residual = 0.0;
};

AnticommutatorResult anticommutator_identity_check(const StateVector& psi, Observable A, const PotentialSpec& V,
                                                   const PhysicsParams& phys);

struct MotionSample {
  double t = 0.0;
  double x_quantum = 0.0;
  double p_quantum = 0.0;
  double a_newton = 0.0;
  double p_newton = 0.0;
};

struct ConstrainedMotion {
  double max_position_deviation = 0.0;
  double max_momentum_deviation = 0.0;
  double max_deviation = 0.0;
  std::vector<MotionSample> samples;  // every sample_stride steps plus the last
};

ConstrainedMotion constrained_motion_check(const Grid& grid, const GaussianParams& q0, const PotentialSpec& V,
                                           const PhysicsParams& phys, double t_final, double dt,
                                           long long sample_stride = 50);

}  // namespace cqlab

#include "cqlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cqlab {

namespace {

const Complex kI{0.0, 1.0};

long long step_count(double t_final, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be positive and finite");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw std::invalid_argument("final time must be non-negative");
  return static_cast<long long>(std::ceil(t_final / dt - 1e-9));
}

StateVector apply_observable(const StateVector& psi, Observable A, double hbar) {
  switch (A) {
    case Observable::identity:
      return psi;
    case Observable::position: {
      StateVector out = psi;
      const RealVector x = psi.grid().nodes();
      out.amplitudes() = x.cast<Complex>().cwiseProduct(psi.amplitudes());
      return out;
    }
    case Observable::momentum:
      return apply_momentum(psi, hbar);
  }
  throw std::invalid_argument("unsupported observable");
}

}  // namespace

void PhysicsParams::validate() const {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw std::invalid_argument("hbar must be positive");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw std::invalid_argument("mass must be positive");
}

SplitStepPropagator::SplitStepPropagator(const Grid& grid, PotentialSpec potential, PhysicsParams phys)
    : ops_(grid), potential_(std::move(potential)), phys_(phys), nodes_(grid.nodes()) {
  phys_.validate();
  static_v_ = potential_.without_noise().sample(grid);
}

void SplitStepPropagator::advance(ComplexVector& psi, double t0, double h, long long steps) const {
  const auto n = static_cast<Eigen::Index>(grid().size());
  if (psi.size() != n) throw GridMismatch("state does not live on the propagator grid");
  const double hbar = phys_.hbar;
  const RealVector& k = ops_.k();

  ComplexVector kinetic(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double c = hbar * h / (2.0 * phys_.mass);
  for (Eigen::Index j = 0; j < n; ++j) kinetic[j] = std::polar(inv_n, -c * k[j] * k[j]);

  ComplexVector half(n);
  auto fill_half = [&](double force) {
    for (Eigen::Index j = 0; j < n; ++j) half[j] = std::polar(1.0, -(static_v_[j] - force * nodes_[j]) * h / (2.0 * hbar));
  };
  const bool noisy = potential_.time_dependent();
  if (!noisy) fill_half(0.0);

  ComplexVector spec(n);
  for (long long s = 0; s < steps; ++s) {
    if (noisy) fill_half(potential_.noise_force(t0 + (static_cast<double>(s) + 0.5) * h));
    psi.array() *= half.array();
    ops_.fft().forward(psi, spec);
    spec.array() *= kinetic.array();
    ops_.fft().backward(spec, psi);
    psi.array() *= half.array();
  }
}

double SplitStepPropagator::max_phase_step(const StateVector& psi, double h, double t0) const {
  const auto n = static_cast<Eigen::Index>(grid().size());
  const RealVector rho = psi.amplitudes().cwiseAbs2();
  const double rho_cut = 1e-10 * rho.maxCoeff();
  const double force = potential_.noise_force(t0);
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -vmin;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (rho[j] <= rho_cut) continue;
    const double v = static_v_[j] - force * nodes_[j];
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  const double potential_phase = vmax >= vmin ? (vmax - vmin) * std::abs(h) / phys_.hbar : 0.0;

  ComplexVector spec;
  ops_.fft().forward(psi.amplitudes(), spec);
  const RealVector power = spec.cwiseAbs2();
  const double power_cut = 1e-10 * power.maxCoeff();
  double kmax2 = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    if (power[j] > power_cut) kmax2 = std::max(kmax2, ops_.k()[j] * ops_.k()[j]);
  const double kinetic_phase = phys_.hbar * kmax2 * std::abs(h) / (2.0 * phys_.mass);
  return std::max(potential_phase, kinetic_phase);
}

StateVector propagate(const StateVector& psi, const PotentialSpec& V, const PhysicsParams& phys, double t_final,
                      double dt) {
  const long long steps = step_count(t_final, dt);
  SplitStepPropagator prop(psi.grid(), V, phys);
  if (steps == 0) return psi;
  const double h = t_final / static_cast<double>(steps);
  const double phase = prop.max_phase_step(psi, h);
  if (phase > kMaxPhaseStep)
    throw std::invalid_argument("time step too coarse: phase advance " + std::to_string(phase) + " rad per step");
  StateVector out = psi;
  prop.advance(out.amplitudes(), 0.0, h, steps);
  return out;
}

StateVector apply_hamiltonian(const StateVector& psi, const PotentialSpec& V, const PhysicsParams& phys, double t) {
  phys.validate();
  const SpectralOps ops(psi.grid());
  StateVector out(psi.grid(), ops.apply_kinetic(psi.amplitudes(), phys.hbar, phys.mass));
  const RealVector v = V.sample(psi.grid(), t);
  out.amplitudes() += v.cast<Complex>().cwiseProduct(psi.amplitudes());
  return out;
}

StateVector apply_momentum(const StateVector& psi, double hbar) {
  const SpectralOps ops(psi.grid());
  return StateVector(psi.grid(), hbar * ops.apply_k_power(psi.amplitudes(), 1));
}

double expect_momentum(const StateVector& psi, double hbar) {
  const SpectralOps ops(psi.grid());
  ComplexVector spec;
  ops.fft().forward(psi.amplitudes(), spec);
  const RealVector power = spec.cwiseAbs2();
  return hbar * power.dot(ops.k()) / power.sum();
}

double expect_force(const StateVector& psi, const PotentialSpec& V, double t) {
  const RealVector rho = density(psi);
  return -rho.dot(V.sample_derivative(psi.grid(), t)) / rho.sum();
}

std::vector<PhasePoint> newton_integrate(double a0, double p0, const PotentialSpec& V, const PhysicsParams& phys,
                                         double t_final, double dt) {
  phys.validate();
  const long long steps = step_count(t_final, dt);
  std::vector<PhasePoint> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back({0.0, a0, p0});
  if (steps == 0) return out;
  const double h = t_final / static_cast<double>(steps);
  double a = a0;
  double p = p0;
  for (long long s = 0; s < steps; ++s) {
    const double t_mid = (static_cast<double>(s) + 0.5) * h;
    p -= 0.5 * h * V.derivative(a, t_mid);
    a += h * p / phys.mass;
    p -= 0.5 * h * V.derivative(a, t_mid);
    if (!std::isfinite(a) || !std::isfinite(p)) throw std::domain_error("Newtonian trajectory diverged");
    out.push_back({static_cast<double>(s + 1) * h, a, p});
  }
  return out;
}

double classical_energy(double a, double p, const PotentialSpec& V, const PhysicsParams& phys) {
  return p * p / (2.0 * phys.mass) + V.value(a);
}

VelocityDecomposition velocity_decomposition(const Grid& grid, const GaussianParams& q, const PotentialSpec& V,
                                             const PhysicsParams& phys) {
  phys.validate();
  const TangentBasis basis = tangent_basis(grid, q, phys.hbar);
  const StateVector& phi = basis.state;
  const StateVector h_phi = apply_hamiltonian(phi, V, phys);
  const StateVector velocity = Complex(0.0, -1.0 / phys.hbar) * h_phi;

  VelocityDecomposition d;
  d.fibre_component = real_inner(velocity, -kI * phi);
  d.position_component = real_inner(velocity, basis.position_direction);
  d.momentum_component = real_inner(velocity, basis.momentum_direction);
  d.spread_component = real_inner(velocity, spread_direction(grid, q, phys.hbar));
  d.total_norm = velocity.norm();
  d.mean_energy = inner_l2(h_phi, phi).real();
  d.energy_uncertainty = std::sqrt(std::max(0.0, h_phi.norm_squared() - d.mean_energy * d.mean_energy));
  d.projective_speed = (h_phi - Complex(d.mean_energy) * phi).norm() / phys.hbar;

  const double v1 = V.derivative(q.a);
  const double v2 = V.second_derivative(q.a);
  d.linearity_ratio = std::abs(v2) * q.sigma / std::max(std::abs(v1), 1e-6);
  d.nonlinear_warning = d.linearity_ratio >= kLinearityThreshold;
  return d;
}

StateVelocity state_velocity(const StateVector& psi, const PotentialSpec& V, const PhysicsParams& phys, double t) {
  const StateVector phi = psi.normalized();
  const StateVector h_phi = apply_hamiltonian(phi, V, phys, t);
  const StateVector hh_phi = apply_hamiltonian(h_phi, V, phys, t);
  StateVelocity s;
  s.mean_energy = inner_l2(h_phi, phi).real();
  s.energy_uncertainty = std::sqrt(std::max(0.0, inner_l2(hh_phi, phi).real() - s.mean_energy * s.mean_energy));
  s.total_norm = h_phi.norm() / phys.hbar;
  s.projective_speed = (h_phi - Complex(s.mean_energy) * phi).norm() / phys.hbar;
  return s;
}

EhrenfestResidual ehrenfest_check(const StateVector& psi, const PotentialSpec& V, const PhysicsParams& phys,
                                  double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const SplitStepPropagator prop(psi.grid(), V, phys);
  if (prop.max_phase_step(psi, dt) > kMaxPhaseStep) throw std::invalid_argument("time step too coarse");

  ComplexVector forward = psi.amplitudes();
  ComplexVector backward = psi.amplitudes();
  prop.advance(forward, 0.0, dt, 1);
  prop.advance(backward, 0.0, -dt, 1);
  const StateVector plus(psi.grid(), forward);
  const StateVector minus(psi.grid(), backward);

  EhrenfestResidual r;
  const double dx_dt = (expect_position(plus) - expect_position(minus)) / (2.0 * dt);
  const double dp_dt = (expect_momentum(plus, phys.hbar) - expect_momentum(minus, phys.hbar)) / (2.0 * dt);
  r.position = std::abs(dx_dt - expect_momentum(psi, phys.hbar) / phys.mass);
  r.momentum = std::abs(dp_dt - expect_force(psi, V));
  return r;
}

AnticommutatorResult anticommutator_identity_check(const StateVector& psi, Observable A, const PotentialSpec& V,
                                                   const PhysicsParams& phys) {
  const StateVector h_psi = apply_hamiltonian(psi, V, phys);
  const StateVector a_psi = apply_observable(psi, A, phys.hbar);
  const StateVector ah_psi = apply_observable(h_psi, A, phys.hbar);
  const StateVector ha_psi = apply_hamiltonian(a_psi, V, phys);
  const StateVector dpsi_dt = Complex(0.0, -1.0 / phys.hbar) * h_psi;

  AnticommutatorResult r;
  r.lhs = 2.0 * inner_l2(dpsi_dt, -kI * a_psi);
  r.rhs = (inner_l2(psi, ah_psi + ha_psi) - inner_l2(psi, ah_psi - ha_psi)) / phys.hbar;
  r.residual_real = std::abs(r.lhs.real() - r.rhs.real());
  r.residual_imag = std::abs(r.lhs.imag() - r.rhs.imag());
  r.residual = std::abs(r.lhs - r.rhs);
  return r;
}

ConstrainedMotion constrained_motion_check(const Grid& grid, const GaussianParams& q0, const PotentialSpec& V,
                                           const PhysicsParams& phys, double t_final, double dt,
                                           long long sample_stride) {
  const long long steps = step_count(t_final, dt);
  const std::vector<PhasePoint> newton = newton_integrate(q0.a, q0.p, V, phys, t_final, dt);
  const SplitStepPropagator prop(grid, V, phys);
  StateVector psi = realize(grid, q0, phys.hbar);
  const double h = steps > 0 ? t_final / static_cast<double>(steps) : 0.0;
  if (steps > 0 && prop.max_phase_step(psi, h) > kMaxPhaseStep) throw std::invalid_argument("time step too coarse");
  sample_stride = std::max<long long>(sample_stride, 1);

  ConstrainedMotion m;
  for (long long s = 0; s <= steps; ++s) {
    if (s > 0) prop.advance(psi.amplitudes(), static_cast<double>(s - 1) * h, h, 1);
    const PhasePoint& c = newton[static_cast<std::size_t>(s)];
    MotionSample sample{c.t, expect_position(psi), expect_momentum(psi, phys.hbar), c.a, c.p};
    m.max_position_deviation = std::max(m.max_position_deviation, std::abs(sample.x_quantum - c.a));
    m.max_momentum_deviation = std::max(m.max_momentum_deviation, std::abs(sample.p_quantum - c.p));
    if (s % sample_stride == 0 || s == steps) m.samples.push_back(sample);
  }
  m.max_deviation = std::max(m.max_position_deviation, m.max_momentum_deviation);
  return m;
}

}  // namespace cqlab

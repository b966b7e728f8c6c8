#include "cqlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace cqlab {

namespace {

constexpr double kPi = std::numbers::pi;

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive");
}

// Admissible centres: anywhere on a periodic grid, at least 10 sigma from the
// ends otherwise.
void check_center(const Grid& grid, double a, double sigma) {
  if (!std::isfinite(a) || !grid.contains(a)) throw std::out_of_range("centre lies outside the grid");
  if (!grid.periodic() && (a - grid.x_min() < 10.0 * sigma || grid.x_max() - a < 10.0 * sigma))
    throw std::out_of_range("centre closer than 10 sigma to a non-periodic boundary");
}

// Normalized sinc and its first two derivatives in z.
double sinc_derivative(double z, int order) {
  const double pz = kPi * z;
  if (std::abs(z) < 1e-4) {
    const double z2 = z * z;
    const double pi2 = kPi * kPi;
    switch (order) {
      case 0: return 1.0 - pi2 * z2 / 6.0;
      case 1: return -pi2 * z / 3.0 + pi2 * pi2 * z * z2 / 30.0;
      default: return -pi2 / 3.0 + pi2 * pi2 * z2 / 10.0;
    }
  }
  const double s = std::sin(pz) / pz;
  const double ds = (pz * std::cos(pz) - std::sin(pz)) / (kPi * z * z);
  switch (order) {
    case 0: return s;
    case 1: return ds;
    default: return -kPi * kPi * s - 2.0 * ds / z;
  }
}

}  // namespace

KernelSpace::KernelSpace(double sigma, Grid grid) : sigma_(sigma), grid_(grid) {
  check_sigma(sigma);
  const std::size_t n = grid_.size();
  offsets_.resize(static_cast<Eigen::Index>(n));
  for (std::size_t d = 0; d < n; ++d) {
    const double sep = grid_.separation(static_cast<double>(d) * grid_.dx(), 0.0);
    offsets_[static_cast<Eigen::Index>(d)] = std::exp(-sep * sep / (8.0 * sigma_ * sigma_));
  }
}

double KernelSpace::kernel(double x, double y) const {
  const double d = grid_.separation(x, y);
  return std::exp(-d * d / (8.0 * sigma_ * sigma_));
}

double KernelSpace::smoothing_kernel(double x, double y) const {
  const double d = grid_.separation(x, y);
  return std::pow(2.0 * kPi * sigma_ * sigma_, -0.25) * std::exp(-d * d / (4.0 * sigma_ * sigma_));
}

double KernelSpace::kernel_at_offset(long long offset) const {
  const auto n = static_cast<long long>(grid_.size());
  long long idx = grid_.periodic() ? ((offset % n) + n) % n : std::llabs(offset);
  return offsets_[static_cast<Eigen::Index>(idx)];
}

Eigen::MatrixXd KernelSpace::kernel_matrix() const {
  const auto n = static_cast<Eigen::Index>(grid_.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = kernel_at_offset(i - j);
  return k;
}

Eigen::MatrixXd KernelSpace::smoothing_matrix() const {
  const auto n = static_cast<Eigen::Index>(grid_.size());
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      r(i, j) = smoothing_kernel(grid_.x(static_cast<std::size_t>(i)), grid_.x(static_cast<std::size_t>(j)));
  return r;
}

double KernelSpace::composition_deviation() const {
  const Eigen::MatrixXd r = smoothing_matrix();
  const Eigen::MatrixXd composed = (r.transpose() * r) * grid_.dx();
  const Eigen::MatrixXd k = kernel_matrix();
  const auto n = static_cast<Eigen::Index>(grid_.size());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = grid_.x(static_cast<std::size_t>(i));
    if (!grid_.periodic() && (xi - grid_.x_min() < 10.0 * sigma_ || grid_.x_max() - xi < 10.0 * sigma_)) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double xj = grid_.x(static_cast<std::size_t>(j));
      if (!grid_.periodic() && (xj - grid_.x_min() < 10.0 * sigma_ || grid_.x_max() - xj < 10.0 * sigma_)) continue;
      worst = std::max(worst, std::abs(composed(i, j) - k(i, j)));
    }
  }
  return worst;
}

StateVector realize(const Grid& grid, const GaussianParams& q, double hbar) {
  check_sigma(q.sigma);
  if (!(hbar > 0.0)) throw std::invalid_argument("hbar must be positive");
  check_center(grid, q.a, q.sigma);
  StateVector phi(grid);
  const double amp = std::pow(2.0 * kPi * q.sigma * q.sigma, -0.25);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double u = grid.separation(grid.x(j), q.a);
    phi[j] = std::polar(amp * std::exp(-u * u / (4.0 * q.sigma * q.sigma)), q.p * u / hbar);
  }
  return phi;
}

StateVector realize_on_fibre(const Grid& grid, const PhaseSpacePoint& point, double hbar) {
  StateVector phi = realize(grid, point.params, hbar);
  phi *= std::polar(1.0, point.ray_phase);
  return phi;
}

StateVector grid_delta(const Grid& grid, double a, int derivative) {
  if (derivative < 0 || derivative > 2) throw std::invalid_argument("grid_delta: derivative order must be 0, 1 or 2");
  if (!std::isfinite(a) || !grid.contains(a)) throw std::out_of_range("grid_delta: centre outside the grid");
  const std::size_t n = grid.size();
  StateVector delta(grid);
  if (grid.periodic()) {
    // Trigonometric interpolant of the unit-mass spike; the Nyquist mode of an
    // even grid enters as a cosine with half weight.
    const double len = grid.length();
    const std::size_t half = n / 2;
    const bool even = (n % 2 == 0);
    const std::size_t full_modes = even ? half - 1 : half;
    for (std::size_t j = 0; j < n; ++j) {
      const double u = grid.x(j) - a;
      double sum = (derivative == 0) ? 1.0 : 0.0;
      auto term = [&](double k, double weight) {
        switch (derivative) {
          case 0: sum += weight * std::cos(k * u); break;
          case 1: sum += weight * k * std::sin(k * u); break;
          default: sum -= weight * k * k * std::cos(k * u); break;
        }
      };
      for (std::size_t m = 1; m <= full_modes; ++m) term(2.0 * kPi * static_cast<double>(m) / len, 2.0);
      if (even) term(kPi * static_cast<double>(n) / len, 1.0);
      delta[j] = sum / len;
    }
    return delta;
  }
  const double dx = grid.dx();
  const double sign = (derivative == 1) ? -1.0 : 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double z = (grid.x(j) - a) / dx;
    delta[j] = sign * sinc_derivative(z, derivative) / std::pow(dx, derivative + 1);
  }
  return delta;
}

Complex kernel_inner(const StateVector& f, const StateVector& g, const KernelSpace& ks) {
  require_same_grid(f, g);
  if (!(f.grid() == ks.grid())) throw GridMismatch("kernel_inner: kernel space lives on another grid");
  const auto n = static_cast<long long>(f.size());
  const ComplexVector& fa = f.amplitudes();
  const ComplexVector& ga = g.amplitudes();
  Complex total = 0.0;
  for (long long i = 0; i < n; ++i) {
    Complex row = 0.0;
    for (long long j = 0; j < n; ++j) row += ks.kernel_at_offset(i - j) * std::conj(ga[j]);
    total += fa[i] * row;
  }
  const double dx = f.grid().dx();
  return total * dx * dx;
}

double kernel_norm(const StateVector& f, const KernelSpace& ks) {
  return std::sqrt(std::max(0.0, kernel_inner(f, f, ks).real()));
}

double real_inner(const StateVector& f, const StateVector& g) { return inner_l2(f, g).real(); }

StateVector embed_point(double a, const KernelSpace& ks) {
  return realize(ks.grid(), GaussianParams{a, 0.0, ks.sigma()});
}

StateVector embed_phase_point(const Grid& grid, const GaussianParams& q, double hbar) {
  return realize(grid, q, hbar);
}

double fs_distance(const StateVector& f, const StateVector& g) {
  require_same_grid(f, g);
  const double nf = f.norm();
  const double ng = g.norm();
  if (std::abs(nf - 1.0) > 1e-6 || std::abs(ng - 1.0) > 1e-6)
    throw std::invalid_argument("fs_distance: inputs must be normalized");
  const Complex overlap = inner_l2(g, f);
  const double cos_rho = std::clamp(std::abs(overlap) / (nf * ng), 0.0, 1.0);
  // Component of g perpendicular to the ray of f.
  StateVector perp = g - (overlap / (nf * nf)) * f;
  const double sin_rho = std::clamp(perp.norm() / ng, 0.0, 1.0);
  return std::atan2(sin_rho, cos_rho);
}

namespace {

void check_step(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("finite-difference step must be positive");
}

StateVector path_derivative(const DeltaPath& path, int order, const Grid& grid, double t, double dt) {
  if (order == 1) {
    StateVector d = grid_delta(grid, path(t + dt)) - grid_delta(grid, path(t - dt));
    d *= 1.0 / (2.0 * dt);
    return d;
  }
  if (order == 2) {
    StateVector centre = grid_delta(grid, path(t));
    StateVector d = grid_delta(grid, path(t + dt)) + grid_delta(grid, path(t - dt));
    d -= 2.0 * centre;
    d *= 1.0 / (dt * dt);
    return d;
  }
  throw std::invalid_argument("delta_path_projection: order must be 1 or 2");
}

}  // namespace

double h_norm_velocity(const DeltaPath& path, const KernelSpace& ks, double t, double dt) {
  check_step(dt);
  return kernel_norm(path_derivative(path, 1, ks.grid(), t, dt), ks);
}

double delta_path_projection(const DeltaPath& path, int order, const KernelSpace& ks, double t, double dt) {
  check_step(dt);
  if (order != 1 && order != 2) throw std::invalid_argument("delta_path_projection: order must be 1 or 2");
  const StateVector velocity = path_derivative(path, order, ks.grid(), t, dt);
  StateVector direction = grid_delta(ks.grid(), path(t), 1);
  const double dir_norm = kernel_norm(direction, ks);
  if (!(dir_norm > 0.0)) throw std::domain_error("delta_path_projection: degenerate direction");
  return kernel_inner(velocity, direction, ks).real() / dir_norm;
}

TangentBasis tangent_basis(const Grid& grid, const GaussianParams& q, double hbar) {
  StateVector phi = realize(grid, q, hbar);
  StateVector pos(grid);
  RealVector modulus(static_cast<Eigen::Index>(grid.size()));
  RealVector argument(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double u = grid.separation(grid.x(j), q.a);
    pos[j] = (u / q.sigma) * phi[j];
    modulus[static_cast<Eigen::Index>(j)] = std::abs(phi[j]);
    argument[static_cast<Eigen::Index>(j)] = q.p * u / hbar;
  }
  pos = pos.normalized();
  StateVector mom = Complex(0.0, 1.0) * pos;
  StateVector fibre = Complex(0.0, 1.0) * phi;
  return TangentBasis{std::move(phi), std::move(pos), std::move(mom), std::move(fibre), std::move(modulus),
                      std::move(argument)};
}

StateVector spread_direction(const Grid& grid, const GaussianParams& q, double hbar) {
  StateVector phi = realize(grid, q, hbar);
  StateVector dir(grid);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double u = grid.separation(grid.x(j), q.a) / q.sigma;
    dir[j] = Complex(0.0, 1.0) * (u * u - 1.0) * phi[j];
  }
  return dir.normalized();
}

MetricSample fs_metric_restriction_check(const Grid& grid, const GaussianParams& q, double da, double dp,
                                         double hbar) {
  const StateVector start = realize(grid, q, hbar);
  const StateVector moved = realize(grid, GaussianParams{q.a + da, q.p + dp, q.sigma}, hbar);
  const double rho = fs_distance(start, moved);
  return MetricSample{rho * rho, da * da / (4.0 * q.sigma * q.sigma) + q.sigma * q.sigma * dp * dp / (hbar * hbar)};
}

std::size_t completeness_rank(const KernelSpace& ks) {
  const Grid& grid = ks.grid();
  std::vector<StateVector> frame;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    try {
      frame.push_back(embed_point(grid.x(j), ks));
    } catch (const std::out_of_range&) {
      // centre too close to an open boundary
    }
  }
  const auto m = static_cast<Eigen::Index>(frame.size());
  if (m == 0) return 0;
  Eigen::MatrixXcd basis(static_cast<Eigen::Index>(grid.size()), m);
  for (Eigen::Index c = 0; c < m; ++c) basis.col(c) = frame[static_cast<std::size_t>(c)].amplitudes();
  const Eigen::MatrixXcd gram = (basis.adjoint() * basis) * grid.dx();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
  const RealVector& values = eig.eigenvalues();
  const double tol = static_cast<double>(m) * std::numeric_limits<double>::epsilon() * values.maxCoeff();
  return static_cast<std::size_t>((values.array() > tol).count());
}

}  // namespace cqlab

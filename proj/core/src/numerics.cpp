#include "cqlab/numerics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cqlab/fft.hpp"

namespace cqlab {

Grid::Grid(std::size_t n_points, double x_min, double x_max, bool periodic)
    : n_(n_points), x_min_(x_min), x_max_(x_max), periodic_(periodic) {
  if (n_points < 2) throw std::invalid_argument("Grid: need at least 2 points, got " + std::to_string(n_points));
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max))
    throw std::invalid_argument("Grid: bounds must be finite with x_max > x_min");
  dx_ = (x_max - x_min) / static_cast<double>(n_points);
}

RealVector Grid::nodes() const {
  RealVector x(static_cast<Eigen::Index>(n_));
  for (std::size_t j = 0; j < n_; ++j) x[static_cast<Eigen::Index>(j)] = this->x(j);
  return x;
}

double Grid::separation(double x, double y) const {
  double d = x - y;
  if (periodic_) {
    const double len = length();
    d -= len * std::round(d / len);
  }
  return d;
}

double Grid::wavenumber(std::size_t j) const {
  const double dk = 2.0 * std::numbers::pi / length();
  const auto n = static_cast<long long>(n_);
  auto m = static_cast<long long>(j);
  if (2 * m >= n) m -= n;
  return dk * static_cast<double>(m);
}

RealVector Grid::wavenumbers() const {
  RealVector k(static_cast<Eigen::Index>(n_));
  for (std::size_t j = 0; j < n_; ++j) k[static_cast<Eigen::Index>(j)] = wavenumber(j);
  return k;
}

Grid make_grid(std::size_t n_points, double x_min, double x_max, bool periodic) {
  return Grid(n_points, x_min, x_max, periodic);
}

StateVector::StateVector(Grid grid)
    : grid_(grid), amp_(ComplexVector::Zero(static_cast<Eigen::Index>(grid.size()))) {}

StateVector::StateVector(Grid grid, ComplexVector amplitudes) : grid_(grid), amp_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amp_.size()) != grid_.size())
    throw std::invalid_argument("StateVector: amplitude count does not match grid");
}

double StateVector::norm_squared() const { return amp_.squaredNorm() * grid_.dx(); }
double StateVector::norm() const { return std::sqrt(norm_squared()); }

StateVector StateVector::normalized() const {
  const double n = norm();
  if (!(n > 0.0)) throw std::domain_error("cannot normalize a zero state");
  return StateVector(grid_, amp_ / n);
}

StateVector& StateVector::operator+=(const StateVector& other) {
  require_same_grid(*this, other);
  amp_ += other.amp_;
  return *this;
}

StateVector& StateVector::operator-=(const StateVector& other) {
  require_same_grid(*this, other);
  amp_ -= other.amp_;
  return *this;
}

StateVector& StateVector::operator*=(Complex s) {
  amp_ *= s;
  return *this;
}

StateVector operator+(StateVector a, const StateVector& b) { return a += b; }
StateVector operator-(StateVector a, const StateVector& b) { return a -= b; }
StateVector operator*(Complex s, StateVector a) { return a *= s; }

void require_same_grid(const StateVector& f, const StateVector& g) {
  if (!(f.grid() == g.grid())) throw GridMismatch("grid functions live on different grids");
}

double integrate(const Grid& grid, const RealVector& values) {
  if (static_cast<std::size_t>(values.size()) != grid.size())
    throw std::invalid_argument("integrate: value count does not match grid");
  return values.sum() * grid.dx();
}

Complex inner_l2(const StateVector& f, const StateVector& g) {
  require_same_grid(f, g);
  // Eigen's dot conjugates its first argument.
  return g.amplitudes().dot(f.amplitudes()) * f.grid().dx();
}

RealVector density(const StateVector& psi) { return psi.amplitudes().cwiseAbs2(); }

double expect_position(const StateVector& psi) {
  const RealVector rho = density(psi);
  double sum = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) sum += rho[static_cast<Eigen::Index>(j)] * psi.grid().x(j);
  return sum * psi.grid().dx();
}

Grid momentum_grid(const Grid& position_grid, double hbar) {
  const double n = static_cast<double>(position_grid.size());
  const double dp = 2.0 * std::numbers::pi * hbar / position_grid.length();
  return Grid(position_grid.size(), -0.5 * n * dp, 0.5 * n * dp, true);
}

namespace {

void check_hbar(double hbar) {
  if (!(hbar > 0.0)) throw std::invalid_argument("hbar must be positive");
}

}  // namespace

StateVector dft(const StateVector& f, double hbar) {
  const Grid& grid = f.grid();
  if (!grid.periodic()) throw std::invalid_argument("dft: grid must be periodic");
  check_hbar(hbar);
  const std::size_t n = grid.size();
  const auto ni = static_cast<Eigen::Index>(n);
  ComplexVector g(ni);
  for (Eigen::Index j = 0; j < ni; ++j) g[j] = f.amplitudes()[j] * std::cos(std::numbers::pi * static_cast<double>(j));
  ComplexVector spec;
  Fft(n).forward(g, spec);

  const double scale = grid.dx() / std::sqrt(2.0 * std::numbers::pi * hbar);
  const double half = 0.5 * static_cast<double>(n);
  const double shift = 2.0 * std::numbers::pi * grid.x_min() / grid.length();
  for (Eigen::Index k = 0; k < ni; ++k) spec[k] *= std::polar(scale, -(static_cast<double>(k) - half) * shift);
  return StateVector(momentum_grid(grid, hbar), std::move(spec));
}

StateVector inverse_dft(const StateVector& f_momentum, const Grid& position_grid, double hbar) {
  if (!position_grid.periodic()) throw std::invalid_argument("inverse_dft: grid must be periodic");
  check_hbar(hbar);
  if (!(f_momentum.grid() == momentum_grid(position_grid, hbar)))
    throw GridMismatch("inverse_dft: state is not on the momentum grid of the target grid");
  const std::size_t n = position_grid.size();
  const auto ni = static_cast<Eigen::Index>(n);
  const double half = 0.5 * static_cast<double>(n);
  const double shift = 2.0 * std::numbers::pi * position_grid.x_min() / position_grid.length();
  ComplexVector h(ni);
  for (Eigen::Index k = 0; k < ni; ++k)
    h[k] = f_momentum.amplitudes()[k] * std::polar(1.0, (static_cast<double>(k) - half) * shift);
  ComplexVector out;
  Fft(n).backward(h, out);
  const double scale = f_momentum.grid().dx() / std::sqrt(2.0 * std::numbers::pi * hbar);
  for (Eigen::Index j = 0; j < ni; ++j) out[j] *= scale * std::cos(std::numbers::pi * static_cast<double>(j));
  return StateVector(position_grid, std::move(out));
}

}  // namespace cqlab

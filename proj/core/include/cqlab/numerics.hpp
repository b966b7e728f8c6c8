#pragma once

// Uniform 1-D grids, grid functions and quadrature.

#include <complex>
#include <cstddef>
#include <stdexcept>

#include <Eigen/Core>

namespace cqlab {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Thrown when two grid functions that must share a grid do not.
class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Uniform grid x_j = x_min + j*dx, j = 0..n_points-1, dx = (x_max - x_min)/n_points.
// Every node carries the same quadrature weight dx, so the integral of 1 is
// exactly x_max - x_min. On a periodic grid x_max is identified with x_min.
class Grid {
 public:
  Grid(std::size_t n_points, double x_min, double x_max, bool periodic);

  std::size_t size() const { return n_; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double length() const { return x_max_ - x_min_; }
  double dx() const { return dx_; }
  bool periodic() const { return periodic_; }

  double x(std::size_t j) const { return x_min_ + static_cast<double>(j) * dx_; }
  RealVector nodes() const;

  // Signed separation x - y; minimum image on periodic grids.
  double separation(double x, double y) const;

  // Angular wavenumber of FFT-ordered mode j; the Nyquist mode maps to -pi/dx.
  double wavenumber(std::size_t j) const;
  RealVector wavenumbers() const;

  bool contains(double x) const { return x >= x_min_ && x <= x_max_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t n_;
  double x_min_;
  double x_max_;
  double dx_;
  bool periodic_;
};

Grid make_grid(std::size_t n_points, double x_min, double x_max, bool periodic = true);

// Complex amplitudes over a grid. Amplitudes carry length^(-1/2), so |psi|^2 is
// a density and sum |psi_j|^2 dx is the norm squared.
class StateVector {
 public:
  explicit StateVector(Grid grid);
  StateVector(Grid grid, ComplexVector amplitudes);

  const Grid& grid() const { return grid_; }
  const ComplexVector& amplitudes() const { return amp_; }
  ComplexVector& amplitudes() { return amp_; }

  std::size_t size() const { return static_cast<std::size_t>(amp_.size()); }
  Complex operator[](std::size_t j) const { return amp_[static_cast<Eigen::Index>(j)]; }
  Complex& operator[](std::size_t j) { return amp_[static_cast<Eigen::Index>(j)]; }

  double norm() const;
  double norm_squared() const;
  StateVector normalized() const;

  StateVector& operator+=(const StateVector& other);
  StateVector& operator-=(const StateVector& other);
  StateVector& operator*=(Complex s);

 private:
  Grid grid_;
  ComplexVector amp_;
};

StateVector operator+(StateVector a, const StateVector& b);
StateVector operator-(StateVector a, const StateVector& b);
StateVector operator*(Complex s, StateVector a);

void require_same_grid(const StateVector& f, const StateVector& g);

// Quadrature of a real grid function.
double integrate(const Grid& grid, const RealVector& values);

// (f, g) = integral f(x) conj(g(x)) dx. Linear in f, antilinear in g.
Complex inner_l2(const StateVector& f, const StateVector& g);

// Expectation values by quadrature.
double expect_position(const StateVector& psi);
RealVector density(const StateVector& psi);

// Unitary transform to the momentum representation. The result lives on the
// momentum grid p_k = (k - n/2) * 2 pi hbar / L, so inner_l2 is preserved.
// Rejects non-periodic grids.
StateVector dft(const StateVector& f, double hbar = 1.0);
// Inverse of dft; needs the position grid the state came from.
StateVector inverse_dft(const StateVector& f_momentum, const Grid& position_grid,
                        double hbar = 1.0);
Grid momentum_grid(const Grid& position_grid, double hbar = 1.0);

}  // namespace cqlab

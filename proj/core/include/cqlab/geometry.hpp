#pragma once

// Kernel space H, the embeddings of classical space and phase space into the
// space of states, and Fubini-Study geometry restricted to those embeddings.

#include <cstddef>
#include <functional>

#include <Eigen/Core>

#include "cqlab/numerics.hpp"

namespace cqlab {

// Gaussian kernel space of width sigma on a grid.
//
// The H inner product is (f, g)_H = sum_ij k(x_i, x_j) f_i conj(g_j) dx^2 with
// k(x, y) = exp(-(x - y)^2 / (8 sigma^2)). The smoothing map rho_sigma has the
// kernel (2 pi sigma^2)^(-1/4) exp(-(x - y)^2 / (4 sigma^2)) and satisfies
// rho_sigma^* rho_sigma = k. Separations use the minimum image on periodic grids.
class KernelSpace {
 public:
  KernelSpace(double sigma, Grid grid);

  double sigma() const { return sigma_; }
  const Grid& grid() const { return grid_; }

  double kernel(double x, double y) const;
  double smoothing_kernel(double x, double y) const;

  Eigen::MatrixXd kernel_matrix() const;
  Eigen::MatrixXd smoothing_matrix() const;

  // Max-entry deviation of the discretized rho^* rho from k. On non-periodic
  // grids only nodes at least 10 sigma from either end are compared.
  double composition_deviation() const;

  // k at node offset i - j (Toeplitz on open grids, circulant on periodic ones).
  double kernel_at_offset(long long offset) const;

 private:
  double sigma_;
  Grid grid_;
  RealVector offsets_;
};

// A point of the classical phase space: centre, momentum, width.
struct GaussianParams {
  double a = 0.0;
  double p = 0.0;
  double sigma = 0.5;
};

// Phase-space point together with the fibre coordinate that projective
// quantities ignore.
struct PhaseSpacePoint {
  GaussianParams params;
  double ray_phase = 0.0;
};

// Omega(a, p) = (2 pi sigma^2)^(-1/4) exp(-(x - a)^2/(4 sigma^2)) exp(i p (x - a)/hbar).
StateVector realize(const Grid& grid, const GaussianParams& q, double hbar = 1.0);
StateVector realize_on_fibre(const Grid& grid, const PhaseSpacePoint& point, double hbar = 1.0);

// Band-limited grid delta at a (amplitude 1/dx at a node, trigonometric or sinc
// interpolation between nodes). derivative = 1 or 2 differentiates with respect
// to a, i.e. gives -d/dx of the delta for derivative = 1.
StateVector grid_delta(const Grid& grid, double a, int derivative = 0);

Complex kernel_inner(const StateVector& f, const StateVector& g, const KernelSpace& ks);
double kernel_norm(const StateVector& f, const KernelSpace& ks);

// Riemannian metric on the sphere of states: Re (f, g).
double real_inner(const StateVector& f, const StateVector& g);

// delta~_a: the normalized Gaussian of width sigma centred at a.
StateVector embed_point(double a, const KernelSpace& ks);
StateVector embed_phase_point(const Grid& grid, const GaussianParams& q, double hbar = 1.0);

// Fubini-Study distance arccos |(f, g)| in [0, pi/2]. Evaluated through the
// overlap and the perpendicular residual so that nearby rays keep full relative
// precision instead of bottoming out at sqrt(eps). Throws if either norm is off by > 1e-6.
double fs_distance(const StateVector& f, const StateVector& g);

// Path t -> a(t) in classical space, realized as grid deltas.
using DeltaPath = std::function<double(double)>;

inline constexpr double kDefaultPathStep = 1e-4;

// H norm of d(delta_a(t))/dt by a central difference. Equals |da/dt| / (2 sigma).
double h_norm_velocity(const DeltaPath& path, const KernelSpace& ks, double t = 0.0,
                       double dt = kDefaultPathStep);

// H projection of the first or second time derivative of delta_a(t) on the unit
// vector along -d delta_a/dx. Equals (d^order a/dt^order) / (2 sigma).
double delta_path_projection(const DeltaPath& path, int order, const KernelSpace& ks, double t = 0.0,
                             double dt = kDefaultPathStep);

// Unit tangent directions at Omega(q) = r e^{i theta}: the position direction
// (-dr/dx) e^{i theta} = (x - a) phi / sigma, the momentum direction
// i (d theta/dp) r e^{i theta} = i (x - a) phi / sigma, and the fibre i phi.
struct TangentBasis {
  StateVector state;
  StateVector position_direction;
  StateVector momentum_direction;
  StateVector fibre_direction;
  RealVector modulus;
  RealVector argument;
};

TangentBasis tangent_basis(const Grid& grid, const GaussianParams& q, double hbar = 1.0);

// Unit vector i (d phi/d sigma)^ along which the packet spreads.
StateVector spread_direction(const Grid& grid, const GaussianParams& q, double hbar = 1.0);

struct MetricSample {
  double lhs = 0.0;  // squared FS distance between Omega(q) and Omega(q + (da, dp))
  double rhs = 0.0;  // da^2/(4 sigma^2) + sigma^2 dp^2 / hbar^2
};

MetricSample fs_metric_restriction_check(const Grid& grid, const GaussianParams& q, double da, double dp,
                                         double hbar = 1.0);

// Numerical rank of the Gram matrix of embed_point over every admissible grid
// node, with tolerance n * eps * lambda_max.
std::size_t completeness_rank(const KernelSpace& ks);

}  // namespace cqlab

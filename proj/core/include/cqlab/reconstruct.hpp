#pragma once

// Recovery of the Hamiltonian from the operator equations
//   i[H, X] = hbar P / m,   i[H, P] = hbar F,   F = -V'(X)
// in a truncated harmonic-oscillator basis.

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "cqlab/dynamics.hpp"
#include "cqlab/potential.hpp"

namespace cqlab {

// X = l (a + a^dagger), P = i (hbar / (2 l)) (a^dagger - a) with
// l = sqrt(hbar / (2 m omega0)). Rows and columns past interior() are corrupted
// by the truncation.
struct OperatorTriple {
  int dimension = 0;
  int buffer = 0;
  double omega0 = 1.0;
  double hbar = 1.0;
  double mass = 1.0;
  double position_scale = 0.0;  // l
  double momentum_scale = 0.0;  // hbar / (2 l)
  Eigen::MatrixXcd X;
  Eigen::MatrixXcd P;
  Eigen::MatrixXcd F;
  Eigen::MatrixXcd VX;

  int interior() const { return dimension - buffer; }
  // P^2/2m + V(X) on the full truncated space.
  Eigen::MatrixXcd reference_hamiltonian() const;
};

// buffer < 0 selects 4 + 2 deg(V). Throws std::invalid_argument for N < 16, a
// potential that is not a static polynomial of degree <= 4, or buffer < 2 deg(V).
OperatorTriple build_operators(int N, const PhysicsParams& phys, const PotentialSpec& V, int buffer = -1,
                               double omega0 = 1.0);

// Max entry of [X, P] - i hbar I on the interior block.
double canonical_defect(const OperatorTriple& ops);

struct ConstraintResiduals {
  double residual_x = 0.0;  // |i[H,X] - hbar P/m|_F on the interior block
  double residual_p = 0.0;  // |i[H,P] - hbar F|_F on the interior block
};

// H_extended is (interior + 1) square: the interior block plus one halo row
// and column, which the interior commutators reach through X and P.
ConstraintResiduals constraint_residuals(const OperatorTriple& ops, const Eigen::MatrixXcd& H_extended);

struct ReconstructionResult {
  Eigen::MatrixXcd H_solved;     // interior block
  Eigen::MatrixXcd H_extended;   // interior plus halo; corner entry fixed to 0
  Eigen::MatrixXcd H_reference;  // interior block of P^2/2m + V(X)
  double residual_x = 0.0;
  double residual_p = 0.0;
  double gauge_constant = 0.0;  // tr(H_solved - H_reference) / interior
  double block_error = 0.0;     // |H_solved - H_reference|_F / |H_reference|_F
};

// Least squares over Hermitian H_extended (real coordinates, so Hermiticity is
// exact), plus the gauge row tr H_solved = tr H_reference. Solved through the
// sparse normal equations; throws std::domain_error when they are singular.
ReconstructionResult solve_hamiltonian(const OperatorTriple& ops, const PhysicsParams& phys);

// Real dimension of the Hermitian null space of H -> (i[H,X], i[H,P]) on the
// interior equations. Singular values below 1e-9 of the largest count as zero.
std::size_t kernel_of_constraints(const OperatorTriple& ops);

// <X>(t) for the truncated coherent state centred at (a0, p0) evolved with
// exp(-i H t / hbar), H a Hermitian interior-size matrix.
std::vector<double> coherent_position_trajectory(const OperatorTriple& ops, const Eigen::MatrixXcd& H, double a0,
                                                 double p0, const std::vector<double>& times);

}  // namespace cqlab

#include <cmath>

#include <gtest/gtest.h>

#include <cqlab/reconstruct.hpp>

#include "generators.hpp"
#include "oracles.hpp"

using namespace cqlab;

namespace {
const PhysicsParams kUnit{1.0, 1.0};
}

TEST(Operators, LadderStructure) {
  const OperatorTriple ops = build_operators(32, kUnit, PotentialSpec::harmonic(1.0));
  EXPECT_EQ(ops.dimension, 32);
  EXPECT_EQ(ops.buffer, 8);
  EXPECT_EQ(ops.interior(), 24);
  EXPECT_NEAR(ops.position_scale, std::sqrt(0.5), 1e-15);
  // <1|X|0> = l, <1|P|0> = i hbar/(2l).
  EXPECT_NEAR(std::abs(ops.X(1, 0) - Complex(ops.position_scale, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(ops.P(1, 0) - Complex(0.0, ops.momentum_scale)), 0.0, 1e-15);
  EXPECT_LT((ops.X - ops.X.adjoint()).norm(), 1e-15);
  EXPECT_LT((ops.P - ops.P.adjoint()).norm(), 1e-15);
  EXPECT_LT(canonical_defect(ops), 1e-10);
}

TEST(Operators, ForceMatrices) {
  const OperatorTriple lin = build_operators(16, kUnit, PotentialSpec::linear(0.7));
  const Eigen::Index m = lin.interior();
  EXPECT_LT((lin.F.topLeftCorner(m, m) + 0.7 * Eigen::MatrixXcd::Identity(m, m)).norm(), 1e-13);
  const OperatorTriple h = build_operators(16, kUnit, PotentialSpec::harmonic(2.0));
  const Eigen::Index mh = h.interior();
  EXPECT_LT((h.F - (-2.0) * h.X).topLeftCorner(mh, mh).norm(), 1e-12);
}

TEST(Operators, RejectsUnsupportedInput) {
  EXPECT_THROW(build_operators(15, kUnit, PotentialSpec::free()), std::invalid_argument);
  EXPECT_THROW(build_operators(32, kUnit, PotentialSpec::polynomial({0, 0, 0, 0, 0, 1})), std::invalid_argument);
  EXPECT_THROW(build_operators(32, kUnit, PotentialSpec::harmonic(1.0), 3), std::invalid_argument);
  EXPECT_THROW(build_operators(32, kUnit, PotentialSpec::noisy(PotentialSpec::free(), {0.1, 0.01, 0, 0})),
               std::invalid_argument);
  const Grid g(16, -1.0, 1.0, true);
  EXPECT_THROW(build_operators(32, kUnit, PotentialSpec::tabulated(g, RealVector::Zero(16))), std::invalid_argument);
  EXPECT_THROW(build_operators(32, kUnit, PotentialSpec::free(), -1, 0.0), std::invalid_argument);
}

TEST(Solve, RecoversReferenceHamiltonians) {
  const std::pair<const char*, PotentialSpec> cases[] = {{"free", PotentialSpec::free()},
                                                         {"linear", PotentialSpec::linear(0.7)},
                                                         {"harmonic", PotentialSpec::harmonic(1.0)},
                                                         {"quartic", PotentialSpec::polynomial({0.1, 0, -0.5, 0, 0.05})}};
  for (const auto& [name, V] : cases) {
    const OperatorTriple ops = build_operators(32, kUnit, V);
    const ReconstructionResult r = solve_hamiltonian(ops, kUnit);
    EXPECT_LT(r.block_error, 1e-6) << name;
    EXPECT_LT(std::abs(r.gauge_constant), 1e-8) << name;
    EXPECT_LT(r.residual_x, 1e-8) << name;
    EXPECT_LT(r.residual_p, 1e-8) << name;
    EXPECT_EQ((r.H_solved - r.H_solved.adjoint()).norm(), 0.0) << name;
    const Eigen::Index m = ops.interior();
    const Eigen::MatrixXcd ref = ops.reference_hamiltonian().topLeftCorner(m, m);
    EXPECT_NEAR((r.H_solved - ref).norm() / ref.norm(), r.block_error, 1e-12) << name;
  }
}

TEST(Solve, OtherUnitsAndFrequencies) {
  const PhysicsParams ph{0.7, 1.9};
  const OperatorTriple ops = build_operators(24, ph, PotentialSpec::harmonic(2.5, 0.3), -1, 1.4);
  EXPECT_LT(solve_hamiltonian(ops, ph).block_error, 1e-6);
  EXPECT_THROW(solve_hamiltonian(ops, kUnit), std::invalid_argument);
}

TEST(Solve, GaugeInvarianceProperty) {
  const OperatorTriple ops = build_operators(24, kUnit, PotentialSpec::harmonic(1.0));
  const ReconstructionResult r = solve_hamiltonian(ops, kUnit);
  gen::for_all(20, 81, [&](gen::Gen& g, int) {
    const double c = g.uniform(-100.0, 100.0);
    Eigen::MatrixXcd shifted = r.H_extended;
    shifted.diagonal().array() += c;
    const ConstraintResiduals s = constraint_residuals(ops, shifted);
    EXPECT_NEAR(s.residual_x, r.residual_x, 1e-9);
    EXPECT_NEAR(s.residual_p, r.residual_p, 1e-9);
  });
}

TEST(Solve, RandomForceCannotBeReconstructed) {
  OperatorTriple ops = build_operators(24, kUnit, PotentialSpec::harmonic(1.0));
  gen::Gen g(83);
  Eigen::MatrixXcd f(ops.dimension, ops.dimension);
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    for (Eigen::Index j = 0; j < f.cols(); ++j) f(i, j) = g.complex_normal();
  ops.F = 0.5 * (f + f.adjoint());
  const ReconstructionResult r = solve_hamiltonian(ops, kUnit);
  EXPECT_GT(r.residual_p / ops.F.topLeftCorner(ops.interior(), ops.interior()).norm(), 1e-2);
}

TEST(Kernel, OneDimensionalAtAcceptanceSizes) {
  for (int n : {16, 32, 64}) EXPECT_EQ(kernel_of_constraints(build_operators(n, kUnit, PotentialSpec::harmonic(1.0))), 1u) << n;
}

TEST(Kernel, AgreesWithDenseSvd) {
  for (int n : {16, 32}) {
    const OperatorTriple ops = build_operators(n, kUnit, PotentialSpec::linear(0.3));
    EXPECT_EQ(kernel_of_constraints(ops), oracle::constraint_nullity(ops)) << n;
  }
  const OperatorTriple ops = build_operators(20, {0.6, 2.0}, PotentialSpec::harmonic(1.0), -1, 0.8);
  EXPECT_EQ(kernel_of_constraints(ops), oracle::constraint_nullity(ops));
}

TEST(Coherent, TrajectoryMatchesClassicalMotion) {
  const OperatorTriple ops = build_operators(32, kUnit, PotentialSpec::harmonic(1.0));
  const ReconstructionResult r = solve_hamiltonian(ops, kUnit);
  const std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
  const std::vector<double> x = coherent_position_trajectory(ops, r.H_solved, 1.0, 0.5, times);
  ASSERT_EQ(x.size(), times.size());
  for (std::size_t k = 0; k < times.size(); ++k)
    EXPECT_NEAR(x[k], std::cos(times[k]) + 0.5 * std::sin(times[k]), 1e-8) << times[k];
  EXPECT_THROW(coherent_position_trajectory(ops, r.H_extended, 1.0, 0.0, times), std::invalid_argument);
}

#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include <cqlab/diffusion.hpp>
#include <cqlab/geometry.hpp>

#include "generators.hpp"
#include "oracles.hpp"

using namespace cqlab;

namespace {

const Grid kGrid(512, -16.0, 16.0, true);

DiffusionConfig config(std::size_t walkers, std::uint64_t seed) {
  DiffusionConfig c;
  c.n_walkers = walkers;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Walk, GaussianIncrementStatistics) {
  const DiffusionConfig c = config(1, 5);
  const int n = 50000;
  double s = 0.0, s2 = 0.0;
  for (int w = 0; w < n; ++w) {
    const double x = brownian_walk(2.0, c, static_cast<std::uint64_t>(w)) - 2.0;
    s += x;
    s2 += x * x;
  }
  const double var = c.diffusion_sigma * c.diffusion_sigma;
  EXPECT_NEAR(s / n, 0.0, 5.0 * std::sqrt(var / n));
  EXPECT_NEAR(s2 / n, var, 5.0 * var * std::sqrt(2.0 / n));
}

TEST(Walk, ReproducibleAndIndexed) {
  const DiffusionConfig c = config(1, 9);
  const double a = brownian_walk(0.0, c, 17, 3);
  const double b = brownian_walk(0.0, c, 17, 3);
  EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
  EXPECT_NE(a, brownian_walk(0.0, c, 18, 3));
  EXPECT_NE(a, brownian_walk(0.0, c, 17, 4));
  EXPECT_NE(a, brownian_walk(0.0, config(1, 10), 17, 3));
}

TEST(Walk, ConfigValidation) {
  DiffusionConfig c;
  c.n_walkers = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = DiffusionConfig{};
  c.tau = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = DiffusionConfig{};
  c.substeps = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_DOUBLE_EQ(DiffusionConfig{}.diffusion_coefficient(), 0.125);
}

TEST(Decompose, SingleEmbeddedPoint) {
  const LatticeSpec lat{0.5, 4.0, 0.0, 0.05};
  const KernelSpace ks(0.5, kGrid);
  const ComponentDecomposition d = decompose_state(embed_point(4.0, ks), lat);
  EXPECT_TRUE(d.near_orthogonal);
  EXPECT_LT(d.residual, 1e-10);
  EXPECT_NEAR(d.weight_sum, 1.0, 1e-10);
  for (std::size_t j = 0; j < d.centers.size(); ++j)
    EXPECT_NEAR(d.weights[j], d.centers[j] == 4.0 ? 1.0 : 0.0, 1e-10);
  EXPECT_NEAR(d.max_overlap, std::exp(-16.0 / 2.0), 1e-12);
}

TEST(Decompose, DenseFrameIsNotNearOrthogonal) {
  const LatticeSpec lat{0.5, 1.0, 0.0, 0.05};
  const KernelSpace ks(0.5, kGrid);
  const ComponentDecomposition d = decompose_state(embed_point(1.0, ks), lat);
  EXPECT_FALSE(d.near_orthogonal);
  EXPECT_THROW(simulate_state_diffusion(embed_point(1.0, ks), config(1000, 1), lat), std::invalid_argument);
  EXPECT_THROW(decompose_state(embed_point(1.0, ks), {0.5, 0.0, 0.0, 0.05}), std::invalid_argument);
}

TEST(Superposition, RandomCasesAreWellFormed) {
  const LatticeSpec lat{0.5, 4.0, 0.0, 0.05};
  gen::for_all(20, 91, [&](gen::Gen&, int c) {
    const Superposition s = random_superposition(kGrid, lat, 42, static_cast<std::uint64_t>(c));
    EXPECT_GE(s.centers.size(), 2u);
    EXPECT_LE(s.centers.size(), 5u);
    EXPECT_EQ(std::set<double>(s.centers.begin(), s.centers.end()).size(), s.centers.size());
    for (double x : s.centers) {
      EXPECT_GE(x, kGrid.x_min() + 8.0 * lat.sigma);
      EXPECT_LE(x, kGrid.x_max() - 8.0 * lat.sigma);
    }
    EXPECT_NEAR(s.state.norm(), 1.0, 1e-12);
    const Superposition again = random_superposition(kGrid, lat, 42, static_cast<std::uint64_t>(c));
    EXPECT_EQ(again.centers, s.centers);
  });
}

TEST(Born, HistogramFollowsSquaredAmplitude) {
  const LatticeSpec lat{0.5, 4.0, 0.0, 0.05};
  const KernelSpace ks(0.5, kGrid);
  const StateVector psi = (Complex(0.6, 0.0) * embed_point(-4.0, ks) + Complex(0.0, 0.8) * embed_point(4.0, ks)).normalized();
  const DensityEstimate est = simulate_state_diffusion(psi, config(100000, 3), lat);
  EXPECT_LT(est.l1_error, 0.02);
  EXPECT_NEAR(est.ks_critical, 1.628 / std::sqrt(1e5), 1e-15);
  ASSERT_EQ(est.components.size(), 2u);
  EXPECT_NEAR(est.components[0].expected, 0.36, 1e-3);
  EXPECT_NEAR(est.components[1].expected, 0.64, 1e-3);
  for (const ComponentMass& c : est.components) EXPECT_TRUE(c.within_3sd) << c.center;
  // Reference density integrates to one over the histogram.
  double mass = 0.0;
  for (std::size_t b = 0; b < est.reference.size(); ++b) mass += est.reference[b] * (est.bin_edges[b + 1] - est.bin_edges[b]);
  EXPECT_NEAR(mass, 1.0, 1e-6);
}

TEST(Born, ReferenceDensityAgainstQuadrature) {
  const LatticeSpec lat{0.5, 4.0, 0.0, 0.05};
  const KernelSpace ks(0.5, kGrid);
  const StateVector psi = (embed_point(0.0, ks) + Complex(0.3, 0.4) * embed_point(4.0, ks)).normalized();
  const DensityEstimate est = simulate_state_diffusion(psi, config(2000, 3), lat);
  const ComponentDecomposition d = decompose_state(psi, lat);
  auto amp = [&](double x) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < d.centers.size(); ++j) {
      const double u = x - d.centers[j];
      s += d.coefficients[j] * std::pow(2.0 * std::numbers::pi * 0.25, -0.25) * std::exp(-u * u);
    }
    return std::norm(s);
  };
  // Overlapping components: the norm is not the sum of |c|^2.
  const double total = oracle::integrate(amp, -std::numeric_limits<double>::infinity(),
                                         std::numeric_limits<double>::infinity());
  for (std::size_t b = 0; b < est.reference.size(); b += 7) {
    const double lo = est.bin_edges[b], hi = est.bin_edges[b + 1];
    EXPECT_NEAR(est.reference[b], oracle::integrate(amp, lo, hi) / (total * (hi - lo)), 1e-9) << lo;
  }
}

TEST(Born, ThreadCountDoesNotChangeResults) {
  const LatticeSpec lat{0.5, 4.0, 0.0, 0.05};
  const Superposition s = random_superposition(kGrid, lat, 7, 0);
  DiffusionConfig one = config(20000, 8);
  one.threads = 1;
  DiffusionConfig many = one;
  many.threads = 4;
  const DensityEstimate a = simulate_state_diffusion(s.state, one, lat);
  const DensityEstimate b = simulate_state_diffusion(s.state, many, lat);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(std::memcmp(&a.l1_error, &b.l1_error, sizeof(double)), 0);
}

TEST(Born, SuperpositionIsWeightedSumOfComponents) {
  const LatticeSpec lat{0.5, 4.0, 0.0, 0.05};
  const KernelSpace ks(0.5, kGrid);
  const StateVector psi = (embed_point(-4.0, ks) + Complex(0.0, 1.5) * embed_point(0.0, ks)).normalized();
  const ComponentDecomposition dec = decompose_state(psi, lat);
  const DensityEstimate whole = simulate_components(dec, config(100000, 12), 0.5);

  // Single-component runs, rebinned onto the superposition's bin edges.
  std::map<long long, double> mixed;
  auto key = [](double edge) { return std::llround(edge * 4.0 / 0.5); };
  for (std::size_t j = 0; j < dec.centers.size(); ++j) {
    if (dec.weights[j] < 1e-9) continue;
    ComponentDecomposition one;
    one.centers = {dec.centers[j]};
    one.coefficients = {1.0};
    one.weights = {1.0};
    one.weight_sum = 1.0;
    one.near_orthogonal = true;
    const DensityEstimate part = simulate_components(one, config(100000, 100 + j), 0.5);
    for (std::size_t b = 0; b < part.density.size(); ++b) mixed[key(part.bin_edges[b])] += dec.weights[j] * part.density[b];
  }
  double l1 = 0.0;
  for (std::size_t b = 0; b < whole.density.size(); ++b) {
    const double width = whole.bin_edges[b + 1] - whole.bin_edges[b];
    l1 += std::abs(whole.density[b] - mixed[key(whole.bin_edges[b])]) * width;
  }
  EXPECT_LT(l1, 0.05);
}

TEST(DensityFunctional, SymmetryInvarianceAndBounds) {
  const Grid g(64, -8.0, 8.0, true);
  gen::for_all(30, 93, [&](gen::Gen& r, int) {
    const StateVector phi = r.state(g), psi = r.state(g);
    const double sigma = r.uniform(0.2, 2.0);
    const double rho = density_functional(phi, psi, sigma);
    EXPECT_EQ(rho, density_functional(psi, phi, sigma));
    EXPECT_GE(rho, 0.0);
    EXPECT_LE(rho, 1.0 / sigma + 1e-12);
    EXPECT_NEAR(rho, std::norm(inner_l2(phi, psi)) / sigma, 1e-14);
    const Complex ph = std::polar(1.0, r.uniform(0.0, 2.0 * std::numbers::pi));
    EXPECT_NEAR(density_functional(ph * phi, psi, sigma), rho, 1e-13);
    EXPECT_NEAR(density_functional_quadratic_form(phi, psi, sigma), rho, 1e-10 * rho);
    EXPECT_NEAR(density_functional(phi, psi, sigma, 3), rho * sigma / (sigma * sigma * sigma), 1e-12 * rho);
  });
  const StateVector f = gen::Gen(1).state(g);
  EXPECT_THROW(density_functional(2.0 * f, f, 0.5), std::invalid_argument);
  EXPECT_THROW(density_functional(f, f, 0.0), std::invalid_argument);
}

TEST(DensityFunctional, UnitaryInvarianceProperty) {
  const Grid g(64, -8.0, 8.0, true);
  gen::for_all(20, 97, [&](gen::Gen& r, int) {
    Eigen::MatrixXcd a(64, 64);
    for (Eigen::Index i = 0; i < 64; ++i)
      for (Eigen::Index j = 0; j < 64; ++j) a(i, j) = r.complex_normal();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (a + a.adjoint()));
    Eigen::VectorXcd phases(64);
    for (Eigen::Index k = 0; k < 64; ++k) phases[k] = std::polar(1.0, eig.eigenvalues()[k]);
    const Eigen::MatrixXcd U = eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
    const StateVector phi = r.state(g), psi = r.state(g);
    const double before = density_functional(phi, psi, 0.5);
    const double after = density_functional(StateVector(g, U * phi.amplitudes()), StateVector(g, U * psi.amplitudes()), 0.5);
    EXPECT_NEAR(after, before, 1e-8);
  });
}

TEST(Pde, HeatKernelAndVarianceAdditivity) {
  const PdeCheck pde = verify_diffusion_pde(config(100000, 4), Grid(128, -16.0, 16.0, false), 0.0, 3);
  ASSERT_EQ(pde.epochs.size(), 4u);  // epoch 0 is the initial delta
  EXPECT_LT(pde.max_residual, 0.03);
  EXPECT_LT(pde.max_variance_error, 0.05);
  for (const PdeEpoch& e : pde.epochs) {
    if (e.epoch == 0) continue;
    EXPECT_NEAR(e.expected_variance, 0.25 * e.epoch, 1e-12);
    EXPECT_NEAR(e.variance, e.expected_variance, 0.05 * e.expected_variance);
    // Bin-averaged heat kernel integrates to one.
    double mass = 0.0;
    for (double h : e.heat_kernel) mass += h * 0.25;
    EXPECT_NEAR(mass, 1.0, 1e-9);
  }
}

TEST(SolidCom, SingleCellEqualsBrownianWalk) {
  const DiffusionConfig c = config(1000, 21);
  const SolidComResult r = solid_com_diffusion(1, c.diffusion_sigma, c);
  double s = 0.0;
  for (std::size_t w = 0; w < c.n_walkers; ++w) s += brownian_walk(0.0, c, w);
  const double mean = s / static_cast<double>(c.n_walkers);
  EXPECT_DOUBLE_EQ(r.mean, mean);
}

TEST(SolidCom, SuppressionScalesInverselyWithCells) {
  const DiffusionConfig c = config(20000, 22);
  const SolidComResult one = solid_com_diffusion(1, 0.5, c);
  const SolidComResult ten = solid_com_diffusion(10, 0.5, c);
  EXPECT_NEAR(one.diffusion_coefficient, 0.125, 0.125 * 0.05);
  EXPECT_NEAR(ten.diffusion_coefficient / one.diffusion_coefficient, 0.1, 0.01);
  EXPECT_EQ(solid_com_diffusion(5, 0.0, c).variance, 0.0);
  EXPECT_THROW(solid_com_diffusion(0, 0.5, c), std::invalid_argument);
}

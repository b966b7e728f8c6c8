#pragma once

// Monte Carlo diffusion of Gaussian components: Brownian walkers, arrival
// histograms against |psi|^2, the transition density functional and
// centre-of-mass diffusion of many-cell bodies.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cqlab/numerics.hpp"

namespace cqlab {

struct DiffusionConfig {
  std::size_t n_walkers = 100000;
  double tau = 1.0;              // observation time
  double diffusion_sigma = 0.5;  // displacement std over tau
  std::uint64_t seed = 0;
  int substeps = 8;      // Gaussian increments per walk
  unsigned threads = 0;  // 0 = thread_count()

  void validate() const;
  // k = diffusion_sigma^2 / (2 tau)
  double diffusion_coefficient() const { return diffusion_sigma * diffusion_sigma / (2.0 * tau); }
};

// Frame of embedded points at origin + j * spacing.
struct LatticeSpec {
  double sigma = 0.5;
  double spacing = 4.0;
  double origin = 0.0;
  double near_orthogonal_threshold = 0.05;
};

struct ComponentDecomposition {
  std::vector<double> centers;
  std::vector<Complex> coefficients;
  std::vector<double> weights;  // |C_j|^2 / sum |C_k|^2
  double weight_sum = 0.0;      // sum |C_j|^2 before renormalization
  double residual = 0.0;        // |psi - sum C_j delta~_{b_j}|
  double max_overlap = 0.0;     // largest |(delta~_i, delta~_j)|, i != j
  double condition_number = 0.0;
  bool near_orthogonal = false;
};

inline constexpr double kMaxFrameCondition = 1e8;

// Least squares onto the frame of every lattice point the state's grid admits.
// Throws std::invalid_argument for spacing <= 0 and std::domain_error when the
// Gram matrix condition number exceeds kMaxFrameCondition.
ComponentDecomposition decompose_state(const StateVector& psi, const LatticeSpec& lattice);

// Final position after one observation time; walker_id selects the stream and
// epoch the block of draws inside it.
double brownian_walk(double start, const DiffusionConfig& cfg, std::uint64_t walker_id, std::uint64_t epoch = 0);

struct ComponentMass {
  double center = 0.0;
  double expected = 0.0;  // renormalized |C_j|^2
  double observed = 0.0;  // fraction of arrivals in the Voronoi cell of the centre
  double standard_error = 0.0;
  bool within_3sd = false;
};

struct DensityEstimate {
  std::vector<double> bin_edges;
  std::vector<std::uint64_t> counts;
  std::vector<double> density;    // counts / (n_walkers * width)
  std::vector<double> reference;  // bin average of |psi_frame(a)|^2
  std::size_t outside = 0;        // arrivals outside the histogram range
  double l1_error = 0.0;          // on bins four times wider (width sigma)
  double l1_error_fine = 0.0;     // on the sigma/4 bins
  double ks_statistic = 0.0;
  double ks_critical = 0.0;  // 1% level, 1.628 / sqrt(n)
  std::vector<ComponentMass> components;
};

// Walker w picks component j with probability weights[j] (component_choice
// stream), starts at b_j and walks for tau. Bins of width sigma/4 cover the
// occupied centres +- 6 sigma. Throws std::invalid_argument unless the frame is
// near-orthogonal.
DensityEstimate simulate_state_diffusion(const StateVector& psi, const DiffusionConfig& cfg,
                                         const LatticeSpec& lattice);

// Same estimate for an explicit decomposition.
DensityEstimate simulate_components(const ComponentDecomposition& dec, const DiffusionConfig& cfg, double sigma);

// |(phi, psi)|^2 / sigma^dimension. Throws std::invalid_argument if either norm
// is off by more than 1e-8.
double density_functional(const StateVector& phi, const StateVector& psi, double sigma, int dimension = 1);

// The same value as the quadratic form sum_xy c(x,y) phi(x) conj(phi(y)) dx^2
// with c(x,y) = conj(psi(x)) psi(y) / sigma^dimension. O(n^2).
double density_functional_quadratic_form(const StateVector& phi, const StateVector& psi, double sigma,
                                         int dimension = 1);

struct Superposition {
  StateVector state;
  std::vector<double> centers;
  std::vector<Complex> amplitudes;  // before normalization of the state
};

// 2 to 5 components on distinct lattice sites at least 8 sigma inside the grid,
// with standard complex normal amplitudes; drawn from the test_data stream
// `index` so each case is reproducible on its own.
Superposition random_superposition(const Grid& grid, const LatticeSpec& lattice, std::uint64_t seed,
                                   std::uint64_t index);

struct PdeEpoch {
  int epoch = 0;
  double sup_residual = 0.0;  // max |histogram density - heat kernel| (1/length)
  double variance = 0.0;
  double expected_variance = 0.0;
  std::vector<double> density;
  std::vector<double> heat_kernel;
};

struct PdeCheck {
  std::vector<double> bin_centers;
  std::vector<PdeEpoch> epochs;
  double max_residual = 0.0;
  double max_variance_error = 0.0;  // max_e |variance_e / (e * variance_1) - 1|
};

// Walkers start at b and take `epochs` consecutive walks. Bins are the cells of
// `bins` (width dx, centred on the nodes). The heat kernel after e epochs has
// variance 2 k e tau = e diffusion_sigma^2 and is averaged over each bin.
// epochs[0] is the initial delta histogram.
PdeCheck verify_diffusion_pde(const DiffusionConfig& cfg, const Grid& bins, double b = 0.0, int epochs = 2);

struct SolidComResult {
  std::size_t n_cells = 0;
  double mean = 0.0;
  double variance = 0.0;
  double diffusion_coefficient = 0.0;  // variance / (2 tau)
};

// Each of n_cells cells receives an independent kick of std kick_std per
// observation time; the centre of mass moves by the mean kick. With one cell and
// kick_std = diffusion_sigma the walk equals brownian_walk from 0 bit for bit.
SolidComResult solid_com_diffusion(std::size_t n_cells, double kick_std, const DiffusionConfig& cfg);

}  // namespace cqlab

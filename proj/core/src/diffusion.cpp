#include "cqlab/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "cqlab/geometry.hpp"
#include "cqlab/parallel.hpp"
#include "cqlab/rng.hpp"

namespace cqlab {

namespace {

constexpr double kSignificantWeight = 1e-9;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// |sum_j C_j delta~_{b_j}(a)|^2 on the real line, integrated analytically.
class FrameDensity {
 public:
  FrameDensity(const std::vector<double>& centers, const std::vector<Complex>& coefficients, double sigma)
      : sigma_(sigma) {
    for (std::size_t i = 0; i < centers.size(); ++i) {
      for (std::size_t j = 0; j < centers.size(); ++j) {
        const double d = centers[i] - centers[j];
        const double w = (coefficients[i] * std::conj(coefficients[j])).real() * std::exp(-d * d / (8.0 * sigma * sigma));
        if (w == 0.0) continue;
        terms_.push_back({0.5 * (centers[i] + centers[j]), w});
        total_ += w;
      }
    }
    if (!(total_ > 0.0)) throw std::invalid_argument("frame density has zero mass");
  }

  // Mass below x, normalized to 1 over the line.
  double cdf(double x) const {
    double s = 0.0;
    for (const Term& t : terms_) s += t.weight * normal_cdf((x - t.mid) / sigma_);
    return s / total_;
  }

 private:
  struct Term {
    double mid;
    double weight;
  };
  double sigma_;
  double total_ = 0.0;
  std::vector<Term> terms_;
};

double sample_variance(const std::vector<double>& v, double* mean_out = nullptr) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  if (mean_out) *mean_out = mean;
  return v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
}

}  // namespace

void DiffusionConfig::validate() const {
  if (n_walkers == 0) throw std::invalid_argument("n_walkers must be positive");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
  if (!(diffusion_sigma >= 0.0) || !std::isfinite(diffusion_sigma))
    throw std::invalid_argument("diffusion_sigma must be non-negative");
  if (substeps < 1) throw std::invalid_argument("substeps must be at least 1");
}

ComponentDecomposition decompose_state(const StateVector& psi, const LatticeSpec& lattice) {
  if (!(lattice.spacing > 0.0) || !(lattice.sigma > 0.0)) throw std::invalid_argument("lattice spacing and sigma must be positive");
  const Grid& grid = psi.grid();

  ComponentDecomposition dec;
  std::vector<StateVector> frame;
  const auto j_lo = static_cast<long long>(std::ceil((grid.x_min() - lattice.origin) / lattice.spacing - 1e-12));
  const auto j_hi = static_cast<long long>(std::floor((grid.x_max() - lattice.origin) / lattice.spacing + 1e-12));
  for (long long j = j_lo; j <= j_hi; ++j) {
    const double b = lattice.origin + static_cast<double>(j) * lattice.spacing;
    if (grid.periodic() && b >= grid.x_max() - 1e-12 * grid.length()) continue;
    try {
      frame.push_back(realize(grid, GaussianParams{b, 0.0, lattice.sigma}));
      dec.centers.push_back(b);
    } catch (const std::out_of_range&) {
      // too close to an open boundary
    }
  }
  const auto m = static_cast<Eigen::Index>(frame.size());
  if (m == 0) throw std::invalid_argument("no lattice point fits on the grid");

  Eigen::MatrixXd gram(m, m);
  Eigen::VectorXcd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    rhs[i] = inner_l2(psi, frame[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j <= i; ++j) {
      gram(i, j) = gram(j, i) = inner_l2(frame[static_cast<std::size_t>(j)], frame[static_cast<std::size_t>(i)]).real();
      if (i != j) dec.max_overlap = std::max(dec.max_overlap, std::abs(gram(i, j)));
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  dec.condition_number = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (!(dec.condition_number <= kMaxFrameCondition))
    throw std::domain_error("frame Gram matrix is ill-conditioned (condition " + std::to_string(dec.condition_number) + ")");
  dec.near_orthogonal = dec.max_overlap < lattice.near_orthogonal_threshold;

  const Eigen::VectorXcd c = eig.eigenvectors() *
                             (eig.eigenvalues().cwiseInverse().asDiagonal() * (eig.eigenvectors().transpose() * rhs));
  StateVector approx(grid);
  for (Eigen::Index i = 0; i < m; ++i) {
    dec.coefficients.push_back(c[i]);
    approx += c[i] * frame[static_cast<std::size_t>(i)];
    dec.weight_sum += std::norm(c[i]);
  }
  dec.residual = (psi - approx).norm();
  for (const Complex& ci : dec.coefficients) dec.weights.push_back(std::norm(ci) / dec.weight_sum);
  return dec;
}

double brownian_walk(double start, const DiffusionConfig& cfg, std::uint64_t walker_id, std::uint64_t epoch) {
  RngStream rng(cfg.seed, stream_id(StreamPurpose::walk, walker_id),
                epoch * 2 * static_cast<std::uint64_t>(cfg.substeps));
  const double step = cfg.diffusion_sigma / std::sqrt(static_cast<double>(cfg.substeps));
  double x = start;
  for (int s = 0; s < cfg.substeps; ++s) x += step * rng.normal();
  return x;
}

DensityEstimate simulate_components(const ComponentDecomposition& dec, const DiffusionConfig& cfg, double sigma) {
  cfg.validate();
  std::vector<double> centers;
  std::vector<Complex> coefficients;
  std::vector<double> weights;
  for (std::size_t j = 0; j < dec.centers.size(); ++j) {
    if (dec.weights[j] <= kSignificantWeight) continue;
    centers.push_back(dec.centers[j]);
    coefficients.push_back(dec.coefficients[j]);
    weights.push_back(dec.weights[j]);
  }
  if (centers.empty()) throw std::invalid_argument("decomposition has no significant component");
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> cumulative(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cumulative.begin());

  const std::size_t n = cfg.n_walkers;
  std::vector<double> finals(n);
  parallel_for(
      n,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t w = begin; w < end; ++w) {
          RngStream choice(cfg.seed, stream_id(StreamPurpose::component_choice, w));
          const double u = choice.uniform() * cumulative.back();
          auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
          if (it == cumulative.end()) --it;
          const auto j = static_cast<std::size_t>(it - cumulative.begin());
          finals[w] = brownian_walk(centers[j], cfg, w);
        }
      },
      cfg.threads);

  DensityEstimate est;
  const auto [lo_it, hi_it] = std::minmax_element(centers.begin(), centers.end());
  const double width = sigma / 4.0;
  const double lo = *lo_it - 6.0 * sigma;
  const auto nb = static_cast<std::size_t>(std::ceil((*hi_it - *lo_it + 12.0 * sigma) / width - 1e-9));
  for (std::size_t i = 0; i <= nb; ++i) est.bin_edges.push_back(lo + static_cast<double>(i) * width);
  est.counts.assign(nb, 0);
  std::size_t below = 0;
  for (double x : finals) {
    const double s = std::floor((x - lo) / width);
    if (s < 0.0) {
      ++below;
    } else if (s >= static_cast<double>(nb)) {
      ++est.outside;
    } else {
      ++est.counts[static_cast<std::size_t>(s)];
    }
  }
  est.outside += below;

  const FrameDensity ref(dec.centers, dec.coefficients, sigma);
  const double nw = static_cast<double>(n);
  std::vector<double> ref_mass(nb);
  std::vector<double> obs_mass(nb);
  double ref_inside = 0.0;
  double cdf_prev = ref.cdf(est.bin_edges[0]);
  double emp_cum = static_cast<double>(below) / nw;
  est.ks_statistic = std::abs(emp_cum - cdf_prev);
  for (std::size_t i = 0; i < nb; ++i) {
    const double cdf_next = ref.cdf(est.bin_edges[i + 1]);
    ref_mass[i] = cdf_next - cdf_prev;
    ref_inside += ref_mass[i];
    obs_mass[i] = static_cast<double>(est.counts[i]) / nw;
    emp_cum += obs_mass[i];
    est.ks_statistic = std::max(est.ks_statistic, std::abs(emp_cum - cdf_next));
    est.density.push_back(obs_mass[i] / width);
    est.reference.push_back(ref_mass[i] / width);
    cdf_prev = cdf_next;
  }
  est.ks_critical = 1.628 / std::sqrt(nw);

  const double outside_error = std::abs(static_cast<double>(est.outside) / nw - (1.0 - ref_inside));
  est.l1_error_fine = outside_error;
  est.l1_error = outside_error;
  for (std::size_t i = 0; i < nb; ++i) est.l1_error_fine += std::abs(obs_mass[i] - ref_mass[i]);
  for (std::size_t g = 0; g < nb; g += 4) {
    double o = 0.0;
    double r = 0.0;
    for (std::size_t i = g; i < std::min(nb, g + 4); ++i) {
      o += obs_mass[i];
      r += ref_mass[i];
    }
    est.l1_error += std::abs(o - r);
  }

  std::vector<std::size_t> order(centers.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return centers[a] < centers[b]; });
  std::vector<double> cut;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) cut.push_back(0.5 * (centers[order[k]] + centers[order[k + 1]]));
  std::vector<std::size_t> cell_counts(order.size(), 0);
  for (double x : finals) ++cell_counts[static_cast<std::size_t>(std::upper_bound(cut.begin(), cut.end(), x) - cut.begin())];
  for (std::size_t k = 0; k < order.size(); ++k) {
    ComponentMass cm;
    cm.center = centers[order[k]];
    cm.expected = weights[order[k]] / wsum;
    cm.observed = static_cast<double>(cell_counts[k]) / nw;
    cm.standard_error = std::sqrt(cm.expected * (1.0 - cm.expected) / nw);
    cm.within_3sd = std::abs(cm.observed - cm.expected) <= 3.0 * cm.standard_error;
    est.components.push_back(cm);
  }
  return est;
}

DensityEstimate simulate_state_diffusion(const StateVector& psi, const DiffusionConfig& cfg,
                                         const LatticeSpec& lattice) {
  const ComponentDecomposition dec = decompose_state(psi, lattice);
  if (!dec.near_orthogonal)
    throw std::invalid_argument("frame is not near-orthogonal (max overlap " + std::to_string(dec.max_overlap) + ")");
  return simulate_components(dec, cfg, lattice.sigma);
}

double density_functional(const StateVector& phi, const StateVector& psi, double sigma, int dimension) {
  require_same_grid(phi, psi);
  if (std::abs(phi.norm() - 1.0) > 1e-8 || std::abs(psi.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("density_functional: states must be normalized");
  if (!(sigma > 0.0) || dimension < 1) throw std::invalid_argument("density_functional: bad sigma or dimension");
  return std::norm(inner_l2(phi, psi)) / std::pow(sigma, dimension);
}

double density_functional_quadratic_form(const StateVector& phi, const StateVector& psi, double sigma,
                                         int dimension) {
  require_same_grid(phi, psi);
  const std::size_t n = phi.size();
  const double dx = phi.grid().dx();
  const double scale = 1.0 / std::pow(sigma, dimension);
  Complex sum(0.0);
  for (std::size_t x = 0; x < n; ++x) {
    Complex row(0.0);
    for (std::size_t y = 0; y < n; ++y) {
      const Complex c = std::conj(psi[x]) * psi[y] * scale;
      row += c * std::conj(phi[y]);
    }
    sum += row * phi[x];
  }
  return sum.real() * dx * dx;
}

Superposition random_superposition(const Grid& grid, const LatticeSpec& lattice, std::uint64_t seed,
                                   std::uint64_t index) {
  std::vector<double> sites;
  const double margin = 8.0 * lattice.sigma;
  const auto j_lo = static_cast<long long>(std::ceil((grid.x_min() + margin - lattice.origin) / lattice.spacing - 1e-12));
  const auto j_hi = static_cast<long long>(std::floor((grid.x_max() - margin - lattice.origin) / lattice.spacing + 1e-12));
  for (long long j = j_lo; j <= j_hi; ++j) sites.push_back(lattice.origin + static_cast<double>(j) * lattice.spacing);

  RngStream rng(seed, stream_id(StreamPurpose::test_data, index));
  const std::size_t want = 2 + static_cast<std::size_t>(rng() % 4);
  if (sites.size() < want) throw std::invalid_argument("grid holds too few lattice sites for a superposition");
  for (std::size_t k = 0; k < want; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(rng() % (sites.size() - k));
    std::swap(sites[k], sites[pick]);
  }
  sites.resize(want);
  std::sort(sites.begin(), sites.end());

  Superposition s{StateVector(grid), sites, {}};
  for (double b : sites) {
    const double re = rng.normal();
    const double im = rng.normal();
    s.amplitudes.emplace_back(re, im);
    s.state += s.amplitudes.back() * realize(grid, GaussianParams{b, 0.0, lattice.sigma});
  }
  s.state = s.state.normalized();
  return s;
}

PdeCheck verify_diffusion_pde(const DiffusionConfig& cfg, const Grid& bins, double b, int epochs) {
  cfg.validate();
  if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  const std::size_t n = cfg.n_walkers;
  const std::size_t nb = bins.size();
  const double dx = bins.dx();
  const double lo = bins.x_min() - 0.5 * dx;

  PdeCheck check;
  for (std::size_t j = 0; j < nb; ++j) check.bin_centers.push_back(bins.x(j));

  auto histogram = [&](const std::vector<double>& pos) {
    std::vector<double> density(nb, 0.0);
    for (double x : pos) {
      const double s = std::floor((x - lo) / dx);
      if (s >= 0.0 && s < static_cast<double>(nb)) density[static_cast<std::size_t>(s)] += 1.0;
    }
    for (double& d : density) d /= static_cast<double>(n) * dx;
    return density;
  };

  std::vector<double> pos(n, b);
  {
    PdeEpoch e;
    e.density = histogram(pos);
    e.heat_kernel = e.density;
    check.epochs.push_back(e);
  }

  double first_variance = 0.0;
  for (int e = 1; e <= epochs; ++e) {
    parallel_for(
        n,
        [&](std::size_t begin, std::size_t end) {
          for (std::size_t w = begin; w < end; ++w)
            pos[w] = brownian_walk(pos[w], cfg, w, static_cast<std::uint64_t>(e - 1));
        },
        cfg.threads);
    PdeEpoch ep;
    ep.epoch = e;
    ep.density = histogram(pos);
    ep.expected_variance = static_cast<double>(e) * cfg.diffusion_sigma * cfg.diffusion_sigma;
    const double s = std::sqrt(ep.expected_variance);
    for (std::size_t j = 0; j < nb; ++j) {
      const double left = lo + static_cast<double>(j) * dx;
      const double k = s > 0.0 ? (normal_cdf((left + dx - b) / s) - normal_cdf((left - b) / s)) / dx
                               : ((b >= left && b < left + dx) ? 1.0 / dx : 0.0);
      ep.heat_kernel.push_back(k);
      ep.sup_residual = std::max(ep.sup_residual, std::abs(ep.density[j] - k));
    }
    ep.variance = sample_variance(pos);
    if (e == 1) first_variance = ep.variance;
    if (e > 1 && first_variance > 0.0)
      check.max_variance_error =
          std::max(check.max_variance_error, std::abs(ep.variance / (static_cast<double>(e) * first_variance) - 1.0));
    check.max_residual = std::max(check.max_residual, ep.sup_residual);
    check.epochs.push_back(std::move(ep));
  }
  return check;
}

SolidComResult solid_com_diffusion(std::size_t n_cells, double kick_std, const DiffusionConfig& cfg) {
  cfg.validate();
  if (n_cells < 1) throw std::invalid_argument("n_cells must be at least 1");
  if (!(kick_std >= 0.0)) throw std::invalid_argument("kick_std must be non-negative");
  const std::size_t n = cfg.n_walkers;
  const double step = kick_std / std::sqrt(static_cast<double>(cfg.substeps));
  const double cells = static_cast<double>(n_cells);
  std::vector<double> com(n);
  parallel_for(
      n,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t w = begin; w < end; ++w) {
          RngStream rng(cfg.seed, stream_id(StreamPurpose::walk, w));
          double x = 0.0;
          for (int s = 0; s < cfg.substeps; ++s) {
            double kick = 0.0;
            for (std::size_t c = 0; c < n_cells; ++c) kick += step * rng.normal();
            x += kick / cells;
          }
          com[w] = x;
        }
      },
      cfg.threads);

  SolidComResult r;
  r.n_cells = n_cells;
  r.variance = sample_variance(com, &r.mean);
  r.diffusion_coefficient = r.variance / (2.0 * cfg.tau);
  return r;
}

}  // namespace cqlab

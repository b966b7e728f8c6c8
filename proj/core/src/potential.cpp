#include "cqlab/potential.hpp"

#include <cmath>
#include <stdexcept>

#include "cqlab/rng.hpp"

namespace cqlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double poly_eval(const std::vector<double>& c, double x, int derivative) {
  double sum = 0.0;
  for (std::size_t k = c.size(); k-- > static_cast<std::size_t>(derivative);) {
    double factor = 1.0;
    for (int d = 0; d < derivative; ++d) factor *= static_cast<double>(k - static_cast<std::size_t>(d));
    sum = sum * x + factor * c[k];
  }
  return sum;
}

// Linear interpolation of tabulated values; derivatives by central differences
// of the interpolant at spacing dx.
double table_eval(const PotentialSpec::Tabulated& tab, double x) {
  const Grid& g = tab.grid;
  const auto n = static_cast<long long>(g.size());
  double s = (x - g.x_min()) / g.dx();
  if (g.periodic()) {
    s = std::fmod(s, static_cast<double>(n));
    if (s < 0) s += static_cast<double>(n);
  } else {
    s = std::clamp(s, 0.0, static_cast<double>(n - 1));
  }
  auto i0 = static_cast<long long>(std::floor(s));
  const double w = s - static_cast<double>(i0);
  long long i1 = i0 + 1;
  if (g.periodic()) {
    i0 %= n;
    i1 %= n;
  } else {
    i0 = std::min(i0, n - 1);
    i1 = std::min(i1, n - 1);
  }
  return (1.0 - w) * tab.values[i0] + w * tab.values[i1];
}

}  // namespace

PotentialSpec PotentialSpec::free() { return PotentialSpec(Free{}); }
PotentialSpec PotentialSpec::linear(double slope) { return PotentialSpec(Linear{slope}); }
PotentialSpec PotentialSpec::harmonic(double stiffness, double center) {
  return PotentialSpec(Harmonic{stiffness, center});
}

PotentialSpec PotentialSpec::polynomial(std::vector<double> coefficients) {
  for (double c : coefficients)
    if (!std::isfinite(c)) throw std::invalid_argument("polynomial potential: non-finite coefficient");
  return PotentialSpec(Polynomial{std::move(coefficients)});
}

PotentialSpec PotentialSpec::tabulated(const Grid& grid, RealVector values) {
  if (static_cast<std::size_t>(values.size()) != grid.size())
    throw std::invalid_argument("tabulated potential: sample count does not match grid");
  if (!values.allFinite()) throw std::invalid_argument("tabulated potential: non-finite sample");
  return PotentialSpec(Tabulated{grid, std::move(values)});
}

PotentialSpec PotentialSpec::noisy(PotentialSpec base, NoiseSpec noise) {
  if (base.noise_) throw std::invalid_argument("noisy potential: base is already noisy");
  if (!(noise.step > 0.0) || !(noise.force_std >= 0.0))
    throw std::invalid_argument("noisy potential: need step > 0 and force_std >= 0");
  base.noise_ = noise;
  return base;
}

std::string PotentialSpec::name() const {
  std::string base = std::visit(overloaded{[](const Free&) { return std::string("free"); },
                                           [](const Linear&) { return std::string("linear"); },
                                           [](const Harmonic&) { return std::string("harmonic"); },
                                           [](const Polynomial&) { return std::string("polynomial"); },
                                           [](const Tabulated&) { return std::string("tabulated"); }},
                                kind_);
  return noise_ ? "noisy(" + base + ")" : base;
}

double PotentialSpec::noise_force(double t) const {
  if (!noise_ || noise_->force_std == 0.0) return 0.0;
  const auto step_index = static_cast<long long>(std::floor(t / noise_->step));
  // Two words per normal draw; negative steps wrap, which only matters for
  // backwards propagation.
  RngStream rng(noise_->seed, stream_id(StreamPurpose::potential_noise, noise_->stream),
                2 * static_cast<std::uint64_t>(step_index));
  return noise_->force_std * rng.normal();
}

double PotentialSpec::value(double x, double t) const {
  const double v = std::visit(
      overloaded{[](const Free&) { return 0.0; }, [&](const Linear& l) { return l.slope * x; },
                 [&](const Harmonic& h) { return 0.5 * h.stiffness * (x - h.center) * (x - h.center); },
                 [&](const Polynomial& p) { return poly_eval(p.coefficients, x, 0); },
                 [&](const Tabulated& tab) { return table_eval(tab, x); }},
      kind_);
  return v - noise_force(t) * x;
}

double PotentialSpec::derivative(double x, double t) const {
  const double d = std::visit(
      overloaded{[](const Free&) { return 0.0; }, [](const Linear& l) { return l.slope; },
                 [&](const Harmonic& h) { return h.stiffness * (x - h.center); },
                 [&](const Polynomial& p) { return poly_eval(p.coefficients, x, 1); },
                 [&](const Tabulated& tab) {
                   const double h = tab.grid.dx();
                   return (table_eval(tab, x + h) - table_eval(tab, x - h)) / (2.0 * h);
                 }},
      kind_);
  return d - noise_force(t);
}

double PotentialSpec::second_derivative(double x, double) const {
  return std::visit(overloaded{[](const Free&) { return 0.0; }, [](const Linear&) { return 0.0; },
                               [](const Harmonic& h) { return h.stiffness; },
                               [&](const Polynomial& p) { return poly_eval(p.coefficients, x, 2); },
                               [&](const Tabulated& tab) {
                                 const double h = tab.grid.dx();
                                 return (table_eval(tab, x + h) - 2.0 * table_eval(tab, x) + table_eval(tab, x - h)) /
                                        (h * h);
                               }},
                    kind_);
}

RealVector PotentialSpec::sample(const Grid& grid, double t) const {
  RealVector v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t j = 0; j < grid.size(); ++j) v[static_cast<Eigen::Index>(j)] = value(grid.x(j), t);
  if (!v.allFinite()) throw std::domain_error("potential is not finite on the grid");
  return v;
}

RealVector PotentialSpec::sample_derivative(const Grid& grid, double t) const {
  RealVector v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t j = 0; j < grid.size(); ++j) v[static_cast<Eigen::Index>(j)] = derivative(grid.x(j), t);
  return v;
}

std::optional<std::vector<double>> PotentialSpec::polynomial_coefficients() const {
  return std::visit(
      overloaded{[](const Free&) -> std::optional<std::vector<double>> { return std::vector<double>{0.0}; },
                 [](const Linear& l) -> std::optional<std::vector<double>> { return std::vector<double>{0.0, l.slope}; },
                 [](const Harmonic& h) -> std::optional<std::vector<double>> {
                   return std::vector<double>{0.5 * h.stiffness * h.center * h.center, -h.stiffness * h.center,
                                              0.5 * h.stiffness};
                 },
                 [](const Polynomial& p) -> std::optional<std::vector<double>> { return p.coefficients; },
                 [](const Tabulated&) -> std::optional<std::vector<double>> { return std::nullopt; }},
      kind_);
}

}  // namespace cqlab

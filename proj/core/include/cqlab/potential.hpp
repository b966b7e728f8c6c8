#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cqlab/numerics.hpp"

namespace cqlab {

// Piecewise-constant random force: during step j = floor(t / step) the
// potential gains -F_j * x with F_j ~ N(0, force_std^2) drawn from a
// counter-addressed stream, so V(x, t) is reproducible at any t.
struct NoiseSpec {
  double force_std = 0.0;
  double step = 1e-3;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

class PotentialSpec {
 public:
  struct Free {};
  struct Linear {
    double slope = 0.0;
  };
  struct Harmonic {
    double stiffness = 1.0;
    double center = 0.0;
  };
  // sum_k c_k x^k
  struct Polynomial {
    std::vector<double> coefficients;
  };
  // Node values on a grid, linearly interpolated (periodically on periodic grids).
  struct Tabulated {
    Grid grid;
    RealVector values;
  };
  using Kind = std::variant<Free, Linear, Harmonic, Polynomial, Tabulated>;

  static PotentialSpec free();
  static PotentialSpec linear(double slope);
  static PotentialSpec harmonic(double stiffness, double center = 0.0);
  static PotentialSpec polynomial(std::vector<double> coefficients);
  static PotentialSpec tabulated(const Grid& grid, RealVector values);
  static PotentialSpec noisy(PotentialSpec base, NoiseSpec noise);

  const Kind& kind() const { return kind_; }
  const std::optional<NoiseSpec>& noise() const { return noise_; }
  bool time_dependent() const { return noise_.has_value(); }
  PotentialSpec without_noise() const { return PotentialSpec(kind_); }
  std::string name() const;

  double value(double x, double t = 0.0) const;
  // dV/dx and d2V/dx2.
  double derivative(double x, double t = 0.0) const;
  double second_derivative(double x, double t = 0.0) const;

  RealVector sample(const Grid& grid, double t = 0.0) const;
  RealVector sample_derivative(const Grid& grid, double t = 0.0) const;

  // Power-series coefficients of the static part, when it is a polynomial.
  std::optional<std::vector<double>> polynomial_coefficients() const;

  // Random force acting during the noise step that contains t (0 without noise).
  double noise_force(double t) const;

 private:
  explicit PotentialSpec(Kind kind) : kind_(std::move(kind)) {}

  Kind kind_;
  std::optional<NoiseSpec> noise_;
};

}  // namespace cqlab

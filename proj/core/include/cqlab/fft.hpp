#pragma once

// Thin RAII wrapper over FFTW complex 1-D transforms.

#include <cstddef>
#include <memory>

#include "cqlab/numerics.hpp"

namespace cqlab {

// Unnormalized transforms: forward computes sum_j f_j exp(-2 pi i jk/n),
// backward the same with +i. backward(forward(f)) = n f.
// Plans are shared per size and safe to use from several threads.
class Fft {
 public:
  explicit Fft(std::size_t n);

  std::size_t size() const { return n_; }
  void forward(const ComplexVector& in, ComplexVector& out) const;
  void backward(const ComplexVector& in, ComplexVector& out) const;

  struct Plans;

 private:
  std::size_t n_;
  std::shared_ptr<const Plans> plans_;
};

// Spectral operators on periodic grids. The Nyquist mode carries k = -pi/dx,
// which keeps the momentum operator Hermitian and P*P equal to the kinetic
// operator as matrices.
class SpectralOps {
 public:
  explicit SpectralOps(const Grid& grid);

  const Grid& grid() const { return grid_; }
  const RealVector& k() const { return k_; }

  // (-i d/dx)^order applied spectrally; multiply by hbar^order for momentum powers.
  ComplexVector apply_k_power(const ComplexVector& psi, int order) const;
  // -hbar^2/(2m) d^2/dx^2.
  ComplexVector apply_kinetic(const ComplexVector& psi, double hbar, double mass) const;
  // Multiply in Fourier space by exp(-i hbar k^2 dt / (2m)).
  void kinetic_phase_inplace(ComplexVector& psi, double hbar, double mass, double dt) const;

  const Fft& fft() const { return fft_; }

 private:
  Grid grid_;
  Fft fft_;
  RealVector k_;
};

}  // namespace cqlab

#include "cqlab/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace cqlab {

struct Fft::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  Plans() = default;
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
  ~Plans() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::shared_ptr<const Fft::Plans> plans_for(std::size_t n) {
  static std::map<std::size_t, std::shared_ptr<const Fft::Plans>> cache;
  std::lock_guard lock(planner_mutex());
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  auto* buf_in = fftw_alloc_complex(n);
  auto* buf_out = fftw_alloc_complex(n);
  auto plans = std::make_shared<Fft::Plans>();
  const int len = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans->forward = fftw_plan_dft_1d(len, buf_in, buf_out, FFTW_FORWARD, flags);
  plans->backward = fftw_plan_dft_1d(len, buf_in, buf_out, FFTW_BACKWARD, flags);
  fftw_free(buf_in);
  fftw_free(buf_out);
  if (!plans->forward || !plans->backward) throw std::runtime_error("FFTW planning failed");
  cache.emplace(n, plans);
  return plans;
}

fftw_complex* as_fftw(const ComplexVector& v) {
  // FFTW does not write through the input pointer for out-of-place transforms.
  return reinterpret_cast<fftw_complex*>(const_cast<Complex*>(v.data()));
}

}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("Fft: size must be positive");
  plans_ = plans_for(n);
}

void Fft::forward(const ComplexVector& in, ComplexVector& out) const {
  if (static_cast<std::size_t>(in.size()) != n_) throw std::invalid_argument("Fft: size mismatch");
  out.resize(in.size());
  if (in.data() == out.data()) {
    ComplexVector tmp = in;
    fftw_execute_dft(plans_->forward, as_fftw(tmp), reinterpret_cast<fftw_complex*>(out.data()));
    return;
  }
  fftw_execute_dft(plans_->forward, as_fftw(in), reinterpret_cast<fftw_complex*>(out.data()));
}

void Fft::backward(const ComplexVector& in, ComplexVector& out) const {
  if (static_cast<std::size_t>(in.size()) != n_) throw std::invalid_argument("Fft: size mismatch");
  out.resize(in.size());
  if (in.data() == out.data()) {
    ComplexVector tmp = in;
    fftw_execute_dft(plans_->backward, as_fftw(tmp), reinterpret_cast<fftw_complex*>(out.data()));
    return;
  }
  fftw_execute_dft(plans_->backward, as_fftw(in), reinterpret_cast<fftw_complex*>(out.data()));
}

SpectralOps::SpectralOps(const Grid& grid) : grid_(grid), fft_(grid.size()), k_(grid.wavenumbers()) {
  if (!grid.periodic()) throw std::invalid_argument("spectral operators need a periodic grid");
}

ComplexVector SpectralOps::apply_k_power(const ComplexVector& psi, int order) const {
  ComplexVector spec;
  fft_.forward(psi, spec);
  const double inv_n = 1.0 / static_cast<double>(grid_.size());
  for (Eigen::Index j = 0; j < spec.size(); ++j) spec[j] *= std::pow(k_[j], order) * inv_n;
  ComplexVector out;
  fft_.backward(spec, out);
  return out;
}

ComplexVector SpectralOps::apply_kinetic(const ComplexVector& psi, double hbar, double mass) const {
  ComplexVector spec;
  fft_.forward(psi, spec);
  const double scale = hbar * hbar / (2.0 * mass) / static_cast<double>(grid_.size());
  for (Eigen::Index j = 0; j < spec.size(); ++j) spec[j] *= k_[j] * k_[j] * scale;
  ComplexVector out;
  fft_.backward(spec, out);
  return out;
}

void SpectralOps::kinetic_phase_inplace(ComplexVector& psi, double hbar, double mass, double dt) const {
  ComplexVector spec;
  fft_.forward(psi, spec);
  const double inv_n = 1.0 / static_cast<double>(grid_.size());
  const double c = hbar * dt / (2.0 * mass);
  for (Eigen::Index j = 0; j < spec.size(); ++j) spec[j] *= std::polar(inv_n, -c * k_[j] * k_[j]);
  fft_.backward(spec, psi);
}

}  // namespace cqlab

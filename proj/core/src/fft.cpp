#include "fibrenet/fft.hpp"

#include <mutex>
#include <new>
#include <stdexcept>

#include <fftw3.h>

namespace fibrenet {
namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Impl {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(spec);
  }
};

RealFft::RealFft(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n < 2) throw std::invalid_argument("FFT length must be at least 2");
  impl_->real = static_cast<double*>(fftw_malloc(sizeof(double) * n));
  impl_->spec = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
  if (!impl_->real || !impl_->spec) throw std::bad_alloc();
  std::lock_guard lock(planner_mutex());
  int len = static_cast<int>(n);
  impl_->fwd = fftw_plan_dft_r2c_1d(len, impl_->real, impl_->spec, FFTW_ESTIMATE);
  impl_->inv = fftw_plan_dft_c2r_1d(len, impl_->spec, impl_->real, FFTW_ESTIMATE);
  if (!impl_->fwd || !impl_->inv) throw std::runtime_error("FFTW plan creation failed");
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

std::span<double> RealFft::real() { return {impl_->real, n_}; }

std::span<std::complex<double>> RealFft::spectrum() {
  return {reinterpret_cast<std::complex<double>*>(impl_->spec), n_ / 2 + 1};
}

void RealFft::forward() { fftw_execute(impl_->fwd); }
void RealFft::inverse() { fftw_execute(impl_->inv); }

}  // namespace fibrenet

#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace fibrenet {

// Real <-> half-complex transforms of a fixed length, backed by FFTW.
// Buffers are owned by the plan; plan creation is serialized internally so
// plans may be built from several threads.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  std::span<double> real();
  std::span<std::complex<double>> spectrum();

  // real() -> spectrum(), unnormalized.
  void forward();
  // spectrum() -> real(), unnormalized (no 1/n).
  void inverse();

 private:
  struct Impl;
  std::size_t n_ = 0;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fibrenet

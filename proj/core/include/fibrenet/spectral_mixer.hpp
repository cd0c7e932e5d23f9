#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fibrenet/signals.hpp"

namespace fibrenet {

/// splitmix64 of (seed, stream): independent, reproducible sub-seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Frequency-domain synthesis of several independent Gaussian sources mixed
/// into several outputs through arbitrary per-bin complex responses.
///
/// Every source draws one complex normal per positive-frequency bin from its
/// own generator, in bin order, so a source's realization depends only on its
/// PSD, seed, n and fs. Outputs are periodic with period n.
class SpectralMixer {
 public:
  struct Bin {
    std::size_t index;             // 1 .. n/2 - 1
    double frequency;              // Hz
    std::complex<double> unit_delay;  // exp(-j 2 pi index / n)
  };
  using Mix = std::function<void(const Bin& bin, std::span<const std::complex<double>> sources,
                                 std::span<std::complex<double>> outputs)>;

  SpectralMixer(std::size_t n, double fs);

  std::size_t add_source(std::function<double(double)> psd, std::uint64_t seed);
  std::size_t add_source(const NoiseSpec& spec);
  std::size_t source_count() const { return sources_.size(); }

  std::vector<std::vector<double>> render(std::size_t outputs, const Mix& mix) const;

 private:
  struct Source {
    std::function<double(double)> psd;
    std::uint64_t seed;
    std::size_t psd_owner;  // index of the source whose PSD value is reused
  };
  std::vector<NoiseSpec> specs_;  // seedless copies for PSD sharing
  std::size_t n_;
  double fs_;
  std::vector<Source> sources_;
};

}  // namespace fibrenet

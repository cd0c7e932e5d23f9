#include "fibrenet/spectral_mixer.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "fibrenet/fft.hpp"

namespace fibrenet {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SpectralMixer::SpectralMixer(std::size_t n, double fs) : n_(n), fs_(fs) {
  if (n < 4) throw std::invalid_argument("spectral synthesis needs at least 4 samples");
  if (!(fs > 0.0) || !std::isfinite(fs)) throw std::invalid_argument("sample rate must be positive");
}

std::size_t SpectralMixer::add_source(std::function<double(double)> psd, std::uint64_t seed) {
  sources_.push_back({std::move(psd), seed, sources_.size()});
  specs_.emplace_back();
  return sources_.size() - 1;
}

std::size_t SpectralMixer::add_source(const NoiseSpec& spec) {
  NoiseSpec key = spec.with_seed(0);
  key.drift.reset();
  std::size_t owner = sources_.size();
  for (std::size_t i = 0; i < specs_.size(); ++i)
    if (!specs_[i].terms.empty() && specs_[i] == key) {
      owner = i;
      break;
    }
  sources_.push_back({[spec](double f) { return spec.psd(f); }, spec.rng_seed, owner});
  specs_.push_back(key);
  return sources_.size() - 1;
}

std::vector<std::vector<double>> SpectralMixer::render(std::size_t outputs, const Mix& mix) const {
  const std::size_t half = n_ / 2;
  const std::size_t ns = sources_.size();
  std::vector<std::mt19937_64> engines;
  std::vector<std::normal_distribution<double>> normals(ns);
  engines.reserve(ns);
  for (const auto& s : sources_) engines.emplace_back(s.seed);

  std::vector<std::vector<std::complex<double>>> spectra(
      outputs, std::vector<std::complex<double>>(half + 1));
  std::vector<std::complex<double>> src(ns);
  std::vector<double> amps(ns, 0.0);
  std::vector<std::complex<double>> out(outputs);
  const double df = fs_ / static_cast<double>(n_);
  const double norm = static_cast<double>(n_) * fs_ / 4.0;
  const double step = -2.0 * std::numbers::pi / static_cast<double>(n_);

  for (std::size_t k = 1; k <= half; ++k) {
    const double f = df * static_cast<double>(k);
    for (std::size_t s = 0; s < ns; ++s) {
      double a = normals[s](engines[s]);
      double b = normals[s](engines[s]);
      double amp;
      if (sources_[s].psd_owner == s) {
        double p = sources_[s].psd(f);
        amp = p > 0.0 ? std::sqrt(p * norm) : 0.0;
        amps[s] = amp;
      } else {
        amp = amps[sources_[s].psd_owner];
      }
      src[s] = {amp * a, amp * b};
    }
    if (k == half && n_ % 2 == 0) continue;  // Nyquist bin stays empty
    Bin bin{k, f, std::polar(1.0, step * static_cast<double>(k))};
    std::fill(out.begin(), out.end(), std::complex<double>{});
    mix(bin, src, out);
    for (std::size_t o = 0; o < outputs; ++o) spectra[o][k] = out[o];
  }

  RealFft fft(n_);
  std::vector<std::vector<double>> result(outputs);
  const double inv_n = 1.0 / static_cast<double>(n_);
  for (std::size_t o = 0; o < outputs; ++o) {
    auto spec = fft.spectrum();
    std::copy(spectra[o].begin(), spectra[o].end(), spec.begin());
    std::vector<std::complex<double>>().swap(spectra[o]);
    fft.inverse();
    auto re = fft.real();
    result[o].resize(n_);
    for (std::size_t i = 0; i < n_; ++i) result[o][i] = re[i] * inv_n;
  }
  return result;
}

}  // namespace fibrenet

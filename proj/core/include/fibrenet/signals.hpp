#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fibrenet/frequency.hpp"

namespace fibrenet {

/// Uniformly sampled phase deviation (rad) riding on a carrier that sits
/// nominal_offset Hz away from the reference carrier.
struct PhaseTimeline {
  double sample_rate = 1.0;
  double start_time = 0.0;
  std::vector<double> samples;
  Frequency nominal_offset{0};

  std::size_t size() const { return samples.size(); }
  double dt() const { return 1.0 / sample_rate; }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }

  /// Throws std::invalid_argument on a bad rate or non-finite samples.
  void validate() const;

  static PhaseTimeline zeros(std::size_t n, double fs, Frequency offset = Frequency(0));
};

bool same_grid(const PhaseTimeline& a, const PhaseTimeline& b);
void require_same_grid(const PhaseTimeline& a, const PhaseTimeline& b, const char* what);

struct PowerLawTerm {
  int exponent = 0;          // alpha, in [-4, 0]
  double coefficient = 0.0;  // b_alpha, rad^2/Hz at 1 Hz
  bool operator==(const PowerLawTerm&) const = default;
};

struct DriftSpec {
  double linear_rate = 1e-3;        // rad/s
  double diurnal_amplitude = 0.5;   // rad
  double diurnal_period = 86400.0;  // s
  bool operator==(const DriftSpec&) const = default;
};

struct NoiseSpec {
  std::vector<PowerLawTerm> terms;
  double f_min = 1e-6;
  double f_max = 1e9;
  std::optional<DriftSpec> drift;
  std::uint64_t rng_seed = 0;

  /// One-sided S_phi(f) in rad^2/Hz; zero outside [f_min, f_max].
  double psd(double f) const;
  bool silent() const;
  void validate() const;
  NoiseSpec scaled(double factor) const;
  NoiseSpec with_seed(std::uint64_t seed) const;
  bool operator==(const NoiseSpec&) const = default;
};

NoiseSpec white_phase(double level, std::uint64_t seed = 0);

/// Spectrally shaped Gaussian noise, plus drift when one is set.
PhaseTimeline synth_power_law_noise(const NoiseSpec& spec, std::size_t n, double fs);

/// Deterministic drift samples: rate*t + A*sin(2 pi t / P).
std::vector<double> drift_samples(const DriftSpec& drift, std::size_t n, double fs,
                                  double start_time = 0.0);

/// Number of samples for tau at fs. Throws if tau is off-grid by more than
/// 1e-6 of a sample, reporting the nearest achievable delay.
std::size_t delay_in_samples(double tau, double fs);

PhaseTimeline delay(const PhaseTimeline& x, double tau);
PhaseTimeline delay_samples(const PhaseTimeline& x, std::size_t d);

struct Weighted {
  const PhaseTimeline& timeline;
  double scale;
};
PhaseTimeline combine(std::span<const Weighted> xs);
PhaseTimeline combine(std::initializer_list<Weighted> xs);

PhaseTimeline decimate(const PhaseTimeline& x, std::size_t factor);

/// Least-squares fit in log-log of integer power-law exponents to
/// (frequency, PSD) points. Coefficients are kept non-negative.
std::vector<PowerLawTerm> fit_power_law_mixture(std::span<const double> freqs,
                                                std::span<const double> psd,
                                                std::span<const int> exponents);

/// The shipped free-running 50 km fibre model: exponents {-2, -3} through
/// 10 rad^2/Hz at 1 Hz and 1e-6 rad^2/Hz at 1 kHz.
NoiseSpec standard_fibre_noise(std::uint64_t seed = 0);

}  // namespace fibrenet

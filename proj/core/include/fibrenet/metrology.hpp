#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fibrenet/optics.hpp"
#include "fibrenet/signals.hpp"

namespace fibrenet {

enum class Weighting { lambda, pi };

struct FreqSeries {
  double gate = 1.0;        // s
  std::vector<double> samples;  // fractional frequency
  double carrier = 1.0;     // Hz
  Weighting weighting = Weighting::lambda;
};

/// Lambda: difference of consecutive gate-long phase means (triangular
/// weighting of frequency over 2 gates). Pi: difference of phase samples
/// one gate apart. Both divided by 2 pi carrier gate.
FreqSeries lambda_count(const BeatNote& b, double gate, double carrier, Weighting w = Weighting::lambda);

struct Psd {
  std::vector<double> freq_hz;
  std::vector<double> density;  // rad^2/Hz, one-sided
};

enum class Detrend { none, mean, linear };

/// Hann-windowed Welch estimate.
Psd welch_psd(const PhaseTimeline& x, std::size_t segment_len, double overlap = 0.5, Detrend detrend = Detrend::mean);

/// Geometric-bin averages with bins_per_decade bins; empty bins dropped.
Psd log_bin(const Psd& psd, int bins_per_decade);

/// Mean density over [f_lo, f_hi].
double band_mean(const Psd& psd, double f_lo, double f_hi);

enum class Estimator { mdev, oadev };

struct StabilityCurve {
  Estimator estimator = Estimator::mdev;
  std::vector<double> taus;
  std::vector<double> values;
  std::vector<std::size_t> counts;
  std::vector<double> error_bars;   // value / sqrt(count)
  std::vector<double> skipped_taus; // requested but too little data

  /// Value at tau (relative match 1e-9); nullopt if absent.
  std::optional<double> at(double tau) const;
};

/// Octaves gate*2^k up to record/5, plus `extra` taus that fit the record.
std::vector<double> octave_taus(const FreqSeries& y, const std::vector<double>& extra = {});

StabilityCurve oadev(const FreqSeries& y, const std::vector<double>& taus);
StabilityCurve mdev(const FreqSeries& y, const std::vector<double>& taus);

struct AccuracyResult {
  double mean_offset = 0.0;
  double uncertainty = 0.0;
  double tau_used = 0.0;
  bool caveat = false;  // no tau in [20000, 30000] s available
};

AccuracyResult accuracy(const FreqSeries& y, const StabilityCurve& oadev_curve);

double f_factor(const StabilityCurve& ext, const StabilityCurve& main, double tau);

std::vector<std::size_t> detect_cycle_slips(const BeatNote& b, double threshold = 3.141592653589793);

struct StabilityReport {
  std::string name;
  StabilityCurve mdev;
  StabilityCurve oadev;
  double mean_offset = 0.0;
  double offset_uncertainty = 0.0;
  std::optional<double> f_factor;
  std::size_t slip_count = 0;
  FreqSeries series;
};

/// Counts, builds both curves and accuracy for a beat.
StabilityReport analyse_beat(const std::string& name, const BeatNote& b, double gate, double carrier,
                             std::optional<double> tracking_bandwidth);

}  // namespace fibrenet

#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "fibrenet/signals.hpp"

namespace fibrenet {

inline constexpr double kSpeedOfLight = 299'792'458.0;

struct FibreSpan {
  double length_km = 50.0;
  double group_index = 1.468;
  int segments = 16;
  NoiseSpec noise;  // whole-span PSD, split evenly over segments

  double tau() const { return group_index * length_km * 1e3 / kSpeedOfLight; }
  void validate() const;
  bool operator==(const FibreSpan&) const = default;
};

/// Segment layout of a span on a sample grid. Segment i covers
/// [boundaries[i], boundaries[i+1]) in one-way delay samples and its noise
/// is injected at positions[i].
struct SpanGrid {
  std::size_t delay = 0;  // one-way delay T in samples
  int segments = 1;
  std::vector<std::size_t> boundaries;
  std::vector<std::size_t> positions;

  /// Segment index m with boundaries[m] at km from the input.
  std::size_t boundary_index(double km, double length_km) const;
};

/// Snaps tau to the grid (refusing > 1% error) and halves K until every
/// segment gets a distinct injection delay.
SpanGrid resolve_span_grid(const FibreSpan& span, double fs);

struct SegmentTap {
  std::size_t segment;
  std::size_t delay;
  bool operator<(const SegmentTap& o) const {
    return segment != o.segment ? segment < o.segment : delay < o.delay;
  }
  bool operator==(const SegmentTap&) const = default;
};
using TapSet = std::vector<SegmentTap>;

/// Forward-travelling noise of segments [first, last) seen at delay `at`.
TapSet forward_taps(const SpanGrid& g, std::size_t at, std::size_t first, std::size_t last);
/// Backward-travelling noise of segments [first, last) seen at delay `at`.
TapSet backward_taps(const SpanGrid& g, std::size_t at, std::size_t first, std::size_t last);

/// Source of per-segment fibre noise. render() returns, for every tap set,
/// y[j] = sum over taps of phi_segment[(j - delay) mod n].
class SegmentNoise {
 public:
  virtual ~SegmentNoise() = default;
  virtual int segments() const = 0;
  virtual std::size_t size() const = 0;
  virtual double sample_rate() const = 0;
  virtual std::vector<std::vector<double>> render(const std::vector<TapSet>& taps) const = 0;
};

/// Independent Gaussian segments synthesized in the frequency domain; tap
/// sums are formed before the inverse transform, so segments are never
/// stored individually.
class SpectralSegmentNoise final : public SegmentNoise {
 public:
  SpectralSegmentNoise(const NoiseSpec& span_noise, int segments, std::size_t n, double fs);
  int segments() const override { return segments_; }
  std::size_t size() const override { return n_; }
  double sample_rate() const override { return fs_; }
  std::vector<std::vector<double>> render(const std::vector<TapSet>& taps) const override;
  PhaseTimeline segment(std::size_t i) const;

 private:
  NoiseSpec segment_noise_;
  int segments_;
  std::size_t n_;
  double fs_;
};

/// Caller-provided segment timelines, summed directly in the time domain.
class ExplicitSegmentNoise final : public SegmentNoise {
 public:
  explicit ExplicitSegmentNoise(std::vector<PhaseTimeline> segments);
  int segments() const override { return static_cast<int>(segments_.size()); }
  std::size_t size() const override { return n_; }
  double sample_rate() const override { return fs_; }
  std::vector<std::vector<double>> render(const std::vector<TapSet>& taps) const override;

 private:
  std::vector<PhaseTimeline> segments_;
  std::size_t n_;
  double fs_;
};

/// A span bound to a grid and a noise realization. Tap renders can be
/// prefetched in one pass and are then served (copied) from a cache until
/// released.
class SpanRealization {
 public:
  SpanRealization(FibreSpan span, double fs, std::shared_ptr<const SegmentNoise> noise);

  const FibreSpan& span() const { return span_; }
  const SpanGrid& grid() const { return grid_; }
  double sample_rate() const { return fs_; }
  std::size_t size() const { return noise_->size(); }
  const SegmentNoise& noise() const { return *noise_; }

  void prefetch(const std::vector<TapSet>& taps) const;
  std::vector<double> taps(const TapSet& t) const;
  void release() const;

 private:
  FibreSpan span_;
  double fs_;
  SpanGrid grid_;
  std::shared_ptr<const SegmentNoise> noise_;
  mutable std::mutex mu_;
  mutable std::map<TapSet, std::vector<double>> cache_;
};

/// Spectral realization of the span's own NoiseSpec for n samples at fs.
std::shared_ptr<SpanRealization> realize_span(const FibreSpan& span, std::size_t n, double fs);

}  // namespace fibrenet

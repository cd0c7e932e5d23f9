#include "fibrenet/span.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "fibrenet/spectral_mixer.hpp"

namespace fibrenet {

void FibreSpan::validate() const {
  if (!(length_km >= 0.0) || !std::isfinite(length_km)) throw std::invalid_argument("span length must be >= 0");
  if (!(group_index >= 1.0) || !std::isfinite(group_index)) throw std::invalid_argument("group index must be >= 1");
  if (segments < 1) throw std::invalid_argument("span needs at least one segment");
  noise.validate();
  if (noise.drift) throw std::invalid_argument("fibre span noise is compensated in-loop and cannot carry drift");
}

std::size_t SpanGrid::boundary_index(double km, double length_km) const {
  if (length_km <= 0.0) {
    if (km == 0.0) return 0;
    throw std::invalid_argument("extraction point outside a zero-length span");
  }
  const double m = km / length_km * segments;
  const double r = std::round(m);
  if (km < 0.0 || km > length_km || std::abs(m - r) > 1e-9 * std::max(1.0, m)) {
    std::ostringstream msg;
    msg << "extraction at " << km << " km does not fall on a segment boundary (segment length "
        << length_km / segments << " km)";
    throw std::invalid_argument(msg.str());
  }
  return static_cast<std::size_t>(r);
}

SpanGrid resolve_span_grid(const FibreSpan& span, double fs) {
  span.validate();
  const double exact = span.tau() * fs;
  const double snapped = std::round(exact);
  if (exact > 0.0 && std::abs(snapped - exact) >= 0.01 * exact) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "span delay " << span.tau() * 1e6 << " us is " << exact << " samples at " << fs
        << " Hz; snapping to " << snapped << " samples errs by more than 1%";
    throw std::invalid_argument(msg.str());
  }
  SpanGrid g;
  g.delay = static_cast<std::size_t>(snapped);
  int k = span.segments;
  while (k > 1 && static_cast<std::size_t>(k) > g.delay) {
    spdlog::warn("span of {} km: {} segments cannot be resolved with a {}-sample delay, using {}", span.length_km, k,
                 g.delay, k / 2);
    k /= 2;
  }
  g.segments = k;
  g.boundaries.resize(k + 1);
  for (int i = 0; i <= k; ++i)
    g.boundaries[i] = static_cast<std::size_t>(std::llround(static_cast<double>(i) * g.delay / k));
  g.positions.resize(k);
  for (int i = 0; i < k; ++i) g.positions[i] = (g.boundaries[i] + g.boundaries[i + 1]) / 2;
  return g;
}

TapSet forward_taps(const SpanGrid& g, std::size_t at, std::size_t first, std::size_t last) {
  TapSet t;
  for (std::size_t i = first; i < last; ++i) {
    if (g.positions[i] > at) throw std::invalid_argument("forward tap observed upstream of its segment");
    t.push_back({i, at - g.positions[i]});
  }
  return t;
}

TapSet backward_taps(const SpanGrid& g, std::size_t at, std::size_t first, std::size_t last) {
  TapSet t;
  for (std::size_t i = first; i < last; ++i) {
    if (g.positions[i] < at) throw std::invalid_argument("backward tap observed downstream of its segment");
    t.push_back({i, g.positions[i] - at});
  }
  return t;
}

SpectralSegmentNoise::SpectralSegmentNoise(const NoiseSpec& span_noise, int segments, std::size_t n, double fs)
    : segment_noise_(span_noise.scaled(1.0 / segments)), segments_(segments), n_(n), fs_(fs) {
  if (segments < 1) throw std::invalid_argument("need at least one segment");
  segment_noise_.drift.reset();
}

std::vector<std::vector<double>> SpectralSegmentNoise::render(const std::vector<TapSet>& taps) const {
  if (segment_noise_.silent()) return std::vector<std::vector<double>>(taps.size(), std::vector<double>(n_, 0.0));
  SpectralMixer mixer(n_, fs_);
  for (int i = 0; i < segments_; ++i) mixer.add_source(segment_noise_.with_seed(derive_seed(segment_noise_.rng_seed, i)));
  std::size_t max_delay = 0;
  for (const auto& set : taps)
    for (const auto& t : set) {
      if (t.segment >= static_cast<std::size_t>(segments_)) throw std::invalid_argument("tap names a missing segment");
      max_delay = std::max(max_delay, t.delay);
    }
  std::vector<std::complex<double>> powers(max_delay + 1);
  return mixer.render(taps.size(), [&](const SpectralMixer::Bin& bin, auto src, auto out) {
    powers[0] = 1.0;
    for (std::size_t d = 1; d <= max_delay; ++d) powers[d] = powers[d - 1] * bin.unit_delay;
    for (std::size_t o = 0; o < taps.size(); ++o) {
      std::complex<double> acc{};
      for (const auto& t : taps[o]) acc += src[t.segment] * powers[t.delay];
      out[o] = acc;
    }
  });
}

PhaseTimeline SpectralSegmentNoise::segment(std::size_t i) const {
  PhaseTimeline t;
  t.sample_rate = fs_;
  t.samples = std::move(render({TapSet{{i, 0}}})[0]);
  return t;
}

ExplicitSegmentNoise::ExplicitSegmentNoise(std::vector<PhaseTimeline> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw std::invalid_argument("need at least one segment timeline");
  n_ = segments_.front().size();
  fs_ = segments_.front().sample_rate;
  for (const auto& s : segments_) require_same_grid(segments_.front(), s, "segment noise");
}

std::vector<std::vector<double>> ExplicitSegmentNoise::render(const std::vector<TapSet>& taps) const {
  std::vector<std::vector<double>> out(taps.size(), std::vector<double>(n_, 0.0));
  for (std::size_t o = 0; o < taps.size(); ++o) {
    for (const auto& t : taps[o]) {
      if (t.segment >= segments_.size()) throw std::invalid_argument("tap names a missing segment");
      const auto& s = segments_[t.segment].samples;
      const std::size_t d = t.delay % n_;
      for (std::size_t j = 0; j < n_; ++j) out[o][j] += s[(j + n_ - d) % n_];
    }
  }
  return out;
}

SpanRealization::SpanRealization(FibreSpan span, double fs, std::shared_ptr<const SegmentNoise> noise)
    : span_(std::move(span)), fs_(fs), grid_(resolve_span_grid(span_, fs)), noise_(std::move(noise)) {
  if (!noise_) throw std::invalid_argument("span realization needs a noise source");
  if (noise_->sample_rate() != fs) throw std::invalid_argument("segment noise sampled at a different rate");
  if (noise_->segments() != grid_.segments)
    throw std::invalid_argument("segment noise has " + std::to_string(noise_->segments()) + " segments, grid has " +
                                std::to_string(grid_.segments));
}

void SpanRealization::prefetch(const std::vector<TapSet>& taps) const {
  std::vector<TapSet> missing;
  {
    std::lock_guard lock(mu_);
    for (const auto& t : taps)
      if (!cache_.count(t) && std::find(missing.begin(), missing.end(), t) == missing.end()) missing.push_back(t);
  }
  if (missing.empty()) return;
  auto rendered = noise_->render(missing);
  std::lock_guard lock(mu_);
  for (std::size_t i = 0; i < missing.size(); ++i) cache_[missing[i]] = std::move(rendered[i]);
}

std::vector<double> SpanRealization::taps(const TapSet& t) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(t); it != cache_.end()) return it->second;
  }
  return std::move(noise_->render({t})[0]);
}

void SpanRealization::release() const {
  std::lock_guard lock(mu_);
  cache_.clear();
}

std::shared_ptr<SpanRealization> realize_span(const FibreSpan& span, std::size_t n, double fs) {
  const SpanGrid g = resolve_span_grid(span, fs);
  auto noise = std::make_shared<SpectralSegmentNoise>(span.noise, g.segments, n, fs);
  return std::make_shared<SpanRealization>(span, fs, std::move(noise));
}

}  // namespace fibrenet

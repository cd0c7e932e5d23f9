#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fibrenet/optics.hpp"
#include "fibrenet/servo.hpp"
#include "fibrenet/span.hpp"

namespace fibrenet {

enum class Direction { forward, backward };

/// Through the whole span: input delayed by T plus accumulated segment noise.
PhaseTimeline propagate(const PhaseTimeline& x, const SpanRealization& span, Direction dir);

struct CompensatedLink {
  PhaseTimeline output;
  PhaseTimeline correction;
  BeatNote in_loop_beat;
  PhaseTimeline free_running_output;

  // Kept for extraction along the span.
  std::shared_ptr<const SpanRealization> span;
  PhaseTimeline input;
  Frequency input_shift{0};
  Frequency output_shift{0};
};

struct ExtractionSignals {
  PhaseTimeline forward;
  PhaseTimeline backward;
  BeatNote pd1_beat;
};

/// Detection floors of the photodiodes in a loop (optional, same grid).
struct LoopFloors {
  const PhaseTimeline* round_trip = nullptr;
};

/// Main link: AOM1 (+f1, correction) -> span -> AOM2 (+f2) -> mirror and back;
/// PI on beat(round trip, input) / N_b.
CompensatedLink compensate(const PhaseTimeline& input, std::shared_ptr<const SpanRealization> span,
                           const ServoConfig& servo, const FrequencyPlan& plan, LoopFloors floors = {});

/// Tap sets compensate() and extract_midpoint() will ask for; pass them to
/// SpanRealization::prefetch to render all in one pass.
std::vector<TapSet> link_tap_sets(const SpanGrid& g);
std::vector<TapSet> extraction_tap_sets(const SpanGrid& g, std::size_t boundary);

ExtractionSignals extract_midpoint(const CompensatedLink& link, double position_km);

struct RegenerationFloors {
  const PhaseTimeline* pd1 = nullptr;
  const PhaseTimeline* pd2 = nullptr;
};

/// Offset-locks the laser to forward + pd1/2 + LO. With pd1_correction off
/// the laser follows the bare forward signal (used as an oracle).
LockResult regenerate(const ExtractionSignals& ex, const LaserDiode& ld, const FrequencyPlan& plan,
                      const BeatNote& lo, RegenerationFloors floors = {}, const PhaseTimeline* free_running = nullptr,
                      bool pd1_correction = true);

/// Secondary link: AOM3 (f3, correction) -> span -> AOM4 (f4) -> mirror and
/// back; error = beat(input, round trip)/N_b - LO/N_lo.
CompensatedLink secondary_link(const PhaseTimeline& src, std::shared_ptr<const SpanRealization> span,
                               const ServoConfig& servo, const FrequencyPlan& plan, const BeatNote& lo,
                               LoopFloors floors = {});

struct ResidualPrediction {
  std::vector<double> freq_hz;
  std::vector<double> psd;
  double bandwidth_hz = 0.0;  // 1/(4 tau)
};

/// min(1, (1/3)(2 pi f tau)^2) * S_free(f).
ResidualPrediction predict_residual_psd(const FibreSpan& span, const std::vector<double>& freqs,
                                        const std::vector<double>& free_psd);

struct Topology {
  bool extraction = true;
  bool secondary = true;
};

/// Exact offset from nu_0 of every optical node and frequency of every beat.
std::map<std::string, Frequency> nominal_frequency_map(const FrequencyPlan& plan, const Topology& topology = {});

}  // namespace fibrenet

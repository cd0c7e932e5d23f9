#pragma once

#include <cstddef>
#include <optional>

#include "fibrenet/optics.hpp"
#include "fibrenet/servo.hpp"
#include "fibrenet/span.hpp"

namespace fibrenet {

/// Everything the long-duration engine needs about the network. Loops keep
/// the discrete dynamics they have at loop_rate; the engine evaluates their
/// closed-loop responses bin by bin on the slow grid.
struct NetworkModel {
  double loop_rate = 102'400.0;
  FrequencyPlan plan;
  FibreSpan main_span;
  double extraction_km = 25.0;
  std::optional<FibreSpan> secondary_span;  // empty: attenuator, Out1 = laser
  ServoConfig main_servo;
  ServoConfig secondary_servo;
  ServoConfig laser_pll;
  bool pd1_correction = true;
  NoiseSpec laser_free;
  NoiseSpec lo;
  NoiseSpec floor_round_trip;
  NoiseSpec floor_pd1;
  NoiseSpec floor_pd2;
  NoiseSpec floor_secondary;
};

/// End-to-end link phases (output minus input reference), measurement
/// floors excluded.
struct SlowRun {
  PhaseTimeline out0;
  PhaseTimeline out1;
};

SlowRun run_slow_engine(const NetworkModel& model, std::size_t n, double fs);

}  // namespace fibrenet

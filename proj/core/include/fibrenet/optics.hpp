#pragma once

#include <optional>

#include "fibrenet/servo.hpp"
#include "fibrenet/signals.hpp"

namespace fibrenet {

/// RF-domain phase with an exact nominal frequency. nominal_frequency and
/// phase.nominal_offset are always equal.
struct BeatNote {
  PhaseTimeline phase;
  Frequency nominal_frequency{0};

  BeatNote() = default;
  BeatNote(PhaseTimeline p, Frequency nominal);
};

/// Offsets are relative to nu_0; f_ld is derived as -f_lo (the laser is
/// offset by the LO tone so that f3 + f4 = f_lo brings Out1 back onto Out0).
struct FrequencyPlan {
  Frequency nu_0{194'400'000'000'000};
  Frequency f_1{40'000'000};
  Frequency f_2{35'000'000};
  Frequency f_3{-37'500'000};
  Frequency f_4{-37'500'000};
  Frequency f_lo{-75'000'000};
  std::optional<Frequency> main_sum_constraint;  // f_1 + f_2 when pinned

  Frequency f_ld() const { return -f_lo; }
  Frequency nu_plus() const { return f_1; }
  Frequency nu_minus() const { return f_1 + 2 * f_2; }
  Frequency nu_ld() const { return f_1 + f_2 + f_ld(); }
  Frequency lo_tone() const { return f_ld(); }

  /// f_3 = f_lo - f_4 from the other fields.
  void derive_f3() { f_3 = f_lo - f_4; }
  /// Throws ConfigError naming the broken relation.
  void validate() const;

  static FrequencyPlan standard();
  static FrequencyPlan zero();
  bool operator==(const FrequencyPlan&) const = default;
};

PhaseTimeline aom(const PhaseTimeline& x, const Frequency& shift, const PhaseTimeline* correction = nullptr);
BeatNote beat(const PhaseTimeline& a, const PhaseTimeline& b);
BeatNote divide(const BeatNote& b, int n);
BeatNote mix(const BeatNote& a, const BeatNote& b, int sign);

/// Adds a detection floor to a beat's phase (same grid).
BeatNote with_floor(BeatNote b, const PhaseTimeline* floor);

/// First-order low-pass on beat phase (tracking oscillator).
BeatNote tracking_filter(const BeatNote& b, double bandwidth_hz);

struct LaserDiode {
  NoiseSpec free_running_noise;
  ServoConfig pll;
};

struct LockResult {
  PhaseTimeline output;
  PhaseTimeline error;
};

/// Offset-locks the laser to `reference` (an optical timeline) plus the LO
/// tone: output offset = reference offset + lo nominal, output phase tracks
/// reference + LO phase inside the loop bandwidth. `free_running` overrides
/// the synthesized laser noise; `floor` is the detection floor of the lock
/// photodiode. Throws SimulationError when lock is lost after acquisition.
LockResult lock_laser(const LaserDiode& ld, const PhaseTimeline& reference, const BeatNote& lo,
                      const PhaseTimeline* free_running = nullptr, const PhaseTimeline* floor = nullptr);

/// Closed-loop laser response pieces at f for engine rate fs:
/// output = (free + K (target - floor)) / (1 + K).
std::complex<double> pll_open_loop(const ServoConfig& pll, double f, double fs);

}  // namespace fibrenet

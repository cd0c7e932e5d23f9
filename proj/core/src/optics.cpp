#include "fibrenet/optics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fibrenet/errors.hpp"

namespace fibrenet {

BeatNote::BeatNote(PhaseTimeline p, Frequency nominal) : phase(std::move(p)), nominal_frequency(nominal) {
  phase.nominal_offset = nominal;
}

void FrequencyPlan::validate() const {
  if (nu_0 <= 0) throw ConfigError("frequency plan: nu_0 must be positive");
  if (f_1 < 0 || f_2 < 0) throw ConfigError("frequency plan: main-link shifts f1, f2 must be >= 0");
  if (f_3 > 0 || f_4 > 0) throw ConfigError("frequency plan: secondary-link shifts f3, f4 must be <= 0");
  if (f_3 != f_lo - f_4)
    throw ConfigError("frequency plan: f3 must equal f_LO - f4 (" + format_frequency(f_lo - f_4) + " Hz), got " +
                      format_frequency(f_3) + " Hz");
  if (main_sum_constraint && f_1 + f_2 != *main_sum_constraint)
    throw ConfigError("frequency plan: constraint f1 + f2 = " + format_frequency(*main_sum_constraint) +
                      " Hz violated (f1 + f2 = " + format_frequency(f_1 + f_2) + " Hz)");
}

FrequencyPlan FrequencyPlan::standard() {
  FrequencyPlan p;
  p.main_sum_constraint = Frequency(75'000'000);
  return p;
}

FrequencyPlan FrequencyPlan::zero() {
  FrequencyPlan p;
  p.f_1 = p.f_2 = p.f_3 = p.f_4 = p.f_lo = Frequency(0);
  return p;
}

PhaseTimeline aom(const PhaseTimeline& x, const Frequency& shift, const PhaseTimeline* correction) {
  PhaseTimeline y = x;
  y.nominal_offset += shift;
  if (correction) {
    require_same_grid(x, *correction, "aom");
    for (std::size_t i = 0; i < y.size(); ++i) y.samples[i] += correction->samples[i];
  }
  return y;
}

BeatNote beat(const PhaseTimeline& a, const PhaseTimeline& b) {
  require_same_grid(a, b, "beat");
  PhaseTimeline p = a;
  for (std::size_t i = 0; i < p.size(); ++i) p.samples[i] = a.samples[i] - b.samples[i];
  return BeatNote(std::move(p), a.nominal_offset - b.nominal_offset);
}

BeatNote divide(const BeatNote& b, int n) {
  if (n < 1) throw std::invalid_argument("divider ratio must be >= 1");
  PhaseTimeline p = b.phase;
  const double inv = 1.0 / static_cast<double>(n);
  if (n != 1)
    for (double& v : p.samples) v *= inv;
  return BeatNote(std::move(p), b.nominal_frequency / Frequency(n));
}

BeatNote mix(const BeatNote& a, const BeatNote& b, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("mix sign must be +1 or -1");
  require_same_grid(a.phase, b.phase, "mix");
  PhaseTimeline p = a.phase;
  for (std::size_t i = 0; i < p.size(); ++i) p.samples[i] = a.phase.samples[i] + sign * b.phase.samples[i];
  return BeatNote(std::move(p), a.nominal_frequency + Frequency(sign) * b.nominal_frequency);
}

BeatNote with_floor(BeatNote b, const PhaseTimeline* floor) {
  if (!floor) return b;
  require_same_grid(b.phase, *floor, "detection floor");
  for (std::size_t i = 0; i < b.phase.size(); ++i) b.phase.samples[i] += floor->samples[i];
  return b;
}

BeatNote tracking_filter(const BeatNote& b, double bandwidth_hz) {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("tracking bandwidth must be positive");
  BeatNote out = b;
  auto& s = out.phase.samples;
  if (s.empty()) return out;
  const double a = 1.0 - std::exp(-2.0 * std::numbers::pi * bandwidth_hz / b.phase.sample_rate);
  double y = s[0];
  for (std::size_t i = 0; i < s.size(); ++i) {
    y += a * (s[i] - y);
    s[i] = y;
  }
  return out;
}

std::complex<double> pll_open_loop(const ServoConfig& pll, double f, double fs) {
  return controller_response(pll, f, fs);
}

namespace {
double pll_bandwidth(const ServoConfig& pll) {
  if (pll.unity_gain_hz > 0.0) return pll.unity_gain_hz;
  return std::sqrt(pll.integral_gain) / (2.0 * std::numbers::pi);
}
}  // namespace

LockResult lock_laser(const LaserDiode& ld, const PhaseTimeline& reference, const BeatNote& lo,
                      const PhaseTimeline* free_running, const PhaseTimeline* floor) {
  ld.pll.validate();
  require_same_grid(reference, lo.phase, "lock_laser");
  const double fs = reference.sample_rate;
  if (pll_bandwidth(ld.pll) >= fs / 10.0) {
    std::ostringstream msg;
    msg << "laser PLL bandwidth " << pll_bandwidth(ld.pll) << " Hz must stay below fs/10 = " << fs / 10.0 << " Hz";
    throw std::invalid_argument(msg.str());
  }
  const std::size_t n = reference.size();
  PhaseTimeline synthesized;
  if (!free_running) {
    synthesized = synth_power_law_noise(ld.free_running_noise, n, fs);
    synthesized.start_time = reference.start_time;
    free_running = &synthesized;
  }
  require_same_grid(reference, *free_running, "lock_laser free-running noise");
  if (floor) require_same_grid(reference, *floor, "lock_laser floor");

  LockResult r;
  r.output = reference;
  r.output.nominal_offset = reference.nominal_offset + lo.nominal_frequency;
  r.error = PhaseTimeline::zeros(n, fs);
  r.error.start_time = reference.start_time;
  if (n == 0) return r;

  const auto& ref = reference.samples;
  const auto& tone = lo.phase.samples;
  const auto& fr = free_running->samples;
  PiController ctl(ld.pll, fs);
  const bool closed = ld.pll.enabled && ld.pll.gain_scale > 0.0;
  double u = closed ? ref[0] + tone[0] - fr[0] : 0.0;
  const std::size_t acquisition = static_cast<std::size_t>(std::ceil(1e-3 * fs));
  for (std::size_t i = 0; i < n; ++i) {
    const double out = fr[i] + u;
    double e = out - ref[i] - tone[i];
    if (floor) e += floor->samples[i];
    r.output.samples[i] = out;
    r.error.samples[i] = e;
    if (closed && i >= acquisition && std::abs(e) > std::numbers::pi) {
      std::ostringstream msg;
      msg << "laser lock lost at t = " << reference.start_time + static_cast<double>(i) / fs
          << " s (phase error " << e << " rad)";
      throw SimulationError(msg.str());
    }
    if (closed) u -= ctl.step(e);
  }
  return r;
}

}  // namespace fibrenet

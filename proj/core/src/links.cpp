#include "fibrenet/links.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fibrenet/errors.hpp"

namespace fibrenet {
namespace {

// Value at index i, holding the first sample for i < 0.
inline double held(const std::vector<double>& v, std::ptrdiff_t i) { return v[i < 0 ? 0 : i]; }

// Periodic noise record sampled at i (any sign).
inline double circ(const std::vector<double>& v, std::ptrdiff_t i) {
  const auto n = static_cast<std::ptrdiff_t>(v.size());
  i %= n;
  return v[i < 0 ? i + n : i];
}

struct LoopRun {
  std::vector<double> correction;
  std::vector<double> far_end;
  std::vector<double> beat;
};

// Round-trip loop shared by main and secondary links. sigma = +1 measures
// beat(round trip, input), sigma = -1 beat(input, round trip); the
// correction is always driven against its own sign in the beat.
LoopRun run_loop(const std::vector<double>& x, const std::vector<double>& fwd, const std::vector<double>& bwd,
                 std::size_t delay, const ServoConfig& servo, double fs, int sigma, const BeatNote* lo,
                 const PhaseTimeline* floor) {
  servo.validate();
  const std::size_t n = x.size();
  const auto T = static_cast<std::ptrdiff_t>(delay);
  LoopRun r;
  r.correction.assign(n, 0.0);
  r.far_end.resize(n);
  r.beat.resize(n);
  if (n == 0) return r;
  const bool closed = servo.enabled && servo.gain_scale > 0.0;
  const double inv_nb = 1.0 / servo.beat_divider;
  const double inv_nlo = 1.0 / servo.lo_divider;
  auto lo_at = [&](std::size_t i) { return lo ? lo->phase.samples[i] : 0.0; };

  auto& c = r.correction;
  if (closed) {
    const double noise0 = circ(fwd, -T) + bwd[0];
    c[0] = (sigma * servo.beat_divider * lo_at(0) * inv_nlo - noise0) / 2.0;
  }
  PiController ctl(servo, fs);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    const double rt = held(x, ii - 2 * T) + held(c, ii - 2 * T) + circ(fwd, ii - T) + bwd[i] + c[i];
    const double b = sigma * (rt - x[i]);
    r.beat[i] = b;
    r.far_end[i] = held(x, ii - T) + held(c, ii - T) + fwd[i];
    if (!closed) continue;
    double measured = b + (floor ? floor->samples[i] : 0.0);
    double e = measured * inv_nb - lo_at(i) * inv_nlo;
    if (!(std::abs(e) <= 1e3)) {
      std::ostringstream msg;
      msg << "compensation loop diverged at t = " << static_cast<double>(i) / fs << " s (error " << e
          << " rad); check servo gains against the " << 2.0 * delay / fs << " s loop delay";
      throw SimulationError(msg.str());
    }
    if (i + 1 < n) c[i + 1] = c[i] - sigma * ctl.step(e);
  }
  return r;
}

PhaseTimeline on_grid(const PhaseTimeline& like, std::vector<double> samples, Frequency offset) {
  PhaseTimeline t;
  t.sample_rate = like.sample_rate;
  t.start_time = like.start_time;
  t.samples = std::move(samples);
  t.nominal_offset = offset;
  return t;
}

void check_span_grid(const PhaseTimeline& x, const SpanRealization& span) {
  if (x.sample_rate != span.sample_rate() || x.size() != span.size())
    throw std::invalid_argument("timeline and span realization are on different grids");
}

CompensatedLink run_link(const PhaseTimeline& input, std::shared_ptr<const SpanRealization> span,
                         const ServoConfig& servo, Frequency shift_in, Frequency shift_out, int sigma,
                         const BeatNote* lo, LoopFloors floors) {
  if (!span) throw std::invalid_argument("compensation needs a span realization");
  check_span_grid(input, *span);
  if (lo) require_same_grid(input, lo->phase, "link LO");
  if (floors.round_trip) require_same_grid(input, *floors.round_trip, "round-trip floor");
  const SpanGrid& g = span->grid();
  auto sets = link_tap_sets(g);
  span->prefetch(sets);
  auto fwd = span->taps(sets[0]);
  auto bwd = span->taps(sets[1]);
  LoopRun run = run_loop(input.samples, fwd, bwd, g.delay, servo, input.sample_rate, sigma, lo, floors.round_trip);
  bwd.clear();
  bwd.shrink_to_fit();

  const Frequency out_offset = input.nominal_offset + shift_in + shift_out;
  CompensatedLink link;
  const auto T = static_cast<std::ptrdiff_t>(g.delay);
  std::vector<double> free(input.size());
  for (std::size_t i = 0; i < free.size(); ++i) free[i] = held(input.samples, static_cast<std::ptrdiff_t>(i) - T) + fwd[i];
  link.free_running_output = on_grid(input, std::move(free), out_offset);
  link.output = on_grid(input, std::move(run.far_end), out_offset);
  link.correction = on_grid(input, std::move(run.correction), Frequency(0));
  link.in_loop_beat = BeatNote(on_grid(input, std::move(run.beat), Frequency(0)),
                               Frequency(sigma) * 2 * (shift_in + shift_out));
  link.span = std::move(span);
  link.input = input;
  link.input_shift = shift_in;
  link.output_shift = shift_out;
  return link;
}

}  // namespace

std::vector<TapSet> link_tap_sets(const SpanGrid& g) {
  const auto k = static_cast<std::size_t>(g.segments);
  return {forward_taps(g, g.delay, 0, k), backward_taps(g, 0, 0, k)};
}

std::vector<TapSet> extraction_tap_sets(const SpanGrid& g, std::size_t boundary) {
  const auto k = static_cast<std::size_t>(g.segments);
  const std::size_t at = g.boundaries.at(boundary);
  return {forward_taps(g, at, 0, boundary), backward_taps(g, at, boundary, k)};
}

PhaseTimeline propagate(const PhaseTimeline& x, const SpanRealization& span, Direction dir) {
  check_span_grid(x, span);
  const SpanGrid& g = span.grid();
  const auto sets = link_tap_sets(g);
  auto noise = span.taps(dir == Direction::forward ? sets[0] : sets[1]);
  const auto T = static_cast<std::ptrdiff_t>(g.delay);
  PhaseTimeline y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y.samples[i] = held(x.samples, static_cast<std::ptrdiff_t>(i) - T) + noise[i];
  return y;
}

CompensatedLink compensate(const PhaseTimeline& input, std::shared_ptr<const SpanRealization> span,
                           const ServoConfig& servo, const FrequencyPlan& plan, LoopFloors floors) {
  return run_link(input, std::move(span), servo, plan.f_1, plan.f_2, +1, nullptr, floors);
}

CompensatedLink secondary_link(const PhaseTimeline& src, std::shared_ptr<const SpanRealization> span,
                               const ServoConfig& servo, const FrequencyPlan& plan, const BeatNote& lo,
                               LoopFloors floors) {
  if (plan.f_3 > 0 || plan.f_4 > 0) throw std::invalid_argument("secondary link needs negative AOM shifts");
  if (lo.nominal_frequency * servo.beat_divider != Frequency(-2) * (plan.f_3 + plan.f_4) * servo.lo_divider)
    throw std::invalid_argument("secondary link: divided round-trip beat and divided LO do not meet at 0 Hz");
  return run_link(src, std::move(span), servo, plan.f_3, plan.f_4, -1, &lo, floors);
}

ExtractionSignals extract_midpoint(const CompensatedLink& link, double position_km) {
  if (!link.span) throw std::invalid_argument("extraction needs the link's span realization");
  const SpanRealization& span = *link.span;
  const SpanGrid& g = span.grid();
  const std::size_t m = g.boundary_index(position_km, span.span().length_km);
  const auto E = static_cast<std::ptrdiff_t>(g.boundaries[m]);
  const auto T = static_cast<std::ptrdiff_t>(g.delay);
  const auto sets = extraction_tap_sets(g, m);
  span.prefetch(sets);
  auto upstream = span.taps(sets[0]);
  auto downstream = span.taps(sets[1]);

  const auto& x = link.input.samples;
  const auto& c = link.correction.samples;
  const auto& far = link.output.samples;
  const std::size_t n = x.size();
  std::vector<double> fwd(n), bwd(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    fwd[i] = held(x, ii - E) + held(c, ii - E) + upstream[i];
    bwd[i] = held(far, ii - (T - E)) + downstream[i];
  }
  ExtractionSignals ex;
  const Frequency base = link.input.nominal_offset + link.input_shift;
  ex.forward = on_grid(link.input, std::move(fwd), base);
  ex.backward = on_grid(link.input, std::move(bwd), base + 2 * link.output_shift);
  ex.pd1_beat = beat(ex.backward, ex.forward);
  return ex;
}

LockResult regenerate(const ExtractionSignals& ex, const LaserDiode& ld, const FrequencyPlan& plan,
                      const BeatNote& lo, RegenerationFloors floors, const PhaseTimeline* free_running,
                      bool pd1_correction) {
  require_same_grid(ex.forward, ex.backward, "regenerate");
  if (lo.nominal_frequency != plan.lo_tone())
    throw std::invalid_argument("regenerate: LO tone " + format_frequency(lo.nominal_frequency) +
                                " Hz does not match the plan (" + format_frequency(plan.lo_tone()) + " Hz)");
  BeatNote half = divide(with_floor(ex.pd1_beat, floors.pd1), 2);
  PhaseTimeline reference = pd1_correction ? aom(ex.forward, half.nominal_frequency, &half.phase)
                                           : aom(ex.forward, half.nominal_frequency);
  return lock_laser(ld, reference, lo, free_running, floors.pd2);
}

ResidualPrediction predict_residual_psd(const FibreSpan& span, const std::vector<double>& freqs,
                                        const std::vector<double>& free_psd) {
  if (freqs.size() != free_psd.size()) throw std::invalid_argument("frequency and PSD lists differ in length");
  ResidualPrediction p;
  const double tau = span.tau();
  p.bandwidth_hz = tau > 0.0 ? 1.0 / (4.0 * tau) : std::numeric_limits<double>::infinity();
  p.freq_hz = freqs;
  p.psd.resize(freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (!(freqs[i] > 0.0)) throw std::invalid_argument("prediction frequencies must be positive");
    const double w = 2.0 * std::numbers::pi * freqs[i] * tau;
    p.psd[i] = std::min(1.0, w * w / 3.0) * free_psd[i];
  }
  return p;
}

std::map<std::string, Frequency> nominal_frequency_map(const FrequencyPlan& plan, const Topology& topology) {
  plan.validate();
  std::map<std::string, Frequency> m;
  const Frequency in(0);
  m["input"] = in;
  m["main.after_aom1"] = in + plan.f_1;
  m["out0"] = in + plan.f_1 + plan.f_2;
  m["main.round_trip"] = in + 2 * (plan.f_1 + plan.f_2);
  m["beat.main_round_trip"] = m["main.round_trip"] - m["input"];
  m["beat.out0_vs_input"] = m["out0"] - m["input"];
  if (topology.extraction) {
    m["ext.forward"] = plan.nu_plus();
    m["ext.backward"] = plan.nu_minus();
    m["beat.pd1"] = m["ext.backward"] - m["ext.forward"];
    m["beat.pd1_half"] = m["beat.pd1"] / Frequency(2);
    m["ext.reference"] = m["ext.forward"] + m["beat.pd1_half"];
    m["lo"] = plan.lo_tone();
    m["laser"] = plan.nu_ld();
    m["beat.pd2_lock"] = m["laser"] - m["ext.reference"] - m["lo"];
  }
  if (topology.extraction && topology.secondary) {
    m["sec.after_aom3"] = m["laser"] + plan.f_3;
    m["out1"] = m["laser"] + plan.f_3 + plan.f_4;
    m["sec.round_trip"] = m["laser"] + 2 * (plan.f_3 + plan.f_4);
    m["beat.secondary_round_trip"] = m["laser"] - m["sec.round_trip"];
    m["beat.secondary_error"] = m["beat.secondary_round_trip"] / Frequency(30) - m["lo"] / Frequency(15);
    m["beat.out1_vs_input"] = m["out1"] - m["input"];
    m["beat.out1_vs_out0"] = m["out1"] - m["out0"];
  }
  return m;
}

}  // namespace fibrenet

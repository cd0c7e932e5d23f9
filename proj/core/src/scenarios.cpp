#include "fibrenet/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <sstream>
#include <tuple>

#include <spdlog/spdlog.h>

#include "fibrenet/csv.hpp"
#include "fibrenet/errors.hpp"
#include "fibrenet/spectral_mixer.hpp"

namespace fibrenet {

std::size_t EngineSettings::samples() const {
  const double n = sample_rate * duration;
  const double r = std::round(n);
  if (std::abs(n - r) > 1e-6 * std::max(1.0, r))
    throw ConfigError("engine duration * sample_rate must be a whole number of samples");
  return static_cast<std::size_t>(r);
}

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::midpoint: return "midpoint";
    case ScenarioKind::input_extraction: return "input_extraction";
    case ScenarioKind::lo_sensitivity: return "lo_sensitivity";
    case ScenarioKind::arm_matching: return "arm_matching";
  }
  return "midpoint";
}

std::string to_string(EngineMode m) {
  switch (m) {
    case EngineMode::fast: return "fast";
    case EngineMode::slow: return "slow";
    case EngineMode::both: return "both";
  }
  return "both";
}

ScenarioKind scenario_kind_from(const std::string& s) {
  for (auto k : {ScenarioKind::midpoint, ScenarioKind::input_extraction, ScenarioKind::lo_sensitivity,
                 ScenarioKind::arm_matching})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown scenario kind '" + s + "' (expected midpoint, input_extraction, lo_sensitivity or arm_matching)");
}

EngineMode engine_mode_from(const std::string& s) {
  for (auto m : {EngineMode::fast, EngineMode::slow, EngineMode::both})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown engine '" + s + "' (expected fast, slow or both)");
}

void Scenario::validate() const {
  auto wrap = [](const std::string& where, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": " + e.what());
    }
  };
  plan.validate();
  wrap("main_span", [&] { main_span.validate(); });
  wrap("secondary_span", [&] { secondary_span.validate(); });
  for (auto [name, spec] : {std::pair<const char*, const NoiseSpec*>{"laser.free_running_noise", &laser_free},
                            {"noise.local_oscillator", &lo},
                            {"noise.upstream_feed", &upstream},
                            {"noise.detection_floor", &detection_floor},
                            {"noise.measurement_floor", &measurement_floor},
                            {"lo_sensitivity.test_noise", &lo_test_noise}})
    wrap(name, [&] { spec->validate(); });
  if (!(gate > 0.0)) throw ConfigError("scenario.gate_s must be positive");
  for (auto [name, e] : {std::pair<const char*, const EngineSettings*>{"fast", &fast}, {"slow", &slow}}) {
    if (!(e->sample_rate > 0.0) || !(e->duration > 0.0))
      throw ConfigError(std::string("engine.") + name + ": sample rate and duration must be positive");
    e->samples();
  }
  if ((engine == EngineMode::fast || engine == EngineMode::both) && fast.duration > 1e3)
    throw ConfigError("engine.fast.duration_s above 1000 s needs the slow engine");
  if (slow.sample_rate > fast.sample_rate) throw ConfigError("engine.slow.sample_rate_hz must not exceed the fast rate");
  const double per_gate = gate * slow.sample_rate;
  if (std::abs(per_gate - std::round(per_gate)) > 1e-9 || per_gate < 1.0)
    throw ConfigError("scenario.gate_s must span a whole number of slow-engine samples");
  if (!(extraction_km >= 0.0 && extraction_km <= main_span.length_km))
    throw ConfigError("extraction.position_km must lie on the main span");
  wrap("extraction.position_km", [&] {
    resolve_span_grid(main_span, fast.sample_rate).boundary_index(extraction_km, main_span.length_km);
  });
  wrap("engine.fast.sample_rate_hz", [&] {
    resolve_span_grid(main_span, fast.sample_rate);
    if (!attenuator) resolve_span_grid(secondary_span, fast.sample_rate);
  });
  for (auto [name, sv] : {std::pair<const char*, const LinkServoSettings*>{"servos.main", &main_servo},
                          {"servos.secondary", &secondary_servo}}) {
    if (sv->beat_divider < 1 || sv->lo_divider < 1) throw ConfigError(std::string(name) + ": dividers must be >= 1");
    if (!(sv->gain_scale >= 0.0) || !(sv->zero_ratio > 0.0) || !(sv->unity_gain_hz >= 0.0))
      throw ConfigError(std::string(name) + ": gains must be non-negative");
  }
  for (auto [name, span, sv] : {std::tuple<const char*, const FibreSpan*, const LinkServoSettings*>{
                                    "servos.main", &main_span, &main_servo},
                                {"servos.secondary", &secondary_span, &secondary_servo}}) {
    if (sv->unity_gain_hz > 0.0 && span->tau() > 0.0 && sv->unity_gain_hz > 1.0 / (4.0 * span->tau()))
      throw ConfigError(std::string(name) + ".unity_gain_hz exceeds the delay limit 1/(4 tau) = " +
                        format_number(1.0 / (4.0 * span->tau())) + " Hz");
  }
  if (!(laser_bandwidth_hz > 0.0)) throw ConfigError("laser.pll_bandwidth_hz must be positive");
  if (tracking_bandwidth_hz && !(*tracking_bandwidth_hz > 0.0))
    throw ConfigError("tracking.bandwidth_hz must be positive");
  if (!(poor_gain_scale > 0.0)) throw ConfigError("input_extraction.poor_gain_scale must be positive");
  if (!(thermal_coefficient >= 0.0)) throw ConfigError("arm_matching.thermal_coefficient_rad_per_k_m must be >= 0");
  if (!(temperature.diurnal_period > 0.0)) throw ConfigError("arm_matching.temperature.diurnal_period_s must be positive");
  for (double m : arm_mismatches_m)
    if (!(m >= 0.0)) throw ConfigError("arm_matching.mismatches_m entries must be >= 0");
  if (kind == ScenarioKind::input_extraction && (extraction_km != 0.0 || !attenuator))
    throw ConfigError("input_extraction needs extraction.position_km = 0 and extraction.attenuator = true");
  if (kind != ScenarioKind::input_extraction && attenuator)
    throw ConfigError(to_string(kind) + " needs the secondary link (extraction.attenuator = false)");
  nominal_frequency_map(plan, Topology{true, !attenuator});
}

const StabilityReport& ScenarioReport::stability_named(const std::string& name) const {
  for (const auto& r : stability)
    if (r.name == name) return r;
  throw std::out_of_range("no stability report named " + name);
}

const Psd& ScenarioReport::psd_named(const std::string& name) const {
  for (const auto& p : psds)
    if (p.name == name) return p.psd;
  throw std::out_of_range("no PSD named " + name);
}

namespace {

enum Stream : std::uint64_t {
  kMainSpan = 1,
  kSecondarySpan,
  kLaser,
  kLo,
  kUpstream,
  kFloorRoundTrip,
  kFloorPd1,
  kFloorPd2,
  kFloorSecondary,
  kMeasure0,
  kMeasure1,
};

}  // namespace

std::uint64_t element_seed(const Scenario& s, std::uint64_t stream, const NoiseSpec& spec) {
  return derive_seed(derive_seed(s.seed, stream), spec.rng_seed);
}

namespace {

NoiseSpec seeded(const Scenario& s, Stream st, const NoiseSpec& spec) {
  return spec.with_seed(element_seed(s, st, spec));
}

// One configuration of the network inside a scenario run.
struct Variant {
  bool main_enabled = true;
  double main_gain_scale = 1.0;
  bool secondary_enabled = true;
  NoiseSpec lo;
  bool floors = true;
};

Variant nominal(const Scenario& s) {
  Variant v;
  v.lo = s.lo;
  v.floors = s.floors_enabled;
  return v;
}

double carrier_hz(const Scenario& s) { return to_double(s.plan.nu_0); }

ServoConfig link_servo(const LinkServoSettings& set, const SpanGrid& g, double fs, bool enabled, double scale) {
  const double tau = static_cast<double>(g.delay) / fs;
  const double unity = set.unity_gain_hz > 0.0 ? set.unity_gain_hz : 0.15 / tau;
  ServoConfig cfg = design_link_servo(g.delay, fs, set.beat_divider, unity, set.zero_ratio);
  cfg.lo_divider = set.lo_divider;
  cfg.latency_samples = set.latency_samples;
  cfg.gain_scale = set.gain_scale * scale;
  cfg.enabled = set.enabled && enabled;
  return cfg;
}

ServoConfig laser_pll(const Scenario& s) {
  const double fs = s.fast.sample_rate;
  const double bw = std::min(s.laser_bandwidth_hz, fs / 25.0);
  if (bw < s.laser_bandwidth_hz)
    spdlog::debug("laser PLL bandwidth {} Hz clamped to {} Hz at a {} Hz loop rate", s.laser_bandwidth_hz, bw, fs);
  return design_pll(bw);
}

NoiseSpec floor_spec(const Scenario& s, const Variant& v, Stream st) {
  if (!v.floors) return NoiseSpec{};
  return seeded(s, st, s.detection_floor);
}

NetworkModel network_model(const Scenario& s, const Variant& v) {
  NetworkModel m;
  m.loop_rate = s.fast.sample_rate;
  m.plan = s.plan;
  m.main_span = s.main_span;
  m.main_span.noise = seeded(s, kMainSpan, s.main_span.noise);
  m.extraction_km = s.extraction_km;
  const SpanGrid g = resolve_span_grid(m.main_span, m.loop_rate);
  m.main_servo = link_servo(s.main_servo, g, m.loop_rate, v.main_enabled, v.main_gain_scale);
  if (!s.attenuator) {
    FibreSpan sec = s.secondary_span;
    sec.noise = seeded(s, kSecondarySpan, s.secondary_span.noise);
    const SpanGrid gs = resolve_span_grid(sec, m.loop_rate);
    m.secondary_servo = link_servo(s.secondary_servo, gs, m.loop_rate, v.secondary_enabled, 1.0);
    m.secondary_span = sec;
  }
  m.laser_pll = laser_pll(s);
  m.laser_free = seeded(s, kLaser, s.laser_free);
  m.lo = seeded(s, kLo, v.lo);
  m.floor_round_trip = floor_spec(s, v, kFloorRoundTrip);
  m.floor_pd1 = floor_spec(s, v, kFloorPd1);
  m.floor_pd2 = floor_spec(s, v, kFloorPd2);
  m.floor_secondary = floor_spec(s, v, kFloorSecondary);
  return m;
}

struct ChainOutput {
  BeatNote out0;  // Out0 against the input reference
  BeatNote out1;  // extraction output against the input reference
  std::map<std::string, Frequency> offsets;
};

ChainOutput slow_chain(const Scenario& s, const Variant& v) {
  SlowRun run = run_slow_engine(network_model(s, v), s.slow.samples(), s.slow.sample_rate);
  ChainOutput out;
  out.offsets["out0"] = run.out0.nominal_offset;
  out.offsets["out1"] = run.out1.nominal_offset;
  const Frequency off0 = run.out0.nominal_offset;
  const Frequency off1 = run.out1.nominal_offset;
  out.out0 = BeatNote(std::move(run.out0), off0);
  out.out1 = BeatNote(std::move(run.out1), off1);
  return out;
}

// Span realizations shared by every fast-engine variant of a scenario, so
// free and compensated runs see the same fibre noise.
struct FastSpans {
  std::shared_ptr<SpanRealization> main;
  std::shared_ptr<SpanRealization> secondary;
};

FastSpans fast_spans(const Scenario& s) {
  const std::size_t n = s.fast.samples();
  const double fs = s.fast.sample_rate;
  FastSpans r;
  FibreSpan main = s.main_span;
  main.noise = seeded(s, kMainSpan, s.main_span.noise);
  r.main = realize_span(main, n, fs);
  auto sets = link_tap_sets(r.main->grid());
  auto ext = extraction_tap_sets(r.main->grid(), r.main->grid().boundary_index(s.extraction_km, main.length_km));
  sets.insert(sets.end(), ext.begin(), ext.end());
  r.main->prefetch(sets);
  if (!s.attenuator) {
    FibreSpan sec = s.secondary_span;
    sec.noise = seeded(s, kSecondarySpan, s.secondary_span.noise);
    r.secondary = realize_span(sec, n, fs);
    r.secondary->prefetch(link_tap_sets(r.secondary->grid()));
  }
  return r;
}

ChainOutput fast_chain(const Scenario& s, const Variant& v, const FastSpans& spans) {
  const std::size_t n = s.fast.samples();
  const double fs = s.fast.sample_rate;
  const PhaseTimeline input = PhaseTimeline::zeros(n, fs);
  // Upstream feed: common to the reference and every measured node.
  std::optional<PhaseTimeline> upstream;
  if (!s.upstream.silent()) upstream = synth_power_law_noise(seeded(s, kUpstream, s.upstream), n, fs);
  auto end_to_end = [&](const PhaseTimeline& node) {
    if (!upstream) return beat(node, input);
    return beat(combine({{node, 1.0}, {*upstream, 1.0}}), combine({{input, 1.0}, {*upstream, 1.0}}));
  };
  ChainOutput out;
  out.offsets["input"] = input.nominal_offset;

  auto synth = [&](const NoiseSpec& spec) { return synth_power_law_noise(spec, n, fs); };
  std::optional<PhaseTimeline> fl_rt, fl_pd1, fl_pd2, fl_sec;
  if (v.floors && !s.detection_floor.silent()) {
    fl_rt = synth(floor_spec(s, v, kFloorRoundTrip));
    fl_pd1 = synth(floor_spec(s, v, kFloorPd1));
    fl_pd2 = synth(floor_spec(s, v, kFloorPd2));
    fl_sec = synth(floor_spec(s, v, kFloorSecondary));
  }
  const ServoConfig main_servo =
      link_servo(s.main_servo, spans.main->grid(), fs, v.main_enabled, v.main_gain_scale);

  ExtractionSignals ex;
  {
    CompensatedLink link = compensate(input, spans.main, main_servo, s.plan, {fl_rt ? &*fl_rt : nullptr});
    out.offsets["main.after_aom1"] = input.nominal_offset + link.input_shift;
    out.offsets["beat.main_round_trip"] = link.in_loop_beat.nominal_frequency;
    link.in_loop_beat = BeatNote();
    link.free_running_output = PhaseTimeline();
    out.out0 = end_to_end(link.output);
    out.offsets["out0"] = link.output.nominal_offset;
    out.offsets["beat.out0_vs_input"] = out.out0.nominal_frequency;
    ex = extract_midpoint(link, s.extraction_km);
  }
  out.offsets["ext.forward"] = ex.forward.nominal_offset;
  out.offsets["ext.backward"] = ex.backward.nominal_offset;
  out.offsets["beat.pd1"] = ex.pd1_beat.nominal_frequency;

  BeatNote lo(synth(seeded(s, kLo, v.lo)), s.plan.lo_tone());
  out.offsets["lo"] = lo.nominal_frequency;
  LaserDiode ld{seeded(s, kLaser, s.laser_free), laser_pll(s)};
  PhaseTimeline laser;
  {
    LockResult lock = regenerate(ex, ld, s.plan, lo, {fl_pd1 ? &*fl_pd1 : nullptr, fl_pd2 ? &*fl_pd2 : nullptr});
    ex = ExtractionSignals();
    laser = std::move(lock.output);
  }
  out.offsets["laser"] = laser.nominal_offset;
  if (spans.secondary) {
    const ServoConfig sec_servo = link_servo(s.secondary_servo, spans.secondary->grid(), fs, v.secondary_enabled, 1.0);
    CompensatedLink sec = secondary_link(laser, spans.secondary, sec_servo, s.plan, lo, {fl_sec ? &*fl_sec : nullptr});
    out.offsets["beat.secondary_round_trip"] = sec.in_loop_beat.nominal_frequency;
    out.offsets["sec.after_aom3"] = laser.nominal_offset + sec.input_shift;
    out.out1 = end_to_end(sec.output);
    out.offsets["out1"] = sec.output.nominal_offset;
  } else {
    out.out1 = end_to_end(laser);
    out.offsets["out1"] = laser.nominal_offset;
  }
  out.offsets["beat.out1_vs_input"] = out.out1.nominal_frequency;
  return out;
}

ChainOutput run_chain(const Scenario& s, const Variant& v, bool fast, const FastSpans* spans) {
  if (fast) return fast_chain(s, v, *spans);
  return slow_chain(s, v);
}

bool use_fast_for_stability(const Scenario& s) { return s.engine == EngineMode::fast; }

// Measurement floor of an end-to-end beat: stochastic part plus drift.
PhaseTimeline measurement_floor(const Scenario& s, Stream st, std::size_t n, double fs) {
  if (!s.floors_enabled) return PhaseTimeline::zeros(n, fs);
  return synth_power_law_noise(seeded(s, st, s.measurement_floor), n, fs);
}

BeatNote plus(const BeatNote& b, const PhaseTimeline& extra) { return with_floor(b, &extra); }

StabilityReport analyse(const Scenario& s, const std::string& name, const BeatNote& b) {
  std::optional<double> tracking = s.tracking_bandwidth_hz;
  if (tracking && *tracking >= b.phase.sample_rate / 2.0) tracking.reset();
  return analyse_beat(name, b, s.gate, carrier_hz(s), tracking);
}

std::size_t welch_segment(const PhaseTimeline& x, double seconds) {
  const auto len = static_cast<std::size_t>(std::llround(seconds * x.sample_rate));
  return std::min(len, x.size());
}

Psd link_psd(const PhaseTimeline& x, double segment_s) {
  return welch_psd(x, welch_segment(x, segment_s), 0.5, Detrend::linear);
}

double band(const Psd& p, double f, double rel = 0.1) { return band_mean(p, f * (1.0 - rel), f * (1.0 + rel)); }

void add_psd(ScenarioReport& r, const std::string& name, const Psd& p) { r.psds.push_back({name, log_bin(p, 20)}); }

// Largest factor between two MDEV curves over taus in [lo, hi].
double worst_ratio(const StabilityCurve& a, const StabilityCurve& b, double lo, double hi) {
  double worst = 0.0;
  for (std::size_t i = 0; i < b.taus.size(); ++i) {
    const double t = b.taus[i];
    if (t < lo * (1.0 - 1e-9) || t > hi * (1.0 + 1e-9)) continue;
    if (auto v = a.at(t)) {
      const double q = *v / b.values[i];
      worst = std::max(worst, std::max(q, 1.0 / q));
    }
  }
  return worst;
}

std::string sci(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

void summarize_stability(ScenarioReport& r, const StabilityReport& st) {
  std::ostringstream line;
  line << st.name << ": ";
  if (auto v = st.mdev.at(1.0)) line << "MDEV(1 s) = " << sci(*v) << ", ";
  if (auto v = st.mdev.at(1024.0)) line << "MDEV(1024 s) = " << sci(*v) << ", ";
  line << "mean offset = " << sci(st.mean_offset) << " +/- " << sci(st.offset_uncertainty)
       << ", cycle slips = " << st.slip_count;
  r.summary.push_back(line.str());
}

void fast_midpoint(const Scenario& s, ScenarioReport& r) {
  FastSpans spans = fast_spans(s);
  Variant free = nominal(s);
  free.main_enabled = false;
  free.secondary_enabled = false;
  Psd main_free, ext_free, main_comp, ext_comp;
  {
    ChainOutput c = fast_chain(s, free, spans);
    main_free = link_psd(c.out0.phase, 10.0);
    ext_free = link_psd(c.out1.phase, 10.0);
  }
  {
    ChainOutput c = fast_chain(s, nominal(s), spans);
    main_comp = link_psd(c.out0.phase, 10.0);
    ext_comp = link_psd(c.out1.phase, 10.0);
    for (auto& [k, v] : c.offsets) r.offsets[k] = v;
  }
  spans.main->release();
  if (spans.secondary) spans.secondary->release();

  add_psd(r, "main_free", main_free);
  add_psd(r, "main_comp", main_comp);
  add_psd(r, "ext_free", ext_free);
  add_psd(r, "ext_comp", ext_comp);

  const double tau = s.main_span.tau();
  const double fbw = 1.0 / (4.0 * tau);
  r.metrics["tau_s"] = tau;
  r.metrics["bandwidth_limit_hz"] = fbw;
  r.metrics["free_psd_1hz"] = band(main_free, 1.0, 0.05);
  r.metrics["free_psd_1khz"] = band(main_free, 1000.0, 0.05);

  const Psd comp_bins = log_bin(main_comp, 10);
  const Psd free_bins = log_bin(main_free, 10);
  double comp_max = 0.0;
  double suppression_end = 0.0;
  double bump_ratio = 0.0, bump_freq = 0.0;
  for (std::size_t i = 0; i < comp_bins.freq_hz.size(); ++i) {
    const double f = comp_bins.freq_hz[i];
    const double ratio = comp_bins.density[i] / free_bins.density[i];
    if (f >= 1.0 && f <= 50.0) comp_max = std::max(comp_max, comp_bins.density[i]);
    if (f >= 10.0 && suppression_end == 0.0 && ratio >= 1.0) suppression_end = f;
    if (f < 1000.0 && ratio > bump_ratio) {
      bump_ratio = ratio;
      bump_freq = f;
    }
  }
  r.metrics["comp_psd_max_1_50hz"] = comp_max;
  r.metrics["suppression_end_hz"] = suppression_end;
  r.metrics["bump_peak_ratio"] = bump_ratio;
  r.metrics["bump_peak_hz"] = bump_freq;
  for (double f : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    const double measured = band(main_comp, f) / band(main_free, f);
    const double w = 2.0 * std::numbers::pi * f * tau;
    const double predicted = w * w / 3.0;
    r.metrics["rejection_over_prediction_" + format_number(f) + "hz"] = measured / predicted;
  }

  std::ostringstream line;
  line << "fast engine: free PSD " << sci(r.metrics["free_psd_1hz"]) << " rad^2/Hz at 1 Hz, "
       << sci(r.metrics["free_psd_1khz"]) << " rad^2/Hz at 1 kHz; compensated max over 1-50 Hz "
       << sci(comp_max) << " rad^2/Hz; suppression ends near " << sci(suppression_end) << " Hz; bump x"
       << sci(bump_ratio) << " at " << sci(bump_freq) << " Hz (1/(4 tau) = " << sci(fbw) << " Hz)";
  r.summary.push_back(line.str());
  r.metrics["fast_main_comp_psd_0p1_1hz"] = band_mean(main_comp, 0.1, 1.0);
  r.psds.push_back({"main_comp_fast_raw", main_comp});
}

void slow_midpoint(const Scenario& s, ScenarioReport& r) {
  const std::size_t n = s.slow.samples();
  const double fs = s.slow.sample_rate;
  const PhaseTimeline m0 = measurement_floor(s, kMeasure0, n, fs);
  const PhaseTimeline m1 = measurement_floor(s, kMeasure1, n, fs);
  Variant free = nominal(s);
  free.main_enabled = false;
  free.secondary_enabled = false;
  {
    ChainOutput c = slow_chain(s, free);
    r.stability.push_back(analyse(s, "out0_free", plus(c.out0, m0)));
    r.stability.push_back(analyse(s, "out1_free", plus(c.out1, m1)));
  }
  {
    ChainOutput c = slow_chain(s, nominal(s));
    const Psd slow_comp = link_psd(c.out0.phase, 1000.0);
    add_psd(r, "main_comp_slow", slow_comp);
    r.metrics["slow_main_comp_psd_0p1_1hz"] = band_mean(slow_comp, 0.1, 1.0);
    r.stability.push_back(analyse(s, "out0", plus(c.out0, m0)));
    r.stability.push_back(analyse(s, "out1", plus(c.out1, m1)));
    for (auto& [k, v] : c.offsets) r.offsets.try_emplace(k, v);
  }
  r.stability.push_back(analyse(s, "floor_out0", BeatNote(m0, s.plan.f_1 + s.plan.f_2)));
  r.stability.push_back(analyse(s, "floor_out1", BeatNote(m1, s.plan.f_1 + s.plan.f_2)));

  const auto& o0 = r.stability_named("out0");
  const auto& o1 = r.stability_named("out1");
  r.metrics["out1_over_out0_worst"] = worst_ratio(o1.mdev, o0.mdev, 1.0, 1e4);
  if (auto v = o0.mdev.at(1.0)) r.metrics["out0_mdev_1s"] = *v;
  if (auto v = o1.mdev.at(1.0)) r.metrics["out1_mdev_1s"] = *v;
  for (const char* name : {"out0", "out1"}) {
    const auto& st = r.stability_named(name);
    double long_tau = 0.0;
    for (double t : st.mdev.taus)
      if (t <= 1e4 + 1e-9) long_tau = t;
    if (auto v = st.mdev.at(long_tau)) r.metrics[std::string(name) + "_mdev_long"] = *v;
    r.metrics[std::string(name) + "_mdev_long_tau_s"] = long_tau;
    r.metrics[std::string(name) + "_mean_offset"] = st.mean_offset;
    r.metrics[std::string(name) + "_offset_uncertainty"] = st.offset_uncertainty;
    r.metrics[std::string(name) + "_slips"] = static_cast<double>(st.slip_count);
  }
  for (const auto& st : r.stability) summarize_stability(r, st);
}

}  // namespace

ScenarioReport run_midpoint(const Scenario& s) {
  s.validate();
  ScenarioReport r;
  r.scenario = s.name;
  if (s.engine != EngineMode::slow) fast_midpoint(s, r);
  if (s.engine != EngineMode::fast) slow_midpoint(s, r);
  if (r.metrics.count("fast_main_comp_psd_0p1_1hz") && r.metrics.count("slow_main_comp_psd_0p1_1hz"))
    r.metrics["engine_ratio_0p1_1hz"] =
        r.metrics["fast_main_comp_psd_0p1_1hz"] / r.metrics["slow_main_comp_psd_0p1_1hz"];
  return r;
}

ScenarioReport run_input_extraction(const Scenario& s) {
  s.validate();
  ScenarioReport r;
  r.scenario = s.name;
  const bool fast = use_fast_for_stability(s);
  const EngineSettings& eng = fast ? s.fast : s.slow;
  const std::size_t n = eng.samples();
  FastSpans spans;
  if (fast) spans = fast_spans(s);

  struct Mode {
    const char* label;
    bool enabled;
    double scale;
    bool floors;
  };
  const Mode modes[] = {{"free", false, 1.0, s.floors_enabled},
                        {"poor", true, s.poor_gain_scale, s.floors_enabled},
                        {"optimal", true, 1.0, s.floors_enabled},
                        {"optimal_no_floors", true, 1.0, false}};
  Scenario quiet = s;
  quiet.floors_enabled = false;
  for (const Mode& m : modes) {
    const Scenario& sc = m.floors ? s : quiet;
    Variant v = nominal(sc);
    v.main_enabled = m.enabled;
    v.main_gain_scale = m.scale;
    ChainOutput c = run_chain(sc, v, fast, &spans);
    const PhaseTimeline m0 = measurement_floor(sc, kMeasure0, n, eng.sample_rate);
    const PhaseTimeline m1 = measurement_floor(sc, kMeasure1, n, eng.sample_rate);
    const std::string label = m.label;
    r.stability.push_back(analyse(sc, "main_" + label, plus(c.out0, m0)));
    r.stability.push_back(analyse(sc, "ext_" + label, plus(c.out1, m1)));
    const auto& main = r.stability[r.stability.size() - 2];
    const auto& ext = r.stability.back();
    const double F = f_factor(ext.mdev, main.mdev, s.gate);
    r.metrics["f_factor_" + label] = F;
    const double record = static_cast<double>(main.series.samples.size()) * s.gate;
    r.metrics["tracking_worst_" + label] = worst_ratio(ext.mdev, main.mdev, s.gate, record / 5.0);
    if (label == "optimal_no_floors") {
      r.summary.push_back("ideal-model F (floors disabled, optimal compensation, tau = 1 s): " + sci(F));
    } else {
      r.summary.push_back("F-factor " + label + " (tau = 1 s): " + sci(F));
    }
    for (auto& [k, val] : c.offsets) r.offsets.try_emplace(k, val);
  }
  for (const auto& st : r.stability) summarize_stability(r, st);
  return r;
}

ScenarioReport run_lo_sensitivity(const Scenario& s) {
  s.validate();
  ScenarioReport r;
  r.scenario = s.name;
  const bool fast = use_fast_for_stability(s);
  const EngineSettings& eng = fast ? s.fast : s.slow;
  const std::size_t n = eng.samples();
  FastSpans spans;
  if (fast) spans = fast_spans(s);
  const PhaseTimeline m1 = measurement_floor(s, kMeasure1, n, eng.sample_rate);

  struct Case {
    const char* label;
    bool lo_on;
    bool secondary;
  };
  const Case cases[] = {{"out1_lo_off", false, true},
                        {"out1_lo_on", true, true},
                        {"out1_lo_on_secondary_off", true, false},
                        {"out1_lo_off_secondary_off", false, false}};
  for (const Case& c : cases) {
    Variant v = nominal(s);
    v.lo = c.lo_on ? s.lo_test_noise : NoiseSpec{};
    v.secondary_enabled = c.secondary;
    ChainOutput out = run_chain(s, v, fast, &spans);
    r.stability.push_back(analyse(s, c.label, plus(out.out1, m1)));
  }
  const auto& off = r.stability_named("out1_lo_off");
  const auto& on = r.stability_named("out1_lo_on");
  const auto& ablated = r.stability_named("out1_lo_on_secondary_off");
  double worst_change = 0.0, min_degradation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < off.mdev.taus.size(); ++i) {
    const double t = off.mdev.taus[i];
    if (t < 1.0) continue;
    if (auto v = on.mdev.at(t)) worst_change = std::max(worst_change, std::abs(*v / off.mdev.values[i] - 1.0));
    if (auto v = ablated.mdev.at(t); v && t <= 1e4 + 1e-9)
      if (auto ref = on.mdev.at(t)) min_degradation = std::min(min_degradation, *v / *ref);
  }
  r.metrics["lo_toggle_worst_relative_change"] = worst_change;
  r.metrics["ablation_min_degradation"] = min_degradation;
  r.summary.push_back("LO noise toggle: worst relative change of Out1 MDEV for tau >= 1 s = " + sci(worst_change));
  r.summary.push_back("secondary servo disabled with LO noise: Out1 MDEV degraded by at least x" + sci(min_degradation));
  for (const auto& st : r.stability) summarize_stability(r, st);
  return r;
}

ScenarioReport run_arm_matching(const Scenario& s) {
  s.validate();
  ScenarioReport r;
  r.scenario = s.name;
  const bool fast = use_fast_for_stability(s);
  const EngineSettings& eng = fast ? s.fast : s.slow;
  const std::size_t n = eng.samples();
  const double fs = eng.sample_rate;
  FastSpans spans;
  if (fast) spans = fast_spans(s);
  const ChainOutput base = run_chain(s, nominal(s), fast, &spans);
  const PhaseTimeline m1 = measurement_floor(s, kMeasure1, n, fs);
  const BeatNote control_beat = plus(base.out1, m1);

  // Temperature seen by the interferometer arms; the optical path mismatch
  // enters pd1 and reaches Out1 through the divide-by-two correction.
  DriftSpec temp{s.temperature.linear_rate, s.temperature.diurnal_amplitude, s.temperature.diurnal_period};
  const std::vector<double> kelvin = drift_samples(temp, n, fs);

  const StabilityReport control = analyse(s, "out1_control", control_beat);
  r.stability.push_back(control);
  const double tau_floor = [&] {
    double t = 0.0;
    for (double x : control.mdev.taus)
      if (x <= 1e4 + 1e-9) t = x;
    return t;
  }();
  const double control_floor = control.mdev.at(tau_floor).value_or(0.0);
  r.metrics["floor_tau_s"] = tau_floor;
  r.metrics["control_floor"] = control_floor;
  for (double mm : s.arm_mismatches_m) {
    PhaseTimeline arm = PhaseTimeline::zeros(n, fs);
    const double k = 0.5 * s.thermal_coefficient * mm;
    for (std::size_t i = 0; i < n; ++i) arm.samples[i] = k * kelvin[i];
    const std::string tag = "out1_mismatch_" + format_number(mm) + "m";
    StabilityReport st = analyse(s, tag, plus(control_beat, arm));
    const double floor = st.mdev.at(tau_floor).value_or(0.0);
    r.metrics["floor_" + format_number(mm) + "m"] = floor;
    StabilityReport comp = analyse(s, tag + "_component", BeatNote(arm, control_beat.nominal_frequency));
    const double component = comp.mdev.at(tau_floor).value_or(0.0);
    r.metrics["component_" + format_number(mm) + "m"] = component;
    std::ostringstream line;
    line << "arm mismatch " << format_number(mm) << " m: Out1 MDEV(" << tau_floor << " s) = " << sci(floor)
         << " (control " << sci(control_floor) << "), mismatch component " << sci(component);
    r.summary.push_back(line.str());
    r.stability.push_back(std::move(st));
    r.stability.push_back(std::move(comp));
  }
  return r;
}

ScenarioReport run_scenario(const Scenario& s) {
  switch (s.kind) {
    case ScenarioKind::midpoint: return run_midpoint(s);
    case ScenarioKind::input_extraction: return run_input_extraction(s);
    case ScenarioKind::lo_sensitivity: return run_lo_sensitivity(s);
    case ScenarioKind::arm_matching: return run_arm_matching(s);
  }
  throw ConfigError("unknown scenario kind");
}

}  // namespace fibrenet

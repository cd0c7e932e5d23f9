#include <algorithm>

#include "fibrenet/errors.hpp"
#include "fibrenet/scenarios.hpp"

namespace fibrenet {

namespace {

NoiseSpec power_law(int exponent, double level) {
  NoiseSpec n;
  n.terms.push_back({exponent, level});
  return n;
}

Scenario common() {
  Scenario s;
  s.plan = FrequencyPlan::standard();
  s.main_span.noise = standard_fibre_noise();
  s.secondary_span.noise = standard_fibre_noise().scaled(0.5);
  s.upstream = standard_fibre_noise().scaled(0.86);
  s.laser_free = power_law(-2, 1e3);
  s.lo = NoiseSpec{};
  s.lo_test_noise = power_law(-2, 1.125e-6);
  s.detection_floor = white_phase(1e-8);
  s.measurement_floor = power_law(-2, kCalibratedFloorLevel);
  if (kCalibratedWhiteFloor > 0.0) s.measurement_floor.terms.push_back({0, kCalibratedWhiteFloor});
  s.measurement_floor.f_max = kMeasurementBandwidthHz;
  s.measurement_floor.drift = DriftSpec{0.0, 0.5, 86400.0};
  s.fast = {102'400.0, 100.0};
  s.slow = {10.0, 100'000.0};
  return s;
}

Scenario midpoint() {
  Scenario s = common();
  s.name = "paper-50km-midpoint";
  s.description = "50 km main link with extraction at 25 km and a 50 km secondary link: phase PSDs and Out0/Out1 stability";
  s.kind = ScenarioKind::midpoint;
  s.engine = EngineMode::both;
  return s;
}

Scenario section5() {
  Scenario s = common();
  s.name = "paper-section5-input";
  s.description = "extraction at the main link input, attenuator instead of the secondary link, free/poor/optimal main-link compensation";
  s.kind = ScenarioKind::input_extraction;
  s.engine = EngineMode::slow;
  s.extraction_km = 0.0;
  s.attenuator = true;
  return s;
}

Scenario lo_sensitivity() {
  Scenario s = common();
  s.name = "lo-sensitivity";
  s.description = "Out1 with and without LO phase noise, and with the secondary servo disabled";
  s.kind = ScenarioKind::lo_sensitivity;
  s.engine = EngineMode::slow;
  s.slow = {10.0, 20'000.0};
  return s;
}

Scenario arm_matching() {
  Scenario s = common();
  s.name = "arm-matching";
  s.description = "Out1 long-term floor against OC1-OC2 arm length mismatch under a diurnal temperature cycle";
  s.kind = ScenarioKind::arm_matching;
  s.engine = EngineMode::slow;
  return s;
}

}  // namespace

std::vector<PresetInfo> list_presets() {
  std::vector<PresetInfo> out;
  for (const Scenario& s : {midpoint(), section5(), lo_sensitivity(), arm_matching()})
    out.push_back({s.name, s.description});
  return out;
}

Scenario preset(const std::string& name) {
  if (name == "paper-50km-midpoint" || name == "paper-50km") return midpoint();
  if (name == "paper-section5-input") return section5();
  if (name == "lo-sensitivity") return lo_sensitivity();
  if (name == "arm-matching") return arm_matching();
  std::string known;
  for (const auto& p : list_presets()) known += (known.empty() ? "" : ", ") + p.name;
  throw ConfigError("unknown preset '" + name + "' (known: " + known + ", paper-50km)");
}

}  // namespace fibrenet

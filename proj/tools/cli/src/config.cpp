#include "fibrenet/cli/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fibrenet/csv.hpp"
#include "fibrenet/errors.hpp"

namespace fibrenet::cli {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError((path.empty() ? std::string("<root>") : path) + ": " + what);
}

void require_map(const YAML::Node& n, const std::string& path) {
  if (!n.IsMap()) fail(path, "expected a mapping");
}

void check_keys(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed) {
  require_map(n, path);
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!ok.count(key)) {
      std::string list;
      for (const auto& a : ok) list += (list.empty() ? "" : ", ") + a;
      fail(join(path, key), "unknown key (expected one of: " + list + ")");
    }
  }
}

template <class T>
T scalar(const YAML::Node& n, const std::string& path, const char* type) {
  if (!n.IsScalar()) fail(path, std::string("expected ") + type);
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(path, std::string("expected ") + type + ", got '" + n.Scalar() + "'");
  }
}

void read(const YAML::Node& m, const std::string& path, const char* key, double& v) {
  if (auto n = m[key]) v = scalar<double>(n, join(path, key), "a number");
}
void read(const YAML::Node& m, const std::string& path, const char* key, int& v) {
  if (auto n = m[key]) v = scalar<int>(n, join(path, key), "an integer");
}
void read(const YAML::Node& m, const std::string& path, const char* key, std::uint64_t& v) {
  if (auto n = m[key]) {
    const auto text = n.IsScalar() ? n.Scalar() : std::string();
    if (!text.empty() && text[0] == '-') fail(join(path, key), "expected a non-negative integer");
    v = scalar<std::uint64_t>(n, join(path, key), "a non-negative integer");
  }
}
void read(const YAML::Node& m, const std::string& path, const char* key, bool& v) {
  if (auto n = m[key]) v = scalar<bool>(n, join(path, key), "a boolean");
}
void read(const YAML::Node& m, const std::string& path, const char* key, std::string& v) {
  if (auto n = m[key]) v = scalar<std::string>(n, join(path, key), "a string");
}

Frequency frequency(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) fail(path, "expected an exact decimal frequency string");
  try {
    return parse_frequency(n.Scalar());
  } catch (const std::invalid_argument& e) {
    fail(path, std::string("expected an exact decimal frequency string: ") + e.what());
  }
}

void read(const YAML::Node& m, const std::string& path, const char* key, Frequency& v) {
  if (auto n = m[key]) v = frequency(n, join(path, key));
}

void read_drift(const YAML::Node& n, const std::string& path, std::optional<DriftSpec>& d) {
  if (n.IsNull()) {
    d.reset();
    return;
  }
  check_keys(n, path, {"linear_rate_rad_per_s", "diurnal_amplitude_rad", "diurnal_period_s"});
  DriftSpec v = d.value_or(DriftSpec{});
  read(n, path, "linear_rate_rad_per_s", v.linear_rate);
  read(n, path, "diurnal_amplitude_rad", v.diurnal_amplitude);
  read(n, path, "diurnal_period_s", v.diurnal_period);
  d = v;
}

void read_noise(const YAML::Node& n, const std::string& path, NoiseSpec& spec) {
  if (n.IsNull()) {
    spec = NoiseSpec{};
    return;
  }
  check_keys(n, path, {"terms", "f_min_hz", "f_max_hz", "seed", "drift"});
  if (auto t = n["terms"]) {
    const std::string tp = join(path, "terms");
    if (!t.IsSequence() && !t.IsNull()) fail(tp, "expected a sequence of {alpha, coefficient}");
    spec.terms.clear();
    if (t.IsSequence())
      for (std::size_t i = 0; i < t.size(); ++i) {
        const std::string ip = tp + "[" + std::to_string(i) + "]";
        check_keys(t[i], ip, {"alpha", "coefficient"});
        if (!t[i]["alpha"] || !t[i]["coefficient"]) fail(ip, "needs both alpha and coefficient");
        PowerLawTerm term;
        read(t[i], ip, "alpha", term.exponent);
        read(t[i], ip, "coefficient", term.coefficient);
        spec.terms.push_back(term);
      }
  }
  read(n, path, "f_min_hz", spec.f_min);
  read(n, path, "f_max_hz", spec.f_max);
  read(n, path, "seed", spec.rng_seed);
  if (auto d = n["drift"]) read_drift(d, join(path, "drift"), spec.drift);
}

void read_span(const YAML::Node& n, const std::string& path, FibreSpan& span) {
  check_keys(n, path, {"length_km", "group_index", "segments", "noise"});
  read(n, path, "length_km", span.length_km);
  read(n, path, "group_index", span.group_index);
  read(n, path, "segments", span.segments);
  if (auto x = n["noise"]) read_noise(x, join(path, "noise"), span.noise);
}

void read_engine(const YAML::Node& n, const std::string& path, EngineSettings& e) {
  check_keys(n, path, {"sample_rate_hz", "duration_s"});
  read(n, path, "sample_rate_hz", e.sample_rate);
  read(n, path, "duration_s", e.duration);
}

void read_servo(const YAML::Node& n, const std::string& path, LinkServoSettings& s) {
  check_keys(n, path, {"unity_gain_hz", "zero_ratio", "beat_divider", "lo_divider", "latency_samples",
                       "gain_scale", "enabled"});
  read(n, path, "unity_gain_hz", s.unity_gain_hz);
  read(n, path, "zero_ratio", s.zero_ratio);
  read(n, path, "beat_divider", s.beat_divider);
  read(n, path, "lo_divider", s.lo_divider);
  read(n, path, "latency_samples", s.latency_samples);
  read(n, path, "gain_scale", s.gain_scale);
  read(n, path, "enabled", s.enabled);
}

void read_plan(const YAML::Node& n, const std::string& path, FrequencyPlan& p) {
  check_keys(n, path, {"nu0_hz", "f1_hz", "f2_hz", "f3_hz", "f4_hz", "f_lo_hz", "main_sum_hz"});
  read(n, path, "nu0_hz", p.nu_0);
  read(n, path, "f1_hz", p.f_1);
  read(n, path, "f2_hz", p.f_2);
  read(n, path, "f4_hz", p.f_4);
  read(n, path, "f_lo_hz", p.f_lo);
  if (auto m = n["main_sum_hz"]) {
    if (m.IsNull()) p.main_sum_constraint.reset();
    else p.main_sum_constraint = frequency(m, join(path, "main_sum_hz"));
  }
  p.derive_f3();
  if (auto f3 = n["f3_hz"]) {
    const Frequency given = frequency(f3, join(path, "f3_hz"));
    if (given != p.f_3)
      fail(join(path, "f3_hz"), "f3 must equal f_LO - f4 = " + format_frequency(p.f_3) + " Hz, got " +
                                    format_frequency(given) + " Hz");
  }
}

void apply(const YAML::Node& doc, Scenario& s) {
  check_keys(doc, "", {"preset", "scenario", "engine", "plan", "main_span", "secondary_span", "extraction", "servos",
                       "laser", "tracking", "noise", "input_extraction", "lo_sensitivity", "arm_matching"});
  if (auto n = doc["scenario"]) {
    check_keys(n, "scenario", {"name", "description", "kind", "engine", "seed", "gate_s"});
    read(n, "scenario", "name", s.name);
    read(n, "scenario", "description", s.description);
    if (auto k = n["kind"]) {
      try {
        s.kind = scenario_kind_from(scalar<std::string>(k, "scenario.kind", "a string"));
      } catch (const ConfigError& e) {
        fail("scenario.kind", e.what());
      }
    }
    if (auto k = n["engine"]) {
      try {
        s.engine = engine_mode_from(scalar<std::string>(k, "scenario.engine", "a string"));
      } catch (const ConfigError& e) {
        fail("scenario.engine", e.what());
      }
    }
    read(n, "scenario", "seed", s.seed);
    read(n, "scenario", "gate_s", s.gate);
  }
  if (auto n = doc["engine"]) {
    check_keys(n, "engine", {"fast", "slow"});
    if (auto e = n["fast"]) read_engine(e, "engine.fast", s.fast);
    if (auto e = n["slow"]) read_engine(e, "engine.slow", s.slow);
  }
  if (auto n = doc["plan"]) read_plan(n, "plan", s.plan);
  if (auto n = doc["main_span"]) read_span(n, "main_span", s.main_span);
  if (auto n = doc["secondary_span"]) read_span(n, "secondary_span", s.secondary_span);
  if (auto n = doc["extraction"]) {
    check_keys(n, "extraction", {"position_km", "attenuator"});
    read(n, "extraction", "position_km", s.extraction_km);
    read(n, "extraction", "attenuator", s.attenuator);
  }
  if (auto n = doc["servos"]) {
    check_keys(n, "servos", {"main", "secondary"});
    if (auto x = n["main"]) read_servo(x, "servos.main", s.main_servo);
    if (auto x = n["secondary"]) read_servo(x, "servos.secondary", s.secondary_servo);
  }
  if (auto n = doc["laser"]) {
    check_keys(n, "laser", {"pll_bandwidth_hz", "free_running_noise"});
    read(n, "laser", "pll_bandwidth_hz", s.laser_bandwidth_hz);
    if (auto x = n["free_running_noise"]) read_noise(x, "laser.free_running_noise", s.laser_free);
  }
  if (auto n = doc["tracking"]) {
    check_keys(n, "tracking", {"bandwidth_hz"});
    if (auto b = n["bandwidth_hz"]) {
      if (b.IsNull()) s.tracking_bandwidth_hz.reset();
      else s.tracking_bandwidth_hz = scalar<double>(b, "tracking.bandwidth_hz", "a number or null");
    }
  }
  if (auto n = doc["noise"]) {
    check_keys(n, "noise", {"local_oscillator", "upstream_feed", "detection_floor", "measurement_floor", "floors_enabled"});
    if (auto x = n["local_oscillator"]) read_noise(x, "noise.local_oscillator", s.lo);
    if (auto x = n["upstream_feed"]) read_noise(x, "noise.upstream_feed", s.upstream);
    if (auto x = n["detection_floor"]) read_noise(x, "noise.detection_floor", s.detection_floor);
    if (auto x = n["measurement_floor"]) read_noise(x, "noise.measurement_floor", s.measurement_floor);
    read(n, "noise", "floors_enabled", s.floors_enabled);
  }
  if (auto n = doc["input_extraction"]) {
    check_keys(n, "input_extraction", {"poor_gain_scale"});
    read(n, "input_extraction", "poor_gain_scale", s.poor_gain_scale);
  }
  if (auto n = doc["lo_sensitivity"]) {
    check_keys(n, "lo_sensitivity", {"test_noise"});
    if (auto x = n["test_noise"]) read_noise(x, "lo_sensitivity.test_noise", s.lo_test_noise);
  }
  if (auto n = doc["arm_matching"]) {
    check_keys(n, "arm_matching", {"mismatches_m", "thermal_coefficient_rad_per_k_m", "temperature"});
    if (auto m = n["mismatches_m"]) {
      if (!m.IsSequence()) fail("arm_matching.mismatches_m", "expected a sequence of numbers");
      s.arm_mismatches_m.clear();
      for (std::size_t i = 0; i < m.size(); ++i)
        s.arm_mismatches_m.push_back(
            scalar<double>(m[i], "arm_matching.mismatches_m[" + std::to_string(i) + "]", "a number"));
    }
    read(n, "arm_matching", "thermal_coefficient_rad_per_k_m", s.thermal_coefficient);
    if (auto t = n["temperature"]) {
      const std::string tp = "arm_matching.temperature";
      check_keys(t, tp, {"linear_rate_k_per_s", "diurnal_amplitude_k", "diurnal_period_s"});
      read(t, tp, "linear_rate_k_per_s", s.temperature.linear_rate);
      read(t, tp, "diurnal_amplitude_k", s.temperature.diurnal_amplitude);
      read(t, tp, "diurnal_period_s", s.temperature.diurnal_period);
    }
  }
}

// Emitter helpers: numbers as shortest round-trip text, frequencies exact.
void num(YAML::Emitter& e, const char* key, double v) { e << YAML::Key << key << YAML::Value << format_number(v); }
void freq(YAML::Emitter& e, const char* key, const Frequency& f) {
  e << YAML::Key << key << YAML::Value << YAML::DoubleQuoted << format_frequency(f);
}

void emit_noise(YAML::Emitter& e, const char* key, const NoiseSpec& n) {
  e << YAML::Key << key << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "terms" << YAML::Value << YAML::BeginSeq;
  for (const auto& t : n.terms) {
    e << YAML::Flow << YAML::BeginMap << YAML::Key << "alpha" << YAML::Value << t.exponent;
    num(e, "coefficient", t.coefficient);
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
  num(e, "f_min_hz", n.f_min);
  num(e, "f_max_hz", n.f_max);
  e << YAML::Key << "seed" << YAML::Value << n.rng_seed;
  e << YAML::Key << "drift" << YAML::Value;
  if (!n.drift) {
    e << YAML::Null;
  } else {
    e << YAML::BeginMap;
    num(e, "linear_rate_rad_per_s", n.drift->linear_rate);
    num(e, "diurnal_amplitude_rad", n.drift->diurnal_amplitude);
    num(e, "diurnal_period_s", n.drift->diurnal_period);
    e << YAML::EndMap;
  }
  e << YAML::EndMap;
}

void emit_span(YAML::Emitter& e, const char* key, const FibreSpan& s) {
  e << YAML::Key << key << YAML::Value << YAML::BeginMap;
  num(e, "length_km", s.length_km);
  num(e, "group_index", s.group_index);
  e << YAML::Key << "segments" << YAML::Value << s.segments;
  emit_noise(e, "noise", s.noise);
  e << YAML::EndMap;
}

void emit_engine(YAML::Emitter& e, const char* key, const EngineSettings& s) {
  e << YAML::Key << key << YAML::Value << YAML::BeginMap;
  num(e, "sample_rate_hz", s.sample_rate);
  num(e, "duration_s", s.duration);
  e << YAML::EndMap;
}

void emit_servo(YAML::Emitter& e, const char* key, const LinkServoSettings& s) {
  e << YAML::Key << key << YAML::Value << YAML::BeginMap;
  num(e, "unity_gain_hz", s.unity_gain_hz);
  num(e, "zero_ratio", s.zero_ratio);
  e << YAML::Key << "beat_divider" << YAML::Value << s.beat_divider;
  e << YAML::Key << "lo_divider" << YAML::Value << s.lo_divider;
  e << YAML::Key << "latency_samples" << YAML::Value << static_cast<std::uint64_t>(s.latency_samples);
  num(e, "gain_scale", s.gain_scale);
  e << YAML::Key << "enabled" << YAML::Value << s.enabled;
  e << YAML::EndMap;
}

}  // namespace

Scenario parse_config(const std::string& text, const std::optional<std::string>& preset_override) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed document: ") + e.what());
  }
  if (doc.IsNull()) doc = YAML::Node(YAML::NodeType::Map);
  require_map(doc, "");
  std::optional<std::string> base = preset_override;
  if (!base)
    if (auto p = doc["preset"]) base = scalar<std::string>(p, "preset", "a preset name");
  Scenario s = base ? preset(*base) : Scenario{};
  apply(doc, s);
  s.validate();
  return s;
}

Scenario load_config(const std::string& path, const std::optional<std::string>& preset_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), preset_override);
}

std::string serialize_config(const Scenario& s) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << s.name;
  e << YAML::Key << "description" << YAML::Value << YAML::DoubleQuoted << s.description;
  e << YAML::Key << "kind" << YAML::Value << to_string(s.kind);
  e << YAML::Key << "engine" << YAML::Value << to_string(s.engine);
  e << YAML::Key << "seed" << YAML::Value << s.seed;
  num(e, "gate_s", s.gate);
  e << YAML::EndMap;

  e << YAML::Key << "engine" << YAML::Value << YAML::BeginMap;
  emit_engine(e, "fast", s.fast);
  emit_engine(e, "slow", s.slow);
  e << YAML::EndMap;

  e << YAML::Key << "plan" << YAML::Value << YAML::BeginMap;
  freq(e, "nu0_hz", s.plan.nu_0);
  freq(e, "f1_hz", s.plan.f_1);
  freq(e, "f2_hz", s.plan.f_2);
  freq(e, "f3_hz", s.plan.f_3);
  freq(e, "f4_hz", s.plan.f_4);
  freq(e, "f_lo_hz", s.plan.f_lo);
  if (s.plan.main_sum_constraint) freq(e, "main_sum_hz", *s.plan.main_sum_constraint);
  else e << YAML::Key << "main_sum_hz" << YAML::Value << YAML::Null;
  e << YAML::EndMap;

  emit_span(e, "main_span", s.main_span);
  emit_span(e, "secondary_span", s.secondary_span);

  e << YAML::Key << "extraction" << YAML::Value << YAML::BeginMap;
  num(e, "position_km", s.extraction_km);
  e << YAML::Key << "attenuator" << YAML::Value << s.attenuator;
  e << YAML::EndMap;

  e << YAML::Key << "servos" << YAML::Value << YAML::BeginMap;
  emit_servo(e, "main", s.main_servo);
  emit_servo(e, "secondary", s.secondary_servo);
  e << YAML::EndMap;

  e << YAML::Key << "laser" << YAML::Value << YAML::BeginMap;
  num(e, "pll_bandwidth_hz", s.laser_bandwidth_hz);
  emit_noise(e, "free_running_noise", s.laser_free);
  e << YAML::EndMap;

  e << YAML::Key << "tracking" << YAML::Value << YAML::BeginMap;
  if (s.tracking_bandwidth_hz) num(e, "bandwidth_hz", *s.tracking_bandwidth_hz);
  else e << YAML::Key << "bandwidth_hz" << YAML::Value << YAML::Null;
  e << YAML::EndMap;

  e << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
  emit_noise(e, "local_oscillator", s.lo);
  emit_noise(e, "upstream_feed", s.upstream);
  emit_noise(e, "detection_floor", s.detection_floor);
  emit_noise(e, "measurement_floor", s.measurement_floor);
  e << YAML::Key << "floors_enabled" << YAML::Value << s.floors_enabled;
  e << YAML::EndMap;

  e << YAML::Key << "input_extraction" << YAML::Value << YAML::BeginMap;
  num(e, "poor_gain_scale", s.poor_gain_scale);
  e << YAML::EndMap;

  e << YAML::Key << "lo_sensitivity" << YAML::Value << YAML::BeginMap;
  emit_noise(e, "test_noise", s.lo_test_noise);
  e << YAML::EndMap;

  e << YAML::Key << "arm_matching" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "mismatches_m" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (double m : s.arm_mismatches_m) e << format_number(m);
  e << YAML::EndSeq;
  num(e, "thermal_coefficient_rad_per_k_m", s.thermal_coefficient);
  e << YAML::Key << "temperature" << YAML::Value << YAML::BeginMap;
  num(e, "linear_rate_k_per_s", s.temperature.linear_rate);
  num(e, "diurnal_amplitude_k", s.temperature.diurnal_amplitude);
  num(e, "diurnal_period_s", s.temperature.diurnal_period);
  e << YAML::EndMap;
  e << YAML::EndMap;

  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace fibrenet::cli

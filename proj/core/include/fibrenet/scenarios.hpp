#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fibrenet/links.hpp"
#include "fibrenet/metrology.hpp"
#include "fibrenet/slow_engine.hpp"

namespace fibrenet {

enum class ScenarioKind { midpoint, input_extraction, lo_sensitivity, arm_matching };
enum class EngineMode { fast, slow, both };

struct EngineSettings {
  double sample_rate = 1.0;  // Hz
  double duration = 1.0;     // s
  std::size_t samples() const;
  bool operator==(const EngineSettings&) const = default;
};

struct LinkServoSettings {
  double unity_gain_hz = 0.0;  // 0: 0.15 / tau
  double zero_ratio = 10.0;
  int beat_divider = 2;
  int lo_divider = 1;
  std::size_t latency_samples = 0;
  double gain_scale = 1.0;
  bool enabled = true;
  bool operator==(const LinkServoSettings&) const = default;
};

struct TemperatureProcess {
  double linear_rate = 0.0;         // K/s
  double diurnal_amplitude = 0.1;   // K
  double diurnal_period = 86400.0;  // s
  bool operator==(const TemperatureProcess&) const = default;
};

struct Scenario {
  std::string name = "custom";
  std::string description;
  ScenarioKind kind = ScenarioKind::midpoint;
  EngineMode engine = EngineMode::both;
  std::uint64_t seed = 1;
  double gate = 1.0;
  EngineSettings fast{102'400.0, 100.0};
  EngineSettings slow{10.0, 100'000.0};

  FrequencyPlan plan = FrequencyPlan::standard();
  FibreSpan main_span;
  FibreSpan secondary_span;
  double extraction_km = 25.0;
  bool attenuator = false;

  LinkServoSettings main_servo;
  LinkServoSettings secondary_servo{0.0, 10.0, 30, 15, 0, 1.0, true};
  double laser_bandwidth_hz = 100'000.0;
  NoiseSpec laser_free;
  NoiseSpec lo;
  NoiseSpec upstream;
  NoiseSpec detection_floor;
  NoiseSpec measurement_floor;
  bool floors_enabled = true;
  std::optional<double> tracking_bandwidth_hz = 100'000.0;

  double poor_gain_scale = 0.02;
  NoiseSpec lo_test_noise;
  std::vector<double> arm_mismatches_m{0.0, 0.1, 1.0, 10.0};
  TemperatureProcess temperature;
  double thermal_coefficient = 40.7;  // rad / (K m)

  /// Throws ConfigError for inconsistent or unsupported settings.
  void validate() const;
  bool operator==(const Scenario&) const = default;
};

std::string to_string(ScenarioKind k);
std::string to_string(EngineMode m);
ScenarioKind scenario_kind_from(const std::string& s);
EngineMode engine_mode_from(const std::string& s);

struct PresetInfo {
  std::string name;
  std::string description;
};

std::vector<PresetInfo> list_presets();
/// Accepts the preset names and the alias "paper-50km". Throws ConfigError.
Scenario preset(const std::string& name);

/// Measurement-floor levels frozen into the presets (rad^2 Hz and rad^2/Hz).
inline constexpr double kCalibratedFloorLevel = 1.68582e-06;
inline constexpr double kCalibratedWhiteFloor = 8.19154e-06;
/// Measurement bandwidth of the end-to-end beats.
inline constexpr double kMeasurementBandwidthHz = 5.0;

struct FloorTargets {
  double long_mdev = 4e-20;  // floor-only MDEV at long_tau
  double long_tau = 1e4;
  double out0_mdev_1s = 6e-18;  // Out0 MDEV at 1 s, link residual included
  int realizations = 8;
};

struct FloorCalibration {
  double random_walk_level = 0.0;  // b_-2 of the measurement floor
  double white_level = 0.0;        // b_0 of the measurement floor
  double link_mdev_1s = 0.0;       // Out0 MDEV at 1 s without any floor
  double achieved_long = 0.0;      // ensemble RMS floor MDEV at long_tau
  double achieved_out0_1s = 0.0;
};

/// Bisects the two measurement-floor levels (ensemble RMS over seeds)
/// against the long-term floor and the 1 s Out0 value of the midpoint run.
FloorCalibration calibrate_floors(const Scenario& s, const FloorTargets& t = {});

struct NamedPsd {
  std::string name;
  Psd psd;
};

struct ScenarioReport {
  std::string scenario;
  std::vector<NamedPsd> psds;
  std::vector<StabilityReport> stability;
  std::vector<std::string> summary;
  std::map<std::string, double> metrics;
  std::map<std::string, Frequency> offsets;

  const StabilityReport& stability_named(const std::string& name) const;
  const Psd& psd_named(const std::string& name) const;
};

/// Seed actually used for element `stream` of a scenario.
std::uint64_t element_seed(const Scenario& s, std::uint64_t stream, const NoiseSpec& spec);

ScenarioReport run_midpoint(const Scenario& s);
ScenarioReport run_input_extraction(const Scenario& s);
ScenarioReport run_lo_sensitivity(const Scenario& s);
ScenarioReport run_arm_matching(const Scenario& s);
ScenarioReport run_scenario(const Scenario& s);

}  // namespace fibrenet

#include <gtest/gtest.h>

#include "fibrenet/csv.hpp"
#include "fibrenet/errors.hpp"
#include "fibrenet/scenarios.hpp"

using namespace fibrenet;

namespace {

Scenario short_fast_midpoint() {
  Scenario s = preset("paper-50km-midpoint");
  s.engine = EngineMode::fast;
  s.fast.duration = 12.0;
  return s;
}

Scenario silent(Scenario s) {
  s.main_span.noise = s.secondary_span.noise = NoiseSpec{};
  s.upstream = s.laser_free = s.lo = s.detection_floor = s.measurement_floor = NoiseSpec{};
  s.floors_enabled = false;
  return s;
}

}  // namespace

TEST(Presets, AllValidateAndAliasResolves) {
  const auto list = list_presets();
  ASSERT_EQ(list.size(), 4u);
  for (const auto& p : list) {
    const Scenario s = preset(p.name);
    EXPECT_EQ(s.name, p.name);
    EXPECT_NO_THROW(s.validate()) << p.name;
  }
  EXPECT_EQ(preset("paper-50km"), preset("paper-50km-midpoint"));
  EXPECT_THROW(preset("nope"), ConfigError);
}

TEST(Presets, ValidationNamesTheOffendingField) {
  Scenario s = preset("paper-50km-midpoint");
  s.main_servo.unity_gain_hz = 5000.0;
  try {
    s.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("unity_gain_hz"), std::string::npos);
  }
  s = preset("paper-50km-midpoint");
  s.fast.duration = 2000.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = preset("paper-50km-midpoint");
  s.attenuator = true;
  EXPECT_THROW(s.validate(), ConfigError);
  s = preset("paper-50km-midpoint");
  s.plan.f_1 = Frequency(50'000'000);
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Scenarios, SimulatedOffsetsMatchNominalMap) {
  const Scenario s = short_fast_midpoint();
  const auto r = run_midpoint(s);
  const auto m = nominal_frequency_map(s.plan);
  ASSERT_GT(r.offsets.size(), 8u);
  for (const auto& [k, v] : r.offsets) {
    ASSERT_TRUE(m.count(k)) << k;
    EXPECT_EQ(v, m.at(k)) << k;
  }
  EXPECT_EQ(r.offsets.at("out1"), r.offsets.at("out0"));
  EXPECT_EQ(r.offsets.at("beat.out0_vs_input"), Frequency(75'000'000));
  EXPECT_EQ(r.offsets.at("beat.out1_vs_input"), Frequency(75'000'000));

  Scenario slow = preset("paper-50km-midpoint");
  slow.engine = EngineMode::slow;
  slow.slow.duration = 2000.0;
  const auto rs = run_midpoint(slow);
  EXPECT_EQ(rs.offsets.at("out0"), m.at("out0"));
  EXPECT_EQ(rs.offsets.at("out1"), m.at("out1"));
}

TEST(Scenarios, SilentNetworkHasNoInstability) {
  Scenario s = silent(preset("paper-50km-midpoint"));
  s.engine = EngineMode::slow;
  s.slow.duration = 5000.0;
  const auto r = run_midpoint(s);
  for (const char* name : {"out0", "out1"}) {
    const auto& st = r.stability_named(name);
    for (double v : st.mdev.values) EXPECT_LT(v, 1e-21) << name;
    EXPECT_EQ(st.slip_count, 0u);
  }
}

TEST(Scenarios, UpstreamNoiseCancels) {
  Scenario a = short_fast_midpoint();
  a.upstream = NoiseSpec{};
  const Scenario b = short_fast_midpoint();
  const auto ra = run_midpoint(a);
  const auto rb = run_midpoint(b);
  const double x = ra.metrics.at("fast_main_comp_psd_0p1_1hz");
  const double y = rb.metrics.at("fast_main_comp_psd_0p1_1hz");
  EXPECT_NEAR(y / x, 1.0, 1e-6);
}

TEST(Scenarios, LoNoiseDoesNotReachOut1) {
  Scenario s = preset("lo-sensitivity");
  s.slow.duration = 5000.0;
  const auto r = run_lo_sensitivity(s);
  EXPECT_LT(r.metrics.at("lo_toggle_worst_relative_change"), 0.01);
  EXPECT_GT(r.metrics.at("ablation_min_degradation"), 10.0);
}

TEST(Scenarios, ArmMismatchComponentIsLinearAndFloorMonotonic) {
  Scenario s = preset("arm-matching");
  s.slow.duration = 31'000.0;
  const auto r = run_arm_matching(s);
  const auto& m = r.metrics;
  EXPECT_EQ(m.at("floor_tau_s"), 10000.0);
  double prev = 0.0;
  for (double mm : s.arm_mismatches_m) {
    const double f = m.at("floor_" + format_number(mm) + "m");
    EXPECT_GE(f, prev * (1.0 - 1e-9)) << mm;
    prev = f;
  }
  EXPECT_NEAR(m.at("floor_0m") / m.at("control_floor"), 1.0, 0.05);
  EXPECT_EQ(m.at("component_0m"), 0.0);
  EXPECT_NEAR(m.at("component_10m") / m.at("component_1m"), 10.0, 1e-6);
  EXPECT_NEAR(m.at("component_1m") / m.at("component_0.1m"), 10.0, 1e-6);
}

TEST(Scenarios, InputExtractionOrdersTheModes) {
  Scenario s = preset("paper-section5-input");
  s.slow.duration = 10'000.0;
  const auto r = run_input_extraction(s);
  EXPECT_NEAR(r.metrics.at("f_factor_free"), 1.0, 0.05);
  EXPECT_LT(r.metrics.at("f_factor_optimal"), r.metrics.at("f_factor_free"));
  EXPECT_LT(r.metrics.at("f_factor_optimal_no_floors"), 0.01);
  int lines = 0;
  for (const auto& l : r.summary) lines += l.rfind("F-factor", 0) == 0;
  EXPECT_EQ(lines, 3);
}

TEST(Scenarios, SameSeedSameResult) {
  Scenario s = preset("paper-section5-input");
  s.slow.duration = 5000.0;
  const auto a = run_input_extraction(s);
  const auto b = run_input_extraction(s);
  EXPECT_EQ(a.metrics, b.metrics);
  s.seed = 2;
  const auto c = run_input_extraction(s);
  EXPECT_NE(a.metrics.at("f_factor_poor"), c.metrics.at("f_factor_poor"));
}

TEST(Scenarios, ElementSeedsAreDistinctPerStream) {
  const Scenario s = preset("paper-50km-midpoint");
  const NoiseSpec spec;
  EXPECT_NE(element_seed(s, 1, spec), element_seed(s, 2, spec));
  Scenario t = s;
  t.seed = 9;
  EXPECT_NE(element_seed(s, 1, spec), element_seed(t, 1, spec));
}

#include <gtest/gtest.h>

#include <string>

#include "fibrenet/cli/config.hpp"
#include "fibrenet/errors.hpp"

using namespace fibrenet;
using fibrenet::cli::parse_config;
using fibrenet::cli::serialize_config;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, PresetsRoundTrip) {
  for (const auto& p : list_presets()) {
    const Scenario s = preset(p.name);
    EXPECT_EQ(parse_config(serialize_config(s)), s) << p.name;
  }
}

TEST(Config, MutatedScenarioRoundTrips) {
  Scenario s = preset("arm-matching");
  s.seed = 123456789012345ull;
  s.gate = 2.0;
  s.main_span.length_km = 40.0;
  s.main_span.noise.terms.push_back({-3, 0.1234567890123});
  s.main_span.noise.rng_seed = 77;
  s.lo.drift = DriftSpec{1e-5, 0.25, 3600.0};
  s.tracking_bandwidth_hz.reset();
  s.plan.f_4 = Frequency(-30'000'000);
  s.plan.derive_f3();
  s.main_servo.latency_samples = 3;
  s.secondary_servo.enabled = false;
  s.arm_mismatches_m = {0.0, 0.3};
  s.temperature.linear_rate = 1e-6;
  const std::string text = serialize_config(s);
  EXPECT_EQ(parse_config(text), s);
  EXPECT_EQ(serialize_config(parse_config(text)), text);
}

TEST(Config, EmptyDocumentWithPresetOverride) {
  EXPECT_EQ(parse_config("", std::string("paper-50km")), preset("paper-50km-midpoint"));
  EXPECT_EQ(parse_config("preset: lo-sensitivity\n"), preset("lo-sensitivity"));
  EXPECT_EQ(parse_config("preset: lo-sensitivity\n", std::string("arm-matching")), preset("arm-matching"));
}

TEST(Config, OverridesApplyOnTopOfPreset) {
  const Scenario s = parse_config(
      "preset: paper-50km\n"
      "scenario: {seed: 42, engine: slow}\n"
      "engine: {slow: {duration_s: 5000}}\n"
      "tracking: {bandwidth_hz: null}\n");
  EXPECT_EQ(s.seed, 42u);
  EXPECT_EQ(s.engine, EngineMode::slow);
  EXPECT_EQ(s.slow.duration, 5000.0);
  EXPECT_EQ(s.slow.sample_rate, 10.0);
  EXPECT_FALSE(s.tracking_bandwidth_hz.has_value());
}

TEST(Config, SecondaryShiftIsDerived) {
  const Scenario s = parse_config("preset: paper-50km\nplan: {f4_hz: \"-30000000\"}\n");
  EXPECT_EQ(s.plan.f_3, Frequency(-45'000'000));
  EXPECT_NO_THROW(parse_config("preset: paper-50km\nplan: {f3_hz: \"-45000000\", f4_hz: \"-30000000\"}\n"));
  EXPECT_NE(error_of("preset: paper-50km\nplan: {f3_hz: \"-40000000\", f4_hz: \"-30000000\"}\n").find("f3 must equal"),
            std::string::npos);
}

TEST(Config, FrequenciesStayExact) {
  const Scenario s = parse_config("preset: paper-50km\nplan: {nu0_hz: \"194400000000000.125\"}\n");
  EXPECT_EQ(s.plan.nu_0, parse_frequency("194400000000000.125"));
  EXPECT_NE(error_of("plan: {f1_hz: \"40MHz\"}\n").find("plan.f1_hz"), std::string::npos);
}

TEST(Config, BrokenConstraintIsReported) {
  const auto msg = error_of("preset: paper-50km\nplan: {f1_hz: \"50000000\"}\n");
  EXPECT_NE(msg.find("f1 + f2 = 75000000"), std::string::npos) << msg;
}

TEST(Config, UnknownKeysAreRejectedWithTheirPath) {
  const auto msg = error_of("preset: paper-50km\nmain_span: {lenght_km: 40}\n");
  EXPECT_NE(msg.find("main_span.lenght_km"), std::string::npos) << msg;
  EXPECT_NE(msg.find("length_km"), std::string::npos) << msg;
  EXPECT_NE(error_of("bogus: 1\n").find("bogus"), std::string::npos);
  EXPECT_NE(error_of("noise: {local_oscillator: {terms: [{alpha: -2, coef: 1}]}}\n")
                .find("noise.local_oscillator.terms[0].coef"),
            std::string::npos);
}

TEST(Config, TypeErrorsNameTheField) {
  EXPECT_NE(error_of("scenario: {seed: -3}\n").find("scenario.seed"), std::string::npos);
  EXPECT_NE(error_of("main_span: {length_km: far}\n").find("main_span.length_km"), std::string::npos);
  EXPECT_NE(error_of("scenario: {engine: warp}\n").find("scenario.engine"), std::string::npos);
  EXPECT_NE(error_of("preset: paper-50km\nlaser: {free_running_noise: {terms: [{alpha: 2, coefficient: 1}]}}\n")
                .find("laser.free_running_noise"),
            std::string::npos);
  EXPECT_NE(error_of("[1, 2]\n"), "");
  EXPECT_NE(error_of("a: [\n"), "");
}

TEST(Config, MissingFileIsAnIoError) {
  EXPECT_THROW(fibrenet::cli::load_config("/nonexistent/cfg.yaml"), IoError);
}

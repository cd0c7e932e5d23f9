#include <gtest/gtest.h>

#include <numbers>

#include "fibrenet/errors.hpp"
#include "fibrenet/optics.hpp"

using namespace fibrenet;

namespace {

PhaseTimeline sine(std::size_t n, double fs, double f, double amp, Frequency offset = Frequency(0)) {
  auto x = PhaseTimeline::zeros(n, fs, offset);
  for (std::size_t i = 0; i < n; ++i) x.samples[i] = amp * std::sin(2.0 * std::numbers::pi * f * double(i) / fs);
  return x;
}

// Amplitude of the f component of x over [from, end) by quadrature projection.
double amplitude(const std::vector<double>& x, double fs, double f, std::size_t from) {
  std::complex<double> acc = 0.0;
  for (std::size_t i = from; i < x.size(); ++i) acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * f * double(i) / fs);
  return 2.0 * std::abs(acc) / double(x.size() - from);
}

}  // namespace

TEST(FrequencyPlan, StandardPlanIsConsistent) {
  const auto p = FrequencyPlan::standard();
  EXPECT_NO_THROW(p.validate());
  EXPECT_EQ(p.f_3, p.f_lo - p.f_4);
  EXPECT_EQ(p.f_1 + p.f_2, Frequency(75'000'000));
  EXPECT_EQ(p.nu_ld() + p.f_3 + p.f_4, p.f_1 + p.f_2);
  EXPECT_NO_THROW(FrequencyPlan::zero().validate());
}

TEST(FrequencyPlan, DerivesF3) {
  auto p = FrequencyPlan::standard();
  p.f_4 = Frequency(-30'000'000);
  p.derive_f3();
  EXPECT_EQ(p.f_3, Frequency(-45'000'000));
  EXPECT_NO_THROW(p.validate());
}

TEST(FrequencyPlan, NamesBrokenRelation) {
  auto p = FrequencyPlan::standard();
  p.f_3 = Frequency(-40'000'000);
  try {
    p.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("f3 must equal f_LO - f4"), std::string::npos);
  }
  p = FrequencyPlan::standard();
  p.f_1 = Frequency(50'000'000);
  try {
    p.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("f1 + f2 = 75000000"), std::string::npos);
  }
}

TEST(RfChain, OffsetsAreExact) {
  const auto x = PhaseTimeline::zeros(8, 1.0);
  const auto a = aom(x, Frequency(40'000'000));
  const auto b = aom(a, Frequency(35'000'000));
  const auto bn = beat(b, x);
  EXPECT_EQ(bn.nominal_frequency, Frequency(75'000'000));
  EXPECT_EQ(bn.phase.nominal_offset, bn.nominal_frequency);
  EXPECT_EQ(divide(bn, 2).nominal_frequency, Frequency(75'000'000, 2));
  EXPECT_EQ(divide(bn, 30).nominal_frequency, Frequency(2'500'000));
  const BeatNote lo(PhaseTimeline::zeros(8, 1.0), Frequency(75'000'000));
  EXPECT_EQ(mix(divide(bn, 30), divide(lo, 15), -1).nominal_frequency, Frequency(-2'500'000));
  EXPECT_THROW(divide(bn, 0), std::invalid_argument);
  EXPECT_THROW(mix(bn, lo, 2), std::invalid_argument);
}

TEST(RfChain, PhasesCombineLinearly) {
  auto a = PhaseTimeline::zeros(4, 1.0);
  auto b = PhaseTimeline::zeros(4, 1.0);
  a.samples = {1, 2, 3, 4};
  b.samples = {4, 3, 2, 1};
  const auto corr = aom(a, Frequency(1), &b);
  EXPECT_EQ(corr.samples, (std::vector<double>{5, 5, 5, 5}));
  const auto bn = beat(a, b);
  EXPECT_EQ(bn.phase.samples, (std::vector<double>{-3, -1, 1, 3}));
  EXPECT_EQ(divide(bn, 2).phase.samples, (std::vector<double>{-1.5, -0.5, 0.5, 1.5}));
  EXPECT_THROW(beat(a, PhaseTimeline::zeros(5, 1.0)), std::invalid_argument);
}

TEST(TrackingFilter, OnePoleResponse) {
  const double fs = 10'000.0, bw = 100.0, f = 250.0;
  const auto x = sine(20'000, fs, f, 1.0);
  const auto y = tracking_filter(BeatNote(x, Frequency(0)), bw);
  const double a = 1.0 - std::exp(-2.0 * std::numbers::pi * bw / fs);
  const auto zi = std::polar(1.0, -2.0 * std::numbers::pi * f / fs);
  const double expected = std::abs(a / (1.0 - (1.0 - a) * zi));
  EXPECT_NEAR(amplitude(y.phase.samples, fs, f, 4000), expected, 1e-3);
}

TEST(LockLaser, SuppressesFreeRunningNoisePerLoopResponse) {
  const double fs = 102'400.0, f = 1600.0;
  const std::size_t n = 102'400;
  LaserDiode ld{NoiseSpec{}, design_pll(4000.0)};
  const auto ref = PhaseTimeline::zeros(n, fs, Frequency(40'000'000));
  const BeatNote lo(PhaseTimeline::zeros(n, fs), Frequency(75'000'000));
  const auto free = sine(n, fs, f, 0.3);
  const auto r = lock_laser(ld, ref, lo, &free);
  EXPECT_EQ(r.output.nominal_offset, Frequency(115'000'000));
  // e = free / (1 + K), K = accumulator * PI (independent of the library formula)
  const double dt = 1.0 / fs;
  const auto zi = std::polar(1.0, -2.0 * std::numbers::pi * f / fs);
  const auto acc = 1.0 / (1.0 - zi);
  const auto K = dt * zi * acc * (ld.pll.proportional_gain + ld.pll.integral_gain * dt * acc);
  EXPECT_NEAR(amplitude(r.output.samples, fs, f, n / 2) / (0.3 * std::abs(1.0 / (1.0 + K))), 1.0, 1e-3);
}

TEST(LockLaser, FollowsReferencePlusLo) {
  const double fs = 102'400.0;
  const std::size_t n = 51'200;
  LaserDiode ld{NoiseSpec{}, design_pll(2000.0)};
  const auto ref = sine(n, fs, 3.0, 0.5);
  const BeatNote lo(sine(n, fs, 7.0, 0.2), Frequency(75'000'000));
  const auto free = PhaseTimeline::zeros(n, fs);
  const auto r = lock_laser(ld, ref, lo, &free);
  for (std::size_t i = n / 2; i < n; i += 101)
    EXPECT_NEAR(r.output.samples[i], ref.samples[i] + lo.phase.samples[i], 1e-4);
}

TEST(LockLaser, RejectsWideBandwidthAndReportsLossOfLock) {
  const double fs = 10'000.0;
  const std::size_t n = 10'000;
  const auto ref = PhaseTimeline::zeros(n, fs);
  const BeatNote lo(PhaseTimeline::zeros(n, fs), Frequency(0));
  EXPECT_THROW(lock_laser(LaserDiode{NoiseSpec{}, design_pll(2000.0)}, ref, lo), std::invalid_argument);
  auto jump = PhaseTimeline::zeros(n, fs);
  for (std::size_t i = n / 2; i < n; ++i) jump.samples[i] = 10.0;
  EXPECT_THROW(lock_laser(LaserDiode{NoiseSpec{}, design_pll(200.0)}, ref, lo, &jump), SimulationError);
}

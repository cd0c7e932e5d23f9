#include <gtest/gtest.h>

#include <numeric>

#include "fibrenet/signals.hpp"
#include "oracles.hpp"

using namespace fibrenet;

namespace {

NoiseSpec single(int alpha, double b, std::uint64_t seed) {
  NoiseSpec s;
  s.terms = {{alpha, b}};
  s.rng_seed = seed;
  return s;
}

}  // namespace

TEST(Noise, WhitePhaseVarianceMatchesIntegratedPsd) {
  const std::size_t n = 1 << 16;
  const double fs = 1000.0, b0 = 2e-3;
  const auto x = synth_power_law_noise(single(0, b0, 11), n, fs);
  double var = 0.0;
  for (double v : x.samples) var += v * v;
  var /= double(n);
  const double expected = b0 * fs / 2.0 * double(n / 2 - 1) / double(n / 2);
  EXPECT_NEAR(var / expected, 1.0, 0.03);
}

class NoiseShape : public ::testing::TestWithParam<int> {};

TEST_P(NoiseShape, PeriodogramFollowsPowerLaw) {
  const int alpha = GetParam();
  const std::size_t n = 2048;
  const double fs = 100.0;
  const NoiseSpec base = single(alpha, 1e-4, 0);
  for (auto [lo, hi] : {std::pair{1.0, 3.0}, {5.0, 12.0}, {20.0, 45.0}}) {
    double measured = 0.0;
    const int reps = 12;
    for (int r = 0; r < reps; ++r) {
      const auto x = synth_power_law_noise(base.with_seed(100 + r), n, fs);
      measured += oracle::periodogram_band(x.samples, fs, lo, hi);
    }
    measured /= reps;
    double expected = 0.0;
    int count = 0;
    for (std::size_t k = 1; k < n / 2; ++k) {
      const double f = double(k) * fs / double(n);
      if (f < lo || f > hi) continue;
      expected += base.psd(f);
      ++count;
    }
    expected /= count;
    EXPECT_NEAR(measured / expected, 1.0, 0.2) << "alpha " << alpha << " band " << lo;
  }
}

INSTANTIATE_TEST_SUITE_P(Alphas, NoiseShape, ::testing::Values(0, -1, -2, -3, -4));

TEST(Noise, SameSeedSameRealization) {
  const auto a = synth_power_law_noise(single(-2, 1.0, 5), 4096, 10.0);
  const auto b = synth_power_law_noise(single(-2, 1.0, 5), 4096, 10.0);
  const auto c = synth_power_law_noise(single(-2, 1.0, 6), 4096, 10.0);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, c.samples);
}

TEST(Noise, ScalingCoefficientScalesAmplitude) {
  const auto a = synth_power_law_noise(single(-1, 1.0, 9), 4096, 10.0);
  const auto b = synth_power_law_noise(single(-1, 4.0, 9), 4096, 10.0);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b.samples[i], 2.0 * a.samples[i], 1e-12);
}

TEST(Noise, SilentSpecGivesZeros) {
  const auto x = synth_power_law_noise(NoiseSpec{}, 128, 1.0);
  for (double v : x.samples) EXPECT_EQ(v, 0.0);
}

TEST(Noise, RejectsBadSpecs) {
  EXPECT_THROW(synth_power_law_noise(single(1, 1.0, 0), 64, 1.0), std::invalid_argument);
  EXPECT_THROW(synth_power_law_noise(single(-5, 1.0, 0), 64, 1.0), std::invalid_argument);
  EXPECT_THROW(synth_power_law_noise(single(0, -1.0, 0), 64, 1.0), std::invalid_argument);
  NoiseSpec band = single(0, 1.0, 0);
  band.f_min = 100.0;
  EXPECT_THROW(synth_power_law_noise(band, 64, 1.0), std::invalid_argument);
}

TEST(Noise, DriftIsDeterministicFormula) {
  NoiseSpec s;
  s.drift = DriftSpec{1e-3, 0.5, 100.0};
  const auto x = synth_power_law_noise(s, 1000, 2.0);
  for (std::size_t i = 0; i < x.size(); i += 37) {
    const double t = double(i) / 2.0;
    EXPECT_NEAR(x.samples[i], 1e-3 * t + 0.5 * std::sin(2.0 * std::numbers::pi * t / 100.0), 1e-12);
  }
}

TEST(Delay, ShiftsByWholeSamplesHoldingFirstValue) {
  PhaseTimeline x = PhaseTimeline::zeros(10, 4.0);
  std::iota(x.samples.begin(), x.samples.end(), 1.0);
  const auto y = delay(x, 0.75);
  EXPECT_EQ(y.samples, (std::vector<double>{1, 1, 1, 1, 2, 3, 4, 5, 6, 7}));
  EXPECT_EQ(delay(x, 0.0).samples, x.samples);
}

TEST(Delay, OffGridDelayReportsNearest) {
  try {
    delay_in_samples(244.8e-6, 100'000.0);
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("nearest achievable delay is 0.00024 s"), std::string::npos) << e.what();
  }
  EXPECT_EQ(delay_in_samples(0.25, 100.0), 25u);
}

TEST(Combine, OffsetsAreExact) {
  auto a = PhaseTimeline::zeros(4, 1.0, Frequency(75'000'000));
  auto b = PhaseTimeline::zeros(4, 1.0, Frequency(40'000'000));
  a.samples = {1, 2, 3, 4};
  b.samples = {1, 1, 1, 1};
  const auto c = combine({{a, 0.5}, {b, -1.0}});
  EXPECT_EQ(c.nominal_offset, Frequency(37'500'000 - 40'000'000));
  EXPECT_EQ(c.samples, (std::vector<double>{-0.5, 0.0, 0.5, 1.0}));
  auto other = PhaseTimeline::zeros(5, 1.0);
  EXPECT_THROW(combine({{a, 1.0}, {other, 1.0}}), std::invalid_argument);
}

TEST(Decimate, AveragesBlocks) {
  PhaseTimeline x = PhaseTimeline::zeros(6, 6.0, Frequency(3));
  x.samples = {1, 3, 5, 7, 9, 11};
  const auto y = decimate(x, 3);
  EXPECT_EQ(y.samples, (std::vector<double>{3, 9}));
  EXPECT_DOUBLE_EQ(y.sample_rate, 2.0);
  EXPECT_EQ(y.nominal_offset, Frequency(3));
  EXPECT_THROW(decimate(x, 4), std::invalid_argument);
}

TEST(PowerLawFit, RecoversKnownMixture) {
  std::vector<double> f, s;
  for (double v = 0.1; v < 2000.0; v *= 1.7) {
    f.push_back(v);
    s.push_back(3.0 / (v * v) + 0.02 / (v * v * v) + 1e-7);
  }
  const int alphas[] = {0, -2, -3};
  const auto terms = fit_power_law_mixture(f, s, alphas);
  EXPECT_NEAR(terms[0].coefficient / 1e-7, 1.0, 1e-4);
  EXPECT_NEAR(terms[1].coefficient / 3.0, 1.0, 1e-4);
  EXPECT_NEAR(terms[2].coefficient / 0.02, 1.0, 1e-4);
}

TEST(PowerLawFit, ShippedFibreModelHitsAnchors) {
  const auto spec = standard_fibre_noise();
  EXPECT_NEAR(spec.psd(1.0) / 10.0, 1.0, 1e-6);
  EXPECT_NEAR(spec.psd(1000.0) / 1e-6, 1.0, 1e-6);
  ASSERT_EQ(spec.terms.size(), 2u);
  // Closed form for two terms through two points.
  const double b3 = (10.0 - 1e-6 * 1e6) / (1.0 - 1e-3);
  EXPECT_NEAR(spec.terms[1].coefficient / b3, 1.0, 1e-6);
}

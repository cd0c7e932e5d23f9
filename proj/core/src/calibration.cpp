#include <cmath>
#include <functional>

#include "fibrenet/errors.hpp"
#include "fibrenet/scenarios.hpp"
#include "fibrenet/spectral_mixer.hpp"

namespace fibrenet {

namespace {

double bisect(const std::function<double(double)>& f, double target) {
  double lo = 0.0, hi = 1e-12;
  while (f(hi) < target) {
    lo = hi;
    hi *= 4.0;
    if (hi > 1e6) throw SimulationError("floor calibration did not bracket the target");
  }
  for (int it = 0; it < 80 && (hi - lo) > 1e-7 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

FloorCalibration calibrate_floors(const Scenario& s, const FloorTargets& t) {
  if (!(t.long_mdev > 0.0) || !(t.long_tau > 0.0) || !(t.out0_mdev_1s > 0.0) || t.realizations < 1)
    throw std::invalid_argument("calibrate_floors: targets and realizations must be positive");
  const std::size_t n = s.slow.samples();
  const double fs = s.slow.sample_rate;
  const double carrier = to_double(s.plan.nu_0);

  FloorCalibration c;
  {
    Scenario bare = s;
    bare.kind = ScenarioKind::midpoint;
    bare.engine = EngineMode::slow;
    bare.floors_enabled = false;
    const auto v = run_midpoint(bare).stability_named("out0").mdev.at(1.0);
    if (!v) throw ConfigError("calibration needs tau = 1 s on the stability grid");
    c.link_mdev_1s = *v;
  }
  if (c.link_mdev_1s >= t.out0_mdev_1s)
    throw SimulationError("link residual alone exceeds the 1 s target");
  const double short_target = std::sqrt(t.out0_mdev_1s * t.out0_mdev_1s - c.link_mdev_1s * c.link_mdev_1s);

  auto unit = [&](int exponent, std::uint64_t stream, int r) {
    NoiseSpec u = s.measurement_floor;
    u.terms = {{exponent, 1.0}};
    u.drift.reset();
    return synth_power_law_noise(u.with_seed(derive_seed(derive_seed(s.seed, stream), r)), n, fs);
  };
  std::vector<double> drift(n, 0.0);
  if (s.measurement_floor.drift) drift = drift_samples(*s.measurement_floor.drift, n, fs);
  std::vector<PhaseTimeline> walk, white;
  for (int r = 0; r < t.realizations; ++r) {
    walk.push_back(unit(-2, 1000, r));
    white.push_back(unit(0, 1001, r));
  }

  auto ensemble = [&](double b, double w, double tau) {
    const double a = std::sqrt(b), q = std::sqrt(w);
    double sum = 0.0;
    for (std::size_t r = 0; r < walk.size(); ++r) {
      PhaseTimeline x = PhaseTimeline::zeros(n, fs);
      for (std::size_t i = 0; i < n; ++i) x.samples[i] = a * walk[r].samples[i] + q * white[r].samples[i] + drift[i];
      const FreqSeries y = lambda_count(BeatNote(std::move(x), Frequency(0)), s.gate, carrier);
      const auto v = mdev(y, {tau}).at(tau);
      if (!v) throw ConfigError("calibration record too short for tau = " + std::to_string(tau) + " s");
      sum += *v * *v;
    }
    return std::sqrt(sum / static_cast<double>(walk.size()));
  };

  double b = 0.0, w = 0.0;
  for (int round = 0; round < 3; ++round) {
    b = bisect([&](double x) { return ensemble(x, w, t.long_tau); }, t.long_mdev);
    if (ensemble(b, 0.0, 1.0) >= short_target) {
      w = 0.0;
      continue;
    }
    w = bisect([&](double x) { return ensemble(b, x, 1.0); }, short_target);
  }
  c.random_walk_level = b;
  c.white_level = w;
  c.achieved_long = ensemble(b, w, t.long_tau);
  const double fl = ensemble(b, w, 1.0);
  c.achieved_out0_1s = std::sqrt(fl * fl + c.link_mdev_1s * c.link_mdev_1s);
  return c;
}

}  // namespace fibrenet

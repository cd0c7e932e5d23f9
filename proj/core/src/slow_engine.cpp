#include "fibrenet/slow_engine.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fibrenet/spectral_mixer.hpp"

namespace fibrenet {

SlowRun run_slow_engine(const NetworkModel& model, std::size_t n, double fs) {
  if (!(fs > 0.0) || !(model.loop_rate >= fs)) throw std::invalid_argument("slow engine needs 0 < fs <= loop rate");
  const double fl = model.loop_rate;
  const SpanGrid g = resolve_span_grid(model.main_span, fl);
  const std::size_t m = g.boundary_index(model.extraction_km, model.main_span.length_km);
  const std::size_t E = g.boundaries[m];
  const std::size_t T = g.delay;
  const bool has_secondary = model.secondary_span.has_value();
  SpanGrid gs;
  if (has_secondary) gs = resolve_span_grid(*model.secondary_span, fl);
  const std::size_t Ts = has_secondary ? gs.delay : 0;

  SpectralMixer mixer(n, fs);
  const int k_main = g.segments;
  NoiseSpec seg_main = model.main_span.noise.scaled(1.0 / k_main);
  std::size_t src_main = mixer.source_count();
  for (int i = 0; i < k_main; ++i) mixer.add_source(seg_main.with_seed(derive_seed(seg_main.rng_seed, i)));
  std::size_t src_sec = mixer.source_count();
  if (has_secondary) {
    NoiseSpec seg = model.secondary_span->noise.scaled(1.0 / gs.segments);
    for (int i = 0; i < gs.segments; ++i) mixer.add_source(seg.with_seed(derive_seed(seg.rng_seed, i)));
  }
  const std::size_t s_ld = mixer.add_source(model.laser_free);
  const std::size_t s_lo = mixer.add_source(model.lo);
  const std::size_t s_rt = mixer.add_source(model.floor_round_trip);
  const std::size_t s_pd1 = mixer.add_source(model.floor_pd1);
  const std::size_t s_pd2 = mixer.add_source(model.floor_pd2);
  const std::size_t s_sec = mixer.add_source(model.floor_secondary);

  const std::size_t max_delay = 2 * std::max(T, Ts);
  std::vector<std::complex<double>> d(max_delay + 1);
  using cd = std::complex<double>;
  const double nb = model.main_servo.beat_divider;
  const double nbs = model.secondary_servo.beat_divider;
  const double nlo = model.secondary_servo.lo_divider;

  auto rendered = mixer.render(2, [&](const SpectralMixer::Bin& bin, std::span<const cd> src, std::span<cd> out) {
    const double f = bin.frequency;
    const cd z1 = std::polar(1.0, -2.0 * std::numbers::pi * f / fl);
    d[0] = 1.0;
    for (std::size_t k = 1; k <= max_delay; ++k) d[k] = d[k - 1] * z1;

    cd fwd_out{}, bwd_in{}, up{}, down{};
    for (int i = 0; i < k_main; ++i) {
      const cd phi = src[src_main + i];
      const std::size_t p = g.positions[i];
      fwd_out += phi * d[T - p];
      bwd_in += phi * d[p];
      if (static_cast<std::size_t>(i) < m) up += phi * d[E - p];
      else down += phi * d[p - E];
    }
    const cd kc = controller_response(model.main_servo, f, fl);
    const cd noise = fwd_out * d[T] + bwd_in;
    const cd c0 = -kc * (noise + src[s_rt]) / nb / (1.0 + kc * (1.0 + d[2 * T]) / nb);
    const cd out0 = c0 * d[T] + fwd_out;

    const cd fwd = c0 * d[E] + up;
    const cd bwd = out0 * d[T - E] + down;
    const cd pd1 = bwd - fwd + src[s_pd1];
    const cd ref = model.pd1_correction ? fwd + 0.5 * pd1 : fwd;
    const cd kl = controller_response(model.laser_pll, f, fl);
    const cd lo = src[s_lo];
    const cd laser = (src[s_ld] + kl * (ref + lo - src[s_pd2])) / (1.0 + kl);

    cd out1 = laser;
    if (has_secondary) {
      cd fs_out{}, bs_in{};
      for (int i = 0; i < gs.segments; ++i) {
        const cd psi = src[src_sec + i];
        fs_out += psi * d[Ts - gs.positions[i]];
        bs_in += psi * d[gs.positions[i]];
      }
      const cd ks = controller_response(model.secondary_servo, f, fl);
      const cd ns = fs_out * d[Ts] + bs_in;
      const cd c1 = ks * ((laser * (1.0 - d[2 * Ts]) - ns + src[s_sec]) / nbs - lo / nlo) /
                    (1.0 + ks * (1.0 + d[2 * Ts]) / nbs);
      out1 = (laser + c1) * d[Ts] + fs_out;
    }
    out[0] = out0;
    out[1] = out1;
  });

  SlowRun run;
  run.out0.sample_rate = run.out1.sample_rate = fs;
  run.out0.samples = std::move(rendered[0]);
  run.out1.samples = std::move(rendered[1]);
  run.out0.nominal_offset = model.plan.f_1 + model.plan.f_2;
  run.out1.nominal_offset = has_secondary ? model.plan.nu_ld() + model.plan.f_3 + model.plan.f_4 : model.plan.nu_ld();
  return run;
}

}  // namespace fibrenet

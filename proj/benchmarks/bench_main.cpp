#include <benchmark/benchmark.h>

#include <random>

#include "fibrenet/links.hpp"
#include "fibrenet/metrology.hpp"
#include "fibrenet/slow_engine.hpp"

using namespace fibrenet;

static void BM_SynthFibreNoise(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(synth_power_law_noise(standard_fibre_noise(1), n, 102'400.0));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SynthFibreNoise)->Arg(1 << 16)->Arg(1 << 20);

static void BM_SpanRender(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  FibreSpan s;
  s.noise = standard_fibre_noise(2);
  for (auto _ : st) {
    auto span = realize_span(s, n, 102'400.0);
    auto sets = link_tap_sets(span->grid());
    span->prefetch(sets);
    benchmark::DoNotOptimize(span->taps(sets[0]));
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SpanRender)->Arg(1 << 16)->Arg(1 << 20);

static void BM_CompensatedLink(benchmark::State& st) {
  const std::size_t n = 102'400;
  FibreSpan s;
  s.noise = standard_fibre_noise(3);
  auto span = realize_span(s, n, 102'400.0);
  span->prefetch(link_tap_sets(span->grid()));
  const auto servo = design_link_servo(span->grid().delay, 102'400.0, 2, 0.15 / s.tau());
  const auto x = PhaseTimeline::zeros(n, 102'400.0);
  for (auto _ : st) benchmark::DoNotOptimize(compensate(x, span, servo, FrequencyPlan::standard()));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_CompensatedLink)->Unit(benchmark::kMillisecond);

static void BM_SlowEngine(benchmark::State& st) {
  NetworkModel m;
  m.main_span.noise = standard_fibre_noise(4);
  const auto g = resolve_span_grid(m.main_span, m.loop_rate);
  m.main_servo = design_link_servo(g.delay, m.loop_rate, 2, 0.15 / m.main_span.tau());
  m.laser_pll = design_pll(4096.0);
  const auto n = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(run_slow_engine(m, n, 10.0));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SlowEngine)->Arg(1 << 14)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

static void BM_Mdev(benchmark::State& st) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1e-15);
  FreqSeries y;
  y.samples.resize(static_cast<std::size_t>(st.range(0)));
  for (auto& v : y.samples) v = g(rng);
  const auto taus = octave_taus(y, {10000.0, 20000.0, 30000.0});
  for (auto _ : st) benchmark::DoNotOptimize(mdev(y, taus));
}
BENCHMARK(BM_Mdev)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

static void BM_Welch(benchmark::State& st) {
  const auto x = synth_power_law_noise(standard_fibre_noise(6), 1 << 20, 102'400.0);
  for (auto _ : st) benchmark::DoNotOptimize(welch_psd(x, 1 << 14, 0.5, Detrend::linear));
}
BENCHMARK(BM_Welch)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <utility>
#include <vector>

#include <spdlog/spdlog.h>

#include "fibrenet/scenarios.hpp"
#include "oracles.hpp"

using namespace fibrenet;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [x]");
  }
};

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void report(int id, const char* title, const std::function<void(Outcome&)>& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << "exception: " << e.what();
  }
  if (!o.pass) ++failures;
  std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.str().c_str());
  std::fflush(stdout);
}

double mdev_slope(int alpha) {
  NoiseSpec spec;
  spec.terms = {{alpha, 1.0}};
  spec.rng_seed = 1234;
  const auto phase = synth_power_law_noise(spec, 1 << 17, 1.0);
  const auto y = lambda_count(BeatNote(phase, Frequency(0)), 1.0, 1e14, Weighting::pi);
  std::vector<double> taus;
  for (double t = 4.0; t <= 1024.0; t *= 2.0) taus.push_back(t);
  const auto c = mdev(y, taus);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(c.taus.size());
  for (std::size_t i = 0; i < c.taus.size(); ++i) {
    const double x = std::log10(c.taus[i]), v = std::log10(c.values[i]);
    sx += x;
    sy += v;
    sxx += x * x;
    sxy += x * v;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_wall_clock(const std::string& text) {
  std::istringstream in(text);
  std::string line, kept;
  while (std::getline(in, line))
    if (line.find("wall_clock") == std::string::npos) kept += line + "\n";
  return kept;
}

int run_sim(const std::string& args) {
  const std::string cmd = std::string("SIM_DETERMINISTIC=1 ") + SIM_BINARY + " " + args + " > /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const Scenario base = preset("paper-50km");

  Scenario fast = base;
  fast.engine = EngineMode::fast;
  auto t0 = std::chrono::steady_clock::now();
  ScenarioReport fr;
  std::string fast_error;
  try {
    fr = run_midpoint(fast);
  } catch (const std::exception& e) {
    fast_error = e.what();
  }
  const double fast_s = seconds_since(t0);
  const auto& fm = fr.metrics;
  auto need_fast = [&] {
    if (!fast_error.empty()) throw std::runtime_error("fast run failed: " + fast_error);
  };

  report(1, "free-running PSD calibration", [&](Outcome& o) {
    need_fast();
    const double db1 = 10.0 * std::log10(fm.at("free_psd_1hz") / 10.0);
    const double db2 = 10.0 * std::log10(fm.at("free_psd_1khz") / 1e-6);
    o.require(std::abs(db1) <= 3.0, "S(1 Hz) = " + g(fm.at("free_psd_1hz")) + " rad^2/Hz (" + g(db1) + " dB)");
    o.require(std::abs(db2) <= 3.0, "S(1 kHz) = " + g(fm.at("free_psd_1khz")) + " rad^2/Hz (" + g(db2) + " dB)");
    o.require(fast.fast.duration == 100.0, "duration " + g(fast.fast.duration) + " s");
    o.require(fast_s < 60.0, "fast run " + g(fast_s) + " s");
  });

  report(2, "compensated PSD shape", [&](Outcome& o) {
    need_fast();
    const double fbw = fm.at("bandwidth_limit_hz");
    o.require(fm.at("comp_psd_max_1_50hz") < 1e-5, "max over 1-50 Hz " + g(fm.at("comp_psd_max_1_50hz")));
    const double end = fm.at("suppression_end_hz");
    o.require(end >= 100.0 && end <= fbw, "suppression ends at " + g(end) + " Hz (1/(4 tau) = " + g(fbw) + " Hz)");
    o.require(fm.at("bump_peak_ratio") > 1.0 && fm.at("bump_peak_hz") < 1000.0,
              "bump x" + g(fm.at("bump_peak_ratio")) + " at " + g(fm.at("bump_peak_hz")) + " Hz");
  });

  report(3, "rejection-limit oracle", [&](Outcome& o) {
    need_fast();
    for (const char* f : {"0.5", "1", "2", "5", "10"}) {
      const double r = fm.at(std::string("rejection_over_prediction_") + f + "hz");
      o.require(r >= 1.0 / 3.0 && r <= 3.0, std::string(f) + " Hz: x" + g(r));
    }
  });

  Scenario slow = base;
  slow.engine = EngineMode::slow;
  t0 = std::chrono::steady_clock::now();
  const ScenarioReport sr = run_midpoint(slow);
  const double slow_s = seconds_since(t0);
  const auto& sm = sr.metrics;

  report(4, "extraction fidelity", [&](Outcome& o) {
    o.require(sm.at("out1_over_out0_worst") <= 2.0, "worst Out1/Out0 over 1 s..1e4 s x" + g(sm.at("out1_over_out0_worst")));
    const double a = sm.at("out0_mdev_1s");
    o.require(a >= 2e-18 && a <= 2e-17, "Out0 MDEV(1 s) " + g(a));
    const double l = sm.at("out1_mdev_long");
    o.require(sm.at("out1_mdev_long_tau_s") == 1e4 && l >= 1e-20 && l < 1e-19,
              "Out1 MDEV(" + g(sm.at("out1_mdev_long_tau_s")) + " s) " + g(l));
    o.require(slow.slow.duration == 1e5 && slow_s < 300.0, g(slow.slow.duration) + " s simulated in " + g(slow_s) + " s");
  });

  report(5, "accuracy", [&](Outcome& o) {
    for (const char* n : {"out0", "out1"}) {
      const double m = sm.at(std::string(n) + "_mean_offset");
      const double u = sm.at(std::string(n) + "_offset_uncertainty");
      o.require(u > 0.0 && std::abs(m) < 3.0 * u, std::string(n) + " " + g(m) + " +/- " + g(u));
    }
  });

  report(6, "input-extraction triplet", [&](Outcome& o) {
    const auto r = run_input_extraction(preset("paper-section5-input"));
    for (const char* m : {"free", "poor", "optimal"}) {
      const double w = r.metrics.at(std::string("tracking_worst_") + m);
      o.require(w <= 1.5, std::string(m) + " tracks within x" + g(w));
    }
    const double off = r.metrics.at("f_factor_optimal_no_floors");
    const double on = r.metrics.at("f_factor_optimal");
    o.require(off < 0.1, "F floors off " + g(off));
    o.require(std::abs(on - 0.6) <= 0.3, "F floors on " + g(on));
  });

  report(7, "LO insensitivity", [&](Outcome& o) {
    const auto r = run_lo_sensitivity(preset("lo-sensitivity"));
    const double c = r.metrics.at("lo_toggle_worst_relative_change");
    const double d = r.metrics.at("ablation_min_degradation");
    o.require(c < 0.1, "toggle changes Out1 MDEV by " + g(100.0 * c) + " %");
    o.require(d > 10.0, "servo ablation degrades by x" + g(d));
  });

  report(8, "estimator suite", [&](Outcome& o) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> nd(0.0, 1e-15);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      FreqSeries y;
      y.gate = 1.0;
      for (int i = 0; i < 64; ++i) y.samples.push_back(nd(rng));
      std::vector<double> taus;
      for (std::size_t m = 1; m <= 21; ++m) taus.push_back(double(m));
      const auto a = oadev(y, taus);
      const auto md = mdev(y, taus);
      for (std::size_t m = 1; m <= 21; ++m) {
        worst = std::max(worst, std::abs(a.values[m - 1] / oracle::oadev(y.samples, 1.0, m) - 1.0));
        worst = std::max(worst, std::abs(md.values[m - 1] / oracle::mdev(y.samples, 1.0, m) - 1.0));
      }
    }
    o.require(worst <= 1e-12, "brute-force relative error " + g(worst));
    const std::pair<int, double> laws[] = {{0, -1.5}, {-1, -1.0}, {-2, -0.5}, {-3, 0.0}, {-4, 0.5}};
    for (auto [alpha, mu] : laws) {
      const double s = mdev_slope(alpha);
      o.require(std::abs(s - mu) <= 0.2, "alpha " + std::to_string(alpha) + " slope " + g(s));
    }
    const double fs = 100.0, carrier = 1.944e14, df = 0.37;
    auto flat = PhaseTimeline::zeros(2000, fs);
    auto ramp = PhaseTimeline::zeros(2000, fs);
    for (std::size_t i = 0; i < ramp.size(); ++i) {
      flat.samples[i] = 1.25;
      ramp.samples[i] = 2.0 * std::numbers::pi * df * double(i) / fs;
    }
    double err_flat = 0.0, err_ramp = 0.0;
    for (double v : lambda_count(BeatNote(flat, Frequency(0)), 1.0, carrier).samples) err_flat = std::max(err_flat, std::abs(v));
    for (double v : lambda_count(BeatNote(ramp, Frequency(0)), 1.0, carrier).samples)
      err_ramp = std::max(err_ramp, std::abs(v * carrier / df - 1.0));
    o.require(err_flat == 0.0 && err_ramp < 1e-9, "counter: constant " + g(err_flat) + ", ramp rel " + g(err_ramp));
  });

  report(9, "exact bookkeeping", [&](Outcome& o) {
    need_fast();
    const auto m = nominal_frequency_map(base.plan);
    std::size_t mismatches = 0;
    for (const auto* offs : {&std::as_const(fr).offsets, &sr.offsets})
      for (const auto& [k, v] : *offs)
        if (!m.count(k) || m.at(k) != v) ++mismatches;
    o.require(mismatches == 0, std::to_string(fr.offsets.size() + sr.offsets.size()) + " simulated offsets, " +
                                   std::to_string(mismatches) + " mismatches");
    const Frequency expect = base.plan.f_1 + base.plan.f_2;
    o.require(fr.offsets.at("out1") == expect && fr.offsets.at("out0") == expect && sr.offsets.at("out1") == expect,
              "Out1 = Out0 = nu0 + " + format_frequency(expect) + " Hz");
    o.require(fr.offsets.at("beat.out0_vs_input") == Frequency(75'000'000),
              "main beat " + format_frequency(fr.offsets.at("beat.out0_vs_input")) + " Hz");
  });

  report(10, "determinism", [&](Outcome& o) {
    const fs::path base = fs::temp_directory_path() / ("fibrenet_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(base);
    const fs::path a = base / "a", b = base / "b";
    const std::string args = "run --preset paper-50km --engine slow --out ";
    const int ra = run_sim(args + a.string());
    const int rb = run_sim(args + b.string());
    o.require(ra == 0 && rb == 0, "exit codes " + std::to_string(ra) + "/" + std::to_string(rb));
    std::size_t files = 0, differing = 0;
    if (ra == 0 && rb == 0)
      for (const auto& e : fs::directory_iterator(a)) {
        const auto name = e.path().filename();
        std::string x = slurp(e.path()), y = fs::exists(b / name) ? slurp(b / name) : std::string("\x01missing");
        if (name == "manifest.json") {
          x = without_wall_clock(x);
          y = without_wall_clock(y);
        }
        ++files;
        if (x != y) ++differing;
      }
    fs::remove_all(base);
    o.require(files > 0 && differing == 0, std::to_string(files) + " files, " + std::to_string(differing) + " differ");
    const double s0 = sm.at("out0_slips"), s1 = sm.at("out1_slips");
    o.require(s0 == 0.0 && s1 == 0.0, "cycle slips over 1e5 s: " + g(s0) + "/" + g(s1));
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

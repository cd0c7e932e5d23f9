#include "fibrenet/servo.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fibrenet {

void ServoConfig::validate() const {
  if (!std::isfinite(proportional_gain) || !std::isfinite(integral_gain) || proportional_gain < 0.0 ||
      integral_gain < 0.0)
    throw std::invalid_argument("servo gains must be finite and non-negative");
  if (beat_divider < 1 || lo_divider < 1) throw std::invalid_argument("servo dividers must be >= 1");
  if (!(gain_scale >= 0.0) || !std::isfinite(gain_scale)) throw std::invalid_argument("gain_scale must be >= 0");
  if (!(transport_delay >= 0.0)) throw std::invalid_argument("transport delay must be >= 0");
}

PiController::PiController(const ServoConfig& cfg, double fs)
    : kp_dt_(cfg.kp() / fs), ki_dt2_(cfg.ki() / (fs * fs)), pipe_(cfg.latency_samples, 0.0) {}

double PiController::step(double error) {
  integral_ += ki_dt2_ * error;
  double inc = kp_dt_ * error + integral_;
  if (pipe_.empty()) return inc;
  double out = pipe_[head_];
  pipe_[head_] = inc;
  head_ = (head_ + 1) % pipe_.size();
  return out;
}

std::complex<double> controller_response(const ServoConfig& cfg, double f, double fs) {
  if (!cfg.enabled || cfg.gain_scale == 0.0) return {0.0, 0.0};
  const double dt = 1.0 / fs;
  const std::complex<double> zinv = std::polar(1.0, -2.0 * std::numbers::pi * f / fs);
  const std::complex<double> acc = 1.0 / (1.0 - zinv);
  std::complex<double> lat = zinv;
  for (std::size_t i = 0; i < cfg.latency_samples; ++i) lat *= zinv;
  return dt * lat * acc * (cfg.kp() + cfg.ki() * dt * acc);
}

std::complex<double> link_open_loop(const ServoConfig& cfg, std::size_t delay_samples, double f, double fs) {
  const std::complex<double> d2 = std::polar(1.0, -2.0 * std::numbers::pi * f * 2.0 * static_cast<double>(delay_samples) / fs);
  return controller_response(cfg, f, fs) * (1.0 + d2) / static_cast<double>(cfg.beat_divider);
}

ServoConfig design_link_servo(std::size_t delay_samples, double fs, int beat_divider, double unity_gain_hz,
                              double zero_ratio) {
  if (!(unity_gain_hz > 0.0) || !(zero_ratio > 0.0)) throw std::invalid_argument("servo design needs positive targets");
  ServoConfig cfg;
  cfg.beat_divider = beat_divider;
  cfg.transport_delay = 2.0 * static_cast<double>(delay_samples) / fs;
  cfg.unity_gain_hz = unity_gain_hz;
  cfg.proportional_gain = 1.0;
  cfg.integral_gain = 2.0 * std::numbers::pi * unity_gain_hz / zero_ratio;
  const double g = std::abs(link_open_loop(cfg, delay_samples, unity_gain_hz, fs));
  cfg.proportional_gain = 1.0 / g;
  cfg.integral_gain /= g;
  return cfg;
}

ServoConfig design_pll(double bandwidth_hz) {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("PLL bandwidth must be positive");
  const double wn = 2.0 * std::numbers::pi * bandwidth_hz;
  ServoConfig cfg;
  cfg.proportional_gain = 2.0 * wn;
  cfg.integral_gain = wn * wn;
  cfg.unity_gain_hz = bandwidth_hz;
  cfg.actuator = "laser";
  return cfg;
}

double link_phase_margin_deg(const ServoConfig& cfg, std::size_t delay_samples, double fs) {
  // First crossing of |G| = 1 scanning upward on a log grid, then bisection.
  double lo = 1e-3, hi = 0.0;
  double prev = lo;
  for (double f = lo; f < fs / 2.0; f *= 1.01) {
    if (std::abs(link_open_loop(cfg, delay_samples, f, fs)) < 1.0) {
      lo = prev;
      hi = f;
      break;
    }
    prev = f;
  }
  if (hi == 0.0) return 0.0;
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (lo + hi);
    if (std::abs(link_open_loop(cfg, delay_samples, mid, fs)) < 1.0) hi = mid; else lo = mid;
  }
  const double phase = std::arg(link_open_loop(cfg, delay_samples, 0.5 * (lo + hi), fs));
  return 180.0 + phase * 180.0 / std::numbers::pi;
}

}  // namespace fibrenet

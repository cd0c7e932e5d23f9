#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace fibrenet {

/// PI loop on a phase error, producing a phase correction (integrated
/// frequency) that is updated once per sample.
struct ServoConfig {
  double proportional_gain = 0.0;  // 1/s: frequency correction (rad/s) per rad of error
  double integral_gain = 0.0;      // 1/s^2
  double transport_delay = 0.0;    // s, loop path delay outside the controller
  int beat_divider = 1;
  int lo_divider = 1;
  std::string actuator = "aom1";
  bool enabled = true;
  double gain_scale = 1.0;
  std::size_t latency_samples = 0;  // extra controller latency
  double unity_gain_hz = 0.0;       // design value, informational

  double kp() const { return enabled ? proportional_gain * gain_scale : 0.0; }
  double ki() const { return enabled ? integral_gain * gain_scale : 0.0; }
  void validate() const;
};

/// Discrete controller matching ServoConfig. step(e) consumes the error of
/// the current sample and returns the phase increment to subtract from the
/// correction for the next sample (after any latency).
class PiController {
 public:
  PiController(const ServoConfig& cfg, double fs);
  double step(double error);

 private:
  double kp_dt_;
  double ki_dt2_;
  double integral_ = 0.0;
  std::vector<double> pipe_;
  std::size_t head_ = 0;
};

/// Frequency response of PiController (increment -> correction) at f:
/// dt z^{-L-1}/(1-z^{-1}) * (Kp + Ki dt/(1-z^{-1})). Zero when disabled.
std::complex<double> controller_response(const ServoConfig& cfg, double f, double fs);

/// Round-trip link servo with beat divider nb and loop delay 2*delay_samples:
/// unity gain at unity_gain_hz, PI zero at unity_gain_hz / zero_ratio.
ServoConfig design_link_servo(std::size_t delay_samples, double fs, int beat_divider,
                              double unity_gain_hz, double zero_ratio = 10.0);

/// Critically damped second-order PLL with natural frequency 2 pi bandwidth.
ServoConfig design_pll(double bandwidth_hz);

/// Open-loop gain of the round-trip link at f.
std::complex<double> link_open_loop(const ServoConfig& cfg, std::size_t delay_samples, double f, double fs);

/// Phase margin in degrees of the round-trip link loop (searched numerically).
double link_phase_margin_deg(const ServoConfig& cfg, std::size_t delay_samples, double fs);

}  // namespace fibrenet

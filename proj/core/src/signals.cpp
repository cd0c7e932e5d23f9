#include "fibrenet/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fibrenet/spectral_mixer.hpp"

namespace fibrenet {

void PhaseTimeline::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
    throw std::invalid_argument("sample rate must be positive and finite");
  if (!std::isfinite(start_time)) throw std::invalid_argument("start time must be finite");
  for (double v : samples)
    if (!std::isfinite(v)) throw std::invalid_argument("timeline holds a non-finite sample");
}

PhaseTimeline PhaseTimeline::zeros(std::size_t n, double fs, Frequency offset) {
  PhaseTimeline t;
  t.sample_rate = fs;
  t.samples.assign(n, 0.0);
  t.nominal_offset = offset;
  return t;
}

bool same_grid(const PhaseTimeline& a, const PhaseTimeline& b) {
  return a.sample_rate == b.sample_rate && a.start_time == b.start_time && a.size() == b.size();
}

void require_same_grid(const PhaseTimeline& a, const PhaseTimeline& b, const char* what) {
  if (!same_grid(a, b)) throw std::invalid_argument(std::string(what) + ": timelines are on different grids");
}

double NoiseSpec::psd(double f) const {
  if (f < f_min || f > f_max || f <= 0.0) return 0.0;
  double s = 0.0;
  for (const auto& t : terms) s += t.coefficient * std::pow(f, t.exponent);
  return s;
}

bool NoiseSpec::silent() const {
  return std::all_of(terms.begin(), terms.end(), [](const PowerLawTerm& t) { return t.coefficient == 0.0; });
}

void NoiseSpec::validate() const {
  for (const auto& t : terms) {
    if (t.exponent < -4 || t.exponent > 0)
      throw std::invalid_argument("power-law exponent " + std::to_string(t.exponent) + " outside [-4, 0]");
    if (!(t.coefficient >= 0.0) || !std::isfinite(t.coefficient))
      throw std::invalid_argument("power-law coefficients must be finite and non-negative");
  }
  if (!(f_min >= 0.0) || !(f_min < f_max)) throw std::invalid_argument("noise band needs 0 <= f_min < f_max");
  if (drift) {
    if (!std::isfinite(drift->linear_rate) || !std::isfinite(drift->diurnal_amplitude))
      throw std::invalid_argument("drift terms must be finite");
    if (!(drift->diurnal_period > 0.0)) throw std::invalid_argument("diurnal period must be positive");
  }
}

NoiseSpec NoiseSpec::scaled(double factor) const {
  NoiseSpec s = *this;
  for (auto& t : s.terms) t.coefficient *= factor;
  return s;
}

NoiseSpec NoiseSpec::with_seed(std::uint64_t seed) const {
  NoiseSpec s = *this;
  s.rng_seed = seed;
  return s;
}

NoiseSpec white_phase(double level, std::uint64_t seed) {
  NoiseSpec s;
  s.terms = {{0, level}};
  s.rng_seed = seed;
  return s;
}

std::vector<double> drift_samples(const DriftSpec& drift, std::size_t n, double fs, double start_time) {
  std::vector<double> out(n);
  const double w = 2.0 * std::numbers::pi / drift.diurnal_period;
  for (std::size_t i = 0; i < n; ++i) {
    double t = start_time + static_cast<double>(i) / fs;
    out[i] = drift.linear_rate * t + drift.diurnal_amplitude * std::sin(w * t);
  }
  return out;
}

PhaseTimeline synth_power_law_noise(const NoiseSpec& spec, std::size_t n, double fs) {
  spec.validate();
  if (n < 2) throw std::invalid_argument("noise synthesis needs n >= 2");
  if (!(fs > 0.0) || !std::isfinite(fs)) throw std::invalid_argument("sample rate must be positive");
  PhaseTimeline out = PhaseTimeline::zeros(n, fs);
  if (!spec.silent()) {
    const double lo = std::max(spec.f_min, fs / static_cast<double>(n));
    const double hi = std::min(spec.f_max, fs / 2.0);
    if (n < 4 || !(lo < hi)) {
      std::ostringstream msg;
      msg << "no part of the noise band [" << spec.f_min << ", " << spec.f_max << "] Hz survives "
          << n << " samples at " << fs << " Hz";
      throw std::invalid_argument(msg.str());
    }
    SpectralMixer mixer(n, fs);
    mixer.add_source(spec);
    auto rendered = mixer.render(1, [](const SpectralMixer::Bin&, auto src, auto dst) { dst[0] = src[0]; });
    out.samples = std::move(rendered[0]);
  }
  if (spec.drift) {
    auto d = drift_samples(*spec.drift, n, fs, out.start_time);
    for (std::size_t i = 0; i < n; ++i) out.samples[i] += d[i];
  }
  return out;
}

std::size_t delay_in_samples(double tau, double fs) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("delay must be finite and >= 0");
  const double d = tau * fs;
  const double r = std::round(d);
  if (std::abs(d - r) > 1e-6) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "delay " << tau << " s is not a whole number of samples at " << fs
        << " Hz; nearest achievable delay is " << r / fs << " s";
    throw std::invalid_argument(msg.str());
  }
  return static_cast<std::size_t>(r);
}

PhaseTimeline delay_samples(const PhaseTimeline& x, std::size_t d) {
  PhaseTimeline y = x;
  if (d == 0 || x.samples.empty()) return y;
  const std::size_t n = x.size();
  const double first = x.samples.front();
  for (std::size_t k = 0; k < n; ++k) y.samples[k] = k >= d ? x.samples[k - d] : first;
  return y;
}

PhaseTimeline delay(const PhaseTimeline& x, double tau) {
  return delay_samples(x, delay_in_samples(tau, x.sample_rate));
}

PhaseTimeline combine(std::span<const Weighted> xs) {
  if (xs.empty()) throw std::invalid_argument("combine needs at least one timeline");
  const PhaseTimeline& ref = xs.front().timeline;
  PhaseTimeline out = PhaseTimeline::zeros(ref.size(), ref.sample_rate);
  out.start_time = ref.start_time;
  for (const auto& w : xs) {
    require_same_grid(ref, w.timeline, "combine");
    out.nominal_offset += exact_scale(w.scale) * w.timeline.nominal_offset;
    const auto& s = w.timeline.samples;
    for (std::size_t i = 0; i < s.size(); ++i) out.samples[i] += w.scale * s[i];
  }
  return out;
}

PhaseTimeline combine(std::initializer_list<Weighted> xs) {
  return combine(std::span<const Weighted>(xs.begin(), xs.size()));
}

PhaseTimeline decimate(const PhaseTimeline& x, std::size_t factor) {
  if (factor == 0) throw std::invalid_argument("decimation factor must be >= 1");
  if (x.size() % factor != 0) throw std::invalid_argument("decimation factor must divide the sample count");
  if (factor == 1) return x;
  PhaseTimeline y;
  y.sample_rate = x.sample_rate / static_cast<double>(factor);
  y.start_time = x.start_time;
  y.nominal_offset = x.nominal_offset;
  y.samples.resize(x.size() / factor);
  const double inv = 1.0 / static_cast<double>(factor);
  for (std::size_t k = 0; k < y.samples.size(); ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < factor; ++j) acc += x.samples[k * factor + j];
    y.samples[k] = acc * inv;
  }
  return y;
}

namespace {

// Solves the small symmetric positive system A x = b in place (Cholesky).
bool solve_spd(std::vector<double>& a, std::vector<double>& b, std::size_t m) {
  for (std::size_t j = 0; j < m; ++j) {
    double d = a[j * m + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * m + k] * a[j * m + k];
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    a[j * m + j] = d;
    for (std::size_t i = j + 1; i < m; ++i) {
      double s = a[i * m + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * m + k] * a[j * m + k];
      a[i * m + j] = s / d;
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * m + k] * b[k];
    b[i] = s / a[i * m + i];
  }
  for (std::size_t i = m; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < m; ++k) s -= a[k * m + i] * b[k];
    b[i] = s / a[i * m + i];
  }
  return true;
}

}  // namespace

std::vector<PowerLawTerm> fit_power_law_mixture(std::span<const double> freqs, std::span<const double> psd,
                                                std::span<const int> exponents) {
  if (freqs.size() != psd.size() || freqs.empty()) throw std::invalid_argument("fit needs matching, non-empty data");
  if (exponents.empty()) throw std::invalid_argument("fit needs at least one exponent");
  for (std::size_t j = 0; j < freqs.size(); ++j)
    if (!(freqs[j] > 0.0) || !(psd[j] > 0.0)) throw std::invalid_argument("fit data must be positive");

  const std::size_t m = exponents.size();
  const std::size_t npts = freqs.size();
  // Work on log-coefficients so the mixture stays non-negative.
  std::vector<double> theta(m);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < npts; ++j) acc += std::log(psd[j]) - exponents[i] * std::log(freqs[j]);
    theta[i] = acc / static_cast<double>(npts) - std::log(static_cast<double>(m));
  }
  auto cost = [&](const std::vector<double>& th) {
    double c = 0.0;
    for (std::size_t j = 0; j < npts; ++j) {
      double model = 0.0;
      for (std::size_t i = 0; i < m; ++i) model += std::exp(th[i] + exponents[i] * std::log(freqs[j]));
      double r = std::log(model) - std::log(psd[j]);
      c += r * r;
    }
    return c;
  };

  double lambda = 1e-3;
  double current = cost(theta);
  for (int iter = 0; iter < 500 && current > 1e-28; ++iter) {
    std::vector<double> jtj(m * m, 0.0), jtr(m, 0.0);
    for (std::size_t j = 0; j < npts; ++j) {
      std::vector<double> parts(m);
      double model = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        parts[i] = std::exp(theta[i] + exponents[i] * std::log(freqs[j]));
        model += parts[i];
      }
      double r = std::log(model) - std::log(psd[j]);
      for (std::size_t a = 0; a < m; ++a) {
        double ja = parts[a] / model;
        jtr[a] += ja * r;
        for (std::size_t b = 0; b < m; ++b) jtj[a * m + b] += ja * parts[b] / model;
      }
    }
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      std::vector<double> a = jtj, step = jtr;
      for (std::size_t i = 0; i < m; ++i) a[i * m + i] += lambda * (1.0 + jtj[i * m + i]);
      if (solve_spd(a, step, m)) {
        std::vector<double> trial = theta;
        for (std::size_t i = 0; i < m; ++i) trial[i] -= step[i];
        double c = cost(trial);
        if (c < current) {
          theta = trial;
          current = c;
          lambda = std::max(lambda * 0.3, 1e-12);
          improved = true;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }

  std::vector<PowerLawTerm> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back({exponents[i], std::exp(theta[i])});
  return out;
}

NoiseSpec standard_fibre_noise(std::uint64_t seed) {
  static const std::vector<PowerLawTerm> fitted = [] {
    const double f[] = {1.0, 1000.0};
    const double s[] = {10.0, 1e-6};
    const int alpha[] = {-2, -3};
    return fit_power_law_mixture(f, s, alpha);
  }();
  NoiseSpec spec;
  spec.terms = fitted;
  spec.f_min = 1e-6;
  spec.f_max = 1e9;
  spec.rng_seed = seed;
  return spec;
}

}  // namespace fibrenet

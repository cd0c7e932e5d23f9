#include "fibrenet/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "fibrenet/fft.hpp"

namespace fibrenet {
namespace {

std::size_t whole_multiple(double value, double unit, const char* what) {
  const double r = value / unit;
  const double m = std::round(r);
  if (!(m >= 1.0) || std::abs(r - m) > 1e-6 * std::max(1.0, m))
    throw std::invalid_argument(std::string(what) + " must be a whole multiple (>= 1) of " + std::to_string(unit));
  return static_cast<std::size_t>(m);
}

// Phase (time deviation) from mean-removed fractional frequency.
std::vector<double> phase_from(const FreqSeries& y) {
  const auto& v = y.samples;
  const double mean = v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  std::vector<double> x(v.size() + 1, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) x[i + 1] = x[i] + (v[i] - mean) * y.gate;
  return x;
}

void require_series(const FreqSeries& y) {
  if (!(y.gate > 0.0)) throw std::invalid_argument("frequency series gate must be positive");
  if (!(y.carrier > 0.0)) throw std::invalid_argument("frequency series carrier must be positive");
}

}  // namespace

FreqSeries lambda_count(const BeatNote& b, double gate, double carrier, Weighting w) {
  if (!(carrier > 0.0)) throw std::invalid_argument("counter carrier must be positive");
  const double fs = b.phase.sample_rate;
  const std::size_t per = whole_multiple(gate * fs, 1.0, "gate * sample rate");
  const auto& p = b.phase.samples;
  if (p.size() < 2 * per) throw std::invalid_argument("record shorter than two gates");
  FreqSeries out;
  out.gate = gate;
  out.carrier = carrier;
  out.weighting = w;
  const double scale = 1.0 / (2.0 * std::numbers::pi * carrier * gate);
  if (w == Weighting::lambda) {
    const std::size_t blocks = p.size() / per;
    std::vector<double> means(blocks);
    for (std::size_t k = 0; k < blocks; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < per; ++j) acc += p[k * per + j];
      means[k] = acc / static_cast<double>(per);
    }
    out.samples.resize(blocks - 1);
    for (std::size_t k = 0; k + 1 < blocks; ++k) out.samples[k] = (means[k + 1] - means[k]) * scale;
  } else {
    const std::size_t count = (p.size() - 1) / per;
    out.samples.resize(count);
    for (std::size_t k = 0; k < count; ++k) out.samples[k] = (p[(k + 1) * per] - p[k * per]) * scale;
  }
  return out;
}

Psd welch_psd(const PhaseTimeline& x, std::size_t segment_len, double overlap, Detrend detrend) {
  const std::size_t n = x.size();
  if (segment_len < 4 || segment_len > n) throw std::invalid_argument("Welch segment length must be in [4, n]");
  if (!(overlap >= 0.0 && overlap <= 0.9)) throw std::invalid_argument("Welch overlap must be in [0, 0.9]");
  const std::size_t step = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(segment_len * (1.0 - overlap))));
  const std::size_t segments = 1 + (n - segment_len) / step;
  const double fs = x.sample_rate;

  std::vector<double> w(segment_len);
  double w2 = 0.0;
  for (std::size_t i = 0; i < segment_len; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(segment_len));
    w2 += w[i] * w[i];
  }
  RealFft fft(segment_len);
  const std::size_t bins = fft.bins();
  std::vector<double> acc(bins, 0.0);
  const double ln = static_cast<double>(segment_len);
  const double tmean = (ln - 1.0) / 2.0;
  double tvar = 0.0;
  for (std::size_t i = 0; i < segment_len; ++i) tvar += (i - tmean) * (i - tmean);

  for (std::size_t s = 0; s < segments; ++s) {
    const double* seg = x.samples.data() + s * step;
    double a = 0.0, b = 0.0;
    if (detrend != Detrend::none) {
      double sum = 0.0;
      for (std::size_t i = 0; i < segment_len; ++i) sum += seg[i];
      a = sum / ln;
      if (detrend == Detrend::linear) {
        double cov = 0.0;
        for (std::size_t i = 0; i < segment_len; ++i) cov += (i - tmean) * (seg[i] - a);
        b = cov / tvar;
      }
    }
    auto re = fft.real();
    for (std::size_t i = 0; i < segment_len; ++i) re[i] = (seg[i] - a - b * (i - tmean)) * w[i];
    fft.forward();
    auto sp = fft.spectrum();
    for (std::size_t k = 0; k < bins; ++k) acc[k] += std::norm(sp[k]);
  }
  Psd out;
  out.freq_hz.resize(bins);
  out.density.resize(bins);
  const double scale = 1.0 / (fs * w2 * static_cast<double>(segments));
  for (std::size_t k = 0; k < bins; ++k) {
    const bool edge = k == 0 || (segment_len % 2 == 0 && k == bins - 1);
    out.freq_hz[k] = static_cast<double>(k) * fs / ln;
    out.density[k] = acc[k] * scale * (edge ? 1.0 : 2.0);
  }
  return out;
}

Psd log_bin(const Psd& psd, int bins_per_decade) {
  if (bins_per_decade < 1) throw std::invalid_argument("log binning needs >= 1 bin per decade");
  Psd out;
  long current = 0;
  bool open = false;
  double fsum = 0.0, dsum = 0.0;
  std::size_t count = 0;
  auto flush = [&] {
    if (count) {
      out.freq_hz.push_back(fsum / static_cast<double>(count));
      out.density.push_back(dsum / static_cast<double>(count));
    }
    fsum = dsum = 0.0;
    count = 0;
  };
  for (std::size_t k = 0; k < psd.freq_hz.size(); ++k) {
    const double f = psd.freq_hz[k];
    if (!(f > 0.0)) continue;
    const long bin = static_cast<long>(std::floor(std::log10(f) * bins_per_decade + 1e-9));
    if (!open || bin != current) {
      flush();
      current = bin;
      open = true;
    }
    fsum += f;
    dsum += psd.density[k];
    ++count;
  }
  flush();
  return out;
}

double band_mean(const Psd& psd, double f_lo, double f_hi) {
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < psd.freq_hz.size(); ++k)
    if (psd.freq_hz[k] >= f_lo && psd.freq_hz[k] <= f_hi) {
      acc += psd.density[k];
      ++count;
    }
  if (!count) throw std::invalid_argument("no PSD bins inside the requested band");
  return acc / static_cast<double>(count);
}

std::optional<double> StabilityCurve::at(double tau) const {
  for (std::size_t i = 0; i < taus.size(); ++i)
    if (std::abs(taus[i] - tau) <= 1e-9 * tau) return values[i];
  return std::nullopt;
}

std::vector<double> octave_taus(const FreqSeries& y, const std::vector<double>& extra) {
  const double record = static_cast<double>(y.samples.size()) * y.gate;
  std::vector<double> taus;
  for (double t = y.gate; t <= record / 5.0 * (1.0 + 1e-12); t *= 2.0) taus.push_back(t);
  const std::size_t max_m = y.samples.size() / 2;
  for (double t : extra) {
    const double m = std::round(t / y.gate);
    if (m >= 1.0 && static_cast<std::size_t>(m) <= max_m && std::abs(t / y.gate - m) < 1e-9 * m)
      taus.push_back(m * y.gate);
  }
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end(), [](double a, double b) { return std::abs(a - b) <= 1e-9 * b; }),
             taus.end());
  return taus;
}

namespace {

StabilityCurve deviation(const FreqSeries& y, const std::vector<double>& taus, Estimator est) {
  require_series(y);
  StabilityCurve curve;
  curve.estimator = est;
  const std::vector<double> x = phase_from(y);
  const std::size_t n = x.size();
  const double t0 = y.gate;
  std::vector<double> d;
  for (double tau : taus) {
    const std::size_t m = whole_multiple(tau, t0, "tau");
    const std::size_t need = est == Estimator::oadev ? 2 * m + 1 : 3 * m;
    if (y.samples.empty() || n < need) {
      curve.skipped_taus.push_back(tau);
      continue;
    }
    const std::size_t nd = n - 2 * m;
    d.resize(nd);
    for (std::size_t i = 0; i < nd; ++i) d[i] = x[i + 2 * m] - 2.0 * x[i + m] + x[i];
    const double md = static_cast<double>(m);
    double sum = 0.0;
    std::size_t count = 0;
    if (est == Estimator::oadev) {
      for (double v : d) sum += v * v;
      count = nd;
      sum /= 2.0 * md * md * t0 * t0 * static_cast<double>(count);
    } else {
      count = n - 3 * m + 1;
      double window = 0.0;
      for (std::size_t i = 0; i < m; ++i) window += d[i];
      for (std::size_t j = 0; j < count; ++j) {
        if (j > 0) {
          if (j % 4096 == 0) {
            window = 0.0;
            for (std::size_t i = j; i < j + m; ++i) window += d[i];
          } else {
            window += d[j + m - 1] - d[j - 1];
          }
        }
        sum += window * window;
      }
      sum /= 2.0 * md * md * md * md * t0 * t0 * static_cast<double>(count);
    }
    const double value = std::sqrt(sum);
    curve.taus.push_back(md * t0);
    curve.values.push_back(value);
    curve.counts.push_back(count);
    curve.error_bars.push_back(value / std::sqrt(static_cast<double>(count)));
  }
  return curve;
}

}  // namespace

StabilityCurve oadev(const FreqSeries& y, const std::vector<double>& taus) { return deviation(y, taus, Estimator::oadev); }
StabilityCurve mdev(const FreqSeries& y, const std::vector<double>& taus) { return deviation(y, taus, Estimator::mdev); }

AccuracyResult accuracy(const FreqSeries& y, const StabilityCurve& curve) {
  if (y.samples.empty()) throw std::invalid_argument("accuracy needs a non-empty series");
  AccuracyResult r;
  r.mean_offset = std::accumulate(y.samples.begin(), y.samples.end(), 0.0) / static_cast<double>(y.samples.size());
  std::optional<std::size_t> pick;
  for (std::size_t i = 0; i < curve.taus.size(); ++i)
    if (curve.taus[i] >= 20000.0 - 1e-9 && curve.taus[i] <= 30000.0 + 1e-9) pick = i;
  if (!pick) {
    r.caveat = true;
    if (!curve.taus.empty()) pick = curve.taus.size() - 1;
    spdlog::info("accuracy: no tau in [20000, 30000] s, uncertainty taken at {} s",
                 pick ? curve.taus[*pick] : 0.0);
  }
  if (pick) {
    r.uncertainty = curve.values[*pick];
    r.tau_used = curve.taus[*pick];
  }
  return r;
}

double f_factor(const StabilityCurve& ext, const StabilityCurve& main, double tau) {
  const auto a = ext.at(tau);
  const auto b = main.at(tau);
  if (!a || !b) throw std::invalid_argument("F-factor: both curves need tau = " + std::to_string(tau) + " s");
  if (!(*b > 0.0)) throw std::invalid_argument("F-factor: main-link deviation is zero");
  const double r = *a / *b;
  return r * r;
}

std::vector<std::size_t> detect_cycle_slips(const BeatNote& b, double threshold) {
  std::vector<std::size_t> idx;
  const auto& p = b.phase.samples;
  for (std::size_t i = 1; i < p.size(); ++i)
    if (std::abs(p[i] - p[i - 1]) > threshold) idx.push_back(i);
  return idx;
}

StabilityReport analyse_beat(const std::string& name, const BeatNote& b, double gate, double carrier,
                             std::optional<double> tracking_bandwidth) {
  StabilityReport r;
  r.name = name;
  const BeatNote tracked = tracking_bandwidth ? tracking_filter(b, *tracking_bandwidth) : b;
  r.slip_count = detect_cycle_slips(tracked).size();
  r.series = lambda_count(tracked, gate, carrier);
  const auto taus = octave_taus(r.series, {10000.0, 20000.0, 30000.0});
  r.mdev = mdev(r.series, taus);
  r.oadev = oadev(r.series, taus);
  const auto acc = accuracy(r.series, r.oadev);
  r.mean_offset = acc.mean_offset;
  r.offset_uncertainty = acc.uncertainty;
  return r;
}

}  // namespace fibrenet

#include "fibrenet/csv.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "fibrenet/errors.hpp"

namespace fibrenet {

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void write_psd_csv(const std::filesystem::path& path, const Psd& psd) {
  std::ostringstream s;
  s << "freq_hz,psd_rad2_hz\n";
  for (std::size_t i = 0; i < psd.freq_hz.size(); ++i)
    s << format_number(psd.freq_hz[i]) << ',' << format_number(psd.density[i]) << '\n';
  write_text(path, s.str());
}

void write_stability_csv(const std::filesystem::path& path, const StabilityCurve& mdev_curve,
                         const StabilityCurve& oadev_curve) {
  struct Row {
    std::string mdev, oadev;
    std::size_t count = 0;
  };
  std::map<double, Row> rows;
  for (std::size_t i = 0; i < mdev_curve.taus.size(); ++i) {
    auto& r = rows[mdev_curve.taus[i]];
    r.mdev = format_number(mdev_curve.values[i]);
    r.count = mdev_curve.counts[i];
  }
  for (std::size_t i = 0; i < oadev_curve.taus.size(); ++i) {
    auto& r = rows[oadev_curve.taus[i]];
    r.oadev = format_number(oadev_curve.values[i]);
    if (r.mdev.empty()) r.count = oadev_curve.counts[i];
  }
  std::ostringstream s;
  s << "tau_s,mdev,oadev,count\n";
  for (const auto& [tau, r] : rows) s << format_number(tau) << ',' << r.mdev << ',' << r.oadev << ',' << r.count << '\n';
  write_text(path, s.str());
}

void write_freq_series_csv(const std::filesystem::path& path, const FreqSeries& y) {
  std::ostringstream s;
  s << "t_s,y\n";
  for (std::size_t i = 0; i < y.samples.size(); ++i)
    s << format_number(static_cast<double>(i + 1) * y.gate) << ',' << format_number(y.samples[i]) << '\n';
  write_text(path, s.str());
}

}  // namespace fibrenet

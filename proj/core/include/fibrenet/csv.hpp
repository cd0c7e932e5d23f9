#pragma once

#include <filesystem>
#include <string>

#include "fibrenet/metrology.hpp"

namespace fibrenet {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

// Writers throw IoError when the file cannot be written.
void write_psd_csv(const std::filesystem::path& path, const Psd& psd);
void write_stability_csv(const std::filesystem::path& path, const StabilityCurve& mdev_curve,
                         const StabilityCurve& oadev_curve);
void write_freq_series_csv(const std::filesystem::path& path, const FreqSeries& y);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fibrenet

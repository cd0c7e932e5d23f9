#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fibrenet/scenarios.hpp"

namespace fibrenet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitIo = 4;

struct RunManifest {
  std::string scenario;
  std::string config_hash;  // SHA-256 of serialize_config
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> outputs;  // relative to the output directory, sorted
  double wall_clock_s = 0.0;
};

struct RunOptions {
  int jobs = 1;
  bool deterministic = false;  // forced by SIM_DETERMINISTIC=1
};

std::string sha256_hex(const std::string& data);

/// Runs `jobs` consecutive seeds (seed, seed + 1, ...); with more than one
/// job every output file name gets a _seed<N> suffix. Writes the resolved
/// config, CSVs, summary.txt and manifest.json into `out`.
RunManifest run(const Scenario& s, const std::filesystem::path& out, const RunOptions& opt = {});

std::string manifest_json(const RunManifest& m);

/// Text of summary.txt for one report.
std::string summary_text(const Scenario& s, const ScenarioReport& r);

}  // namespace fibrenet::cli

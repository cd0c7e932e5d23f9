#include "fibrenet/cli/runner.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "fibrenet/cli/config.hpp"
#include "fibrenet/csv.hpp"
#include "fibrenet/errors.hpp"

namespace fibrenet::cli {

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string summary_text(const Scenario& s, const ScenarioReport& r) {
  std::ostringstream o;
  o << "scenario: " << s.name << " (" << to_string(s.kind) << ", engine " << to_string(s.engine) << ", seed "
    << s.seed << ")\n";
  if (!s.description.empty()) o << s.description << "\n";
  o << "\n";
  for (const auto& line : r.summary) o << line << "\n";
  if (!r.offsets.empty()) {
    o << "\nnominal offsets from nu0 (Hz):\n";
    for (const auto& [k, v] : r.offsets) o << "  " << k << " = " << format_frequency(v) << "\n";
  }
  if (!r.metrics.empty()) {
    o << "\nmetrics:\n";
    for (const auto& [k, v] : r.metrics) o << "  " << k << " = " << format_number(v) << "\n";
  }
  return o.str();
}

namespace {

std::vector<std::string> write_report(const Scenario& s, const ScenarioReport& r, const std::filesystem::path& out,
                                      const std::string& suffix) {
  std::vector<std::string> files;
  auto emit = [&](const std::string& name) {
    files.push_back(name);
    return out / name;
  };
  for (const auto& p : r.psds) write_psd_csv(emit("psd_" + p.name + suffix + ".csv"), p.psd);
  for (const auto& st : r.stability) {
    write_stability_csv(emit("stability_" + st.name + suffix + ".csv"), st.mdev, st.oadev);
    write_freq_series_csv(emit("freq_series_" + st.name + suffix + ".csv"), st.series);
  }
  write_text(emit("summary" + suffix + ".txt"), summary_text(s, r));
  return files;
}

}  // namespace

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["scenario"] = m.scenario;
  j["config_sha256"] = m.config_hash;
  j["seeds"] = m.seeds;
  j["engine_versions"] = {{"fibrenet", "0.1.0"}, {"fast", "time-domain-1"}, {"slow", "closed-loop-spectral-1"}};
  j["outputs"] = m.outputs;
  j["wall_clock_s"] = m.wall_clock_s;
  return j.dump(2) + "\n";
}

RunManifest run(const Scenario& s, const std::filesystem::path& out, const RunOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  if (opt.jobs < 1) throw ConfigError("--jobs must be >= 1");
  s.validate();
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec || !std::filesystem::is_directory(out)) throw IoError("cannot create output directory " + out.string());

  RunManifest m;
  m.scenario = s.name;
  const std::string config = serialize_config(s);
  m.config_hash = sha256_hex(config);
  write_text(out / "config.yaml", config);
  m.outputs.push_back("config.yaml");

  std::vector<Scenario> jobs;
  for (int k = 0; k < opt.jobs; ++k) {
    Scenario j = s;
    j.seed = s.seed + static_cast<std::uint64_t>(k);
    jobs.push_back(j);
    m.seeds.push_back(j.seed);
  }
  auto suffix = [&](const Scenario& j) { return opt.jobs > 1 ? "_seed" + std::to_string(j.seed) : std::string(); };

  std::vector<std::vector<std::string>> files(jobs.size());
  if (opt.deterministic || jobs.size() == 1) {
    for (std::size_t k = 0; k < jobs.size(); ++k)
      files[k] = write_report(jobs[k], run_scenario(jobs[k]), out, suffix(jobs[k]));
  } else {
    std::vector<std::future<std::vector<std::string>>> fut;
    for (const auto& j : jobs)
      fut.push_back(std::async(std::launch::async, [&, j] { return write_report(j, run_scenario(j), out, suffix(j)); }));
    for (std::size_t k = 0; k < fut.size(); ++k) files[k] = fut[k].get();
  }
  for (auto& f : files) m.outputs.insert(m.outputs.end(), f.begin(), f.end());
  m.outputs.push_back("manifest.json");
  std::sort(m.outputs.begin(), m.outputs.end());
  m.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_text(out / "manifest.json", manifest_json(m));
  spdlog::info("{}: {} files written to {}", s.name, m.outputs.size(), out.string());
  return m;
}

}  // namespace fibrenet::cli

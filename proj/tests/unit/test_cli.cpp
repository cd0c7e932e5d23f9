#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fibrenet_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int sim(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + SIM_BINARY + " " + args + " > " + (dir_ / "stdout.txt").string() + " 2> " +
                            (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string out() const { return slurp(dir_ / "stdout.txt"); }
  std::string err() const { return slurp(dir_ / "stderr.txt"); }

  fs::path dir_;
};

std::string without_wall_clock(const std::string& text) {
  std::istringstream in(text);
  std::string line, kept;
  while (std::getline(in, line))
    if (line.find("wall_clock") == std::string::npos) kept += line + "\n";
  return kept;
}

}  // namespace

TEST_F(Cli, ListsPresets) {
  EXPECT_EQ(sim("presets"), 0);
  for (const char* p : {"paper-50km-midpoint", "paper-section5-input", "lo-sensitivity", "arm-matching"})
    EXPECT_NE(out().find(p), std::string::npos) << p;
}

TEST_F(Cli, CheckAcceptsPresetAndRejectsBadConfig) {
  EXPECT_EQ(sim("check --preset paper-50km"), 0);
  const auto bad = write("bad.yaml", "preset: paper-50km\nplan: {f1_hz: \"50000000\"}\n");
  EXPECT_EQ(sim("check " + bad), 2);
  EXPECT_NE(err().find("f1 + f2 = 75000000"), std::string::npos) << err();
  const auto typo = write("typo.yaml", "preset: paper-50km\nmain_span: {lenght_km: 40}\n");
  EXPECT_EQ(sim("run " + typo + " --out " + (dir_ / "o").string()), 2);
  EXPECT_NE(err().find("main_span.lenght_km"), std::string::npos);
  EXPECT_EQ(sim("run --out " + (dir_ / "o").string()), 2);
  EXPECT_EQ(sim("run --preset paper-50km --engine warp"), 2);
}

TEST_F(Cli, MissingConfigAndUnwritableOutputAreIoErrors) {
  EXPECT_EQ(sim("run " + (dir_ / "missing.yaml").string()), 4);
  const auto blocker = write("blocker", "x");
  EXPECT_EQ(sim("run --preset lo-sensitivity --out " + blocker + "/sub"), 4);
}

TEST_F(Cli, DivergentServoExitsWithThree) {
  const auto cfg = write("div.yaml",
                         "preset: paper-50km\n"
                         "scenario: {engine: fast}\n"
                         "engine: {fast: {duration_s: 1}}\n"
                         "servos: {main: {gain_scale: 40}}\n");
  EXPECT_EQ(sim("run " + cfg + " --out " + (dir_ / "o").string()), 3);
  EXPECT_NE(err().find("diverged"), std::string::npos) << err();
}

TEST_F(Cli, InputExtractionSummaryHasThreeFFactors) {
  const auto cfg = write("s5.yaml", "preset: paper-section5-input\nengine: {slow: {duration_s: 5000}}\n");
  const auto o = dir_ / "o";
  ASSERT_EQ(sim("run " + cfg + " --out " + o.string()), 0) << err();
  const std::string summary = slurp(o / "summary.txt");
  std::size_t count = 0;
  for (std::size_t p = summary.find("F-factor"); p != std::string::npos; p = summary.find("F-factor", p + 1)) ++count;
  EXPECT_EQ(count, 3u) << summary;
  for (const char* f : {"config.yaml", "manifest.json", "stability_main_free.csv", "freq_series_ext_optimal.csv"})
    EXPECT_TRUE(fs::exists(o / f)) << f;
}

TEST_F(Cli, FastEngineWritesSpectra) {
  const auto cfg = write("fast.yaml",
                         "preset: paper-50km\nscenario: {engine: fast}\nengine: {fast: {duration_s: 12}}\n");
  const auto o = dir_ / "o";
  ASSERT_EQ(sim("run " + cfg + " --out " + o.string()), 0) << err();
  for (const char* f : {"psd_main_free.csv", "psd_main_comp.csv", "psd_ext_free.csv", "psd_ext_comp.csv"})
    EXPECT_TRUE(fs::exists(o / f)) << f;
  std::ifstream in(o / "psd_main_comp.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_NE(header.find("freq"), std::string::npos) << header;
}

TEST_F(Cli, DeterministicRunsAreByteIdentical) {
  const auto cfg = write("s5.yaml", "preset: paper-section5-input\nengine: {slow: {duration_s: 5000}}\n");
  const auto a = dir_ / "a", b = dir_ / "b";
  ASSERT_EQ(sim("run " + cfg + " --out " + a.string() + " --jobs 2", "SIM_DETERMINISTIC=1"), 0) << err();
  ASSERT_EQ(sim("run " + cfg + " --out " + b.string() + " --jobs 2", "SIM_DETERMINISTIC=1"), 0) << err();
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const auto name = e.path().filename();
    ASSERT_TRUE(fs::exists(b / name)) << name;
    if (name == "manifest.json")
      EXPECT_EQ(without_wall_clock(slurp(e.path())), without_wall_clock(slurp(b / name)));
    else
      EXPECT_EQ(slurp(e.path()), slurp(b / name)) << name;
    ++files;
  }
  EXPECT_GT(files, 10u);
  EXPECT_TRUE(fs::exists(a / "summary_seed1.txt") || fs::exists(a / "summary.txt"));
}

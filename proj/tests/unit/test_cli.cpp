#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "vslcav/feed_http.hpp"

namespace fs = std::filesystem;
using namespace vslcav;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("vslcav_cli_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct Result {
  int code;
  std::string out;
};

Result cli(const std::string& args, const TempDir& dir) {
  const fs::path log = dir.path() / "stdout.txt";
  const std::string cmd = std::string(VSLCAV_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream buf;
  buf << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, buf.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST(Cli, UsageErrors) {
  TempDir d;
  EXPECT_EQ(cli("", d).code, 1);
  EXPECT_EQ(cli("frobnicate", d).code, 1);
  EXPECT_EQ(cli("run", d).code, 1);
  EXPECT_EQ(cli("run -s fig7_three_cases --transport pigeon", d).code, 1);
  EXPECT_EQ(cli("inject -g A --mph 90", d).code, 1);
  EXPECT_EQ(cli("--help", d).code, 0);
}

TEST(Cli, ValidationErrors) {
  TempDir d;
  const fs::path bad = d.path() / "bad.yaml";
  std::ofstream(bad) << "name: bad\nduration_s: nope\ncorridor:\n  start_mile_marker: 60\n  end_mile_marker: 58\n"
                         "  gantries: [{id: A, mile_marker: 59}]\nvehicles: [{name: e, kind: cav, mile_marker: 59.9, speed: 10}]\n";
  const auto r = cli("validate " + bad.string(), d);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("bad.yaml:2:"), std::string::npos) << r.out;
  EXPECT_EQ(cli("validate fig7_three_cases feed_fault", d).code, 0);
  EXPECT_EQ(cli("run -s fig7_three_cases --set controller.k_p=-1 -o " + d.path().string(), d).code, 2);
  EXPECT_EQ(cli("run -s fig7_three_cases --set nonsense -o " + d.path().string(), d).code, 2);
}

TEST(Cli, IoErrors) {
  TempDir d;
  EXPECT_EQ(cli("run -s " + (d.path() / "missing.yaml").string(), d).code, 4);
  EXPECT_EQ(cli("report " + (d.path() / "missing.json").string(), d).code, 4);
}

TEST(Cli, ScenariosListsBundledNames) {
  TempDir d;
  const auto r = cli("scenarios", d);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("fig7_three_cases"), std::string::npos);
  EXPECT_NE(r.out.find("table1_wave_comparison"), std::string::npos);
}

TEST(Cli, RunIsReproducibleAndReportReadsSummary) {
  TempDir d;
  const fs::path a = d.path() / "a";
  const fs::path b = d.path() / "b";
  ASSERT_EQ(cli("run -s fig8_set_and_hold -o " + a.string(), d).code, 0);
  ASSERT_EQ(cli("run -s fig8_set_and_hold -o " + b.string(), d).code, 0);
  for (const char* f : {"trace.csv", "events.csv", "run_summary.json", "report.md", "speed_profile.csv",
                        "controller_state.csv", "plot.py"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const auto r = cli("report " + (a / "run_summary.json").string(), d);
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("| rise |"), std::string::npos) << r.out;

  const auto t = cli("report " + (a / "trace.csv").string() + " --segments 63.0:64.5 -o " + (d.path() / "r").string(), d);
  EXPECT_EQ(t.code, 0) << t.out;
  EXPECT_TRUE(fs::exists(d.path() / "r" / "report.md"));
  EXPECT_EQ(cli("report " + (a / "trace.csv").string() + " --segments 10:20", d).code, 2);
}

TEST(Cli, ServeOnBusyPortIsAnIoError) {
  TempDir d;
  FeedService service({{"A", 59.5, 70.0}}, FeedConfig{});
  FeedHttpServer http(service, [] { return 0.0; });
  const int port = http.start("127.0.0.1", 0);
  EXPECT_EQ(cli("serve -s fig7_three_cases --port " + std::to_string(port), d).code, 4);
  http.stop();
}

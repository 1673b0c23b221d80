#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::string data(const std::string& rel) { return std::string(ZONESIM_DATA_DIR) + "/" + rel; }

struct Result {
  int code = -1;
  std::string out;
};

fs::path workdir() {
  static const fs::path p = [] {
    const fs::path d = fs::temp_directory_path() / "zonesim_cli_it";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result zonesim(const std::string& args) {
  const fs::path out = workdir() / "stdout.txt";
  const std::string cmd = std::string("ZONESIM_LOG=quiet '") + ZONESIM_CLI + "' " + args + " > '" + out.string() + "' 2>&1";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out)};
}

const std::string kDumbbell = "--layout " + data("fixtures/dumbbell_layout.json") + " --scenario " +
                              data("fixtures/dumbbell_scenario.json");

std::string two_robot_config() {
  const fs::path p = workdir() / "two.json";
  std::ofstream(p) << R"({"schema_version": "1.0", "robots": 2})";
  return p.string();
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(zonesim("--help").code, 0);
  EXPECT_NE(zonesim("frobnicate").code, 0);
  EXPECT_EQ(zonesim("simulate").code, 2);
}

TEST(Cli, OptimizeIsDeterministic) {
  const auto a = (workdir() / "a.json").string();
  const auto b = (workdir() / "b.json").string();
  const std::string base = "optimize " + kDumbbell + " --config " + two_robot_config() + " --method ga --seed 3 --out ";
  ASSERT_EQ(zonesim(base + a).code, 0);
  ASSERT_EQ(zonesim(base + b).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  const std::string progress = slurp(workdir() / "a_progress.csv");
  ASSERT_EQ(progress.rfind("step,current,best\n", 0), 0u);
  std::istringstream rows(progress.substr(progress.find('\n') + 1));
  std::string row;
  double prev = 1e300;
  while (std::getline(rows, row)) {
    const double best = std::stod(row.substr(row.rfind(',') + 1));
    EXPECT_LE(best, prev);
    prev = best;
  }
}

TEST(Cli, ExitCodes) {
  const std::string cfg = " --config " + two_robot_config();
  const auto p = (workdir() / "p.json").string();
  EXPECT_EQ(zonesim("optimize " + kDumbbell + cfg + " --method sa --out " + p).code, 0);
  // More zones than workstations.
  EXPECT_EQ(zonesim("optimize " + kDumbbell + cfg + " --method sa --nz 9 --out " + p).code, 3);
  // sa needs a starting design.
  EXPECT_EQ(zonesim("simulate " + kDumbbell + cfg + " --method sa --out " + (workdir() / "nope").string()).code, 2);
  // A layout that does not match the partition.
  EXPECT_EQ(zonesim("simulate --layout " + data("floor18.json") + " --scenario " + data("scenario_floor18.json") +
                    " --partition " + p + " --out " + (workdir() / "bad").string())
                .code,
            2);
  const fs::path broken = workdir() / "broken.json";
  std::ofstream(broken) << "{ \"schema_version\": \"1.0\", \"points\": [ }";
  EXPECT_EQ(zonesim("simulate --layout " + broken.string() + " --scenario " + data("scenario_floor18.json")).code, 2);
  // Time cap.
  const fs::path capped = workdir() / "capped.json";
  std::ofstream(capped) << R"({"schema_version": "1.0", "robots": 2, "time_cap_minutes": 1})";
  EXPECT_EQ(zonesim("simulate " + kDumbbell + " --config " + capped.string() + " --out " + (workdir() / "cap").string()).code, 1);
}

TEST(Cli, SimulateWithPartitionAndReplay) {
  const auto p = (workdir() / "design.json").string();
  const std::string cfg = " --config " + two_robot_config();
  ASSERT_EQ(zonesim("optimize " + kDumbbell + cfg + " --method ga --out " + p).code, 0);
  const auto dir = (workdir() / "ga-run").string();
  const auto r = zonesim("simulate " + kDumbbell + cfg + " --method ga --partition " + p + " --out " + dir);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("parts=10/10"), std::string::npos) << r.out;
  const auto manifest = nlohmann::json::parse(slurp(fs::path(dir) / "manifest.json"));
  EXPECT_EQ(manifest["method"], "ga");
  EXPECT_FALSE(manifest["partition"].is_null());
  EXPECT_EQ(zonesim("simulate --replay " + dir).code, 0);

  // Tampered metrics no longer replay.
  auto metrics = nlohmann::json::parse(slurp(fs::path(dir) / "metrics.json"));
  metrics["parts_completed"] = 3;
  std::ofstream(fs::path(dir) / "metrics.json") << metrics.dump(2) << "\n";
  EXPECT_EQ(zonesim("simulate --replay " + dir).code, 1);
}

TEST(Cli, EmptyScenarioCompletes) {
  const fs::path s = workdir() / "empty.json";
  std::ofstream(s) << R"({"schema_version": "1.0", "name": "empty", "part_types": []})";
  const auto r = zonesim("simulate --layout " + data("fixtures/dumbbell_layout.json") + " --scenario " + s.string() +
                         " --config " + two_robot_config() + " --method ddz --out " + (workdir() / "empty").string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("parts=0/0"), std::string::npos) << r.out;
}

TEST(Cli, MatrixWritesEveryRunAndAReport) {
  const auto out = workdir() / "matrix";
  const auto r = zonesim("simulate " + kDumbbell + " --config " + two_robot_config() + " --matrix 3 --jobs 3 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  int manifests = 0;
  for (const char* m : {"sa", "ga", "ddz"}) {
    for (int s = 1; s <= 3; ++s) manifests += fs::exists(out / (std::string(m) + "-seed" + std::to_string(s)) / "manifest.json");
  }
  EXPECT_EQ(manifests, 9);
  EXPECT_TRUE(fs::exists(out / "report.csv"));
  EXPECT_TRUE(fs::exists(out / "report_throughput.csv"));
  EXPECT_NE(r.out.find("NA"), std::string::npos);

  // Same matrix on one thread gives byte-identical logs.
  const auto serial = workdir() / "matrix_serial";
  ASSERT_EQ(zonesim("simulate " + kDumbbell + " --config " + two_robot_config() + " --matrix 3 --jobs 1 --out " + serial.string()).code, 0);
  for (const char* m : {"sa", "ga", "ddz"}) {
    for (int s = 1; s <= 3; ++s) {
      const std::string run = std::string(m) + "-seed" + std::to_string(s);
      EXPECT_EQ(slurp(out / run / "events.jsonl"), slurp(serial / run / "events.jsonl")) << run;
    }
  }
  EXPECT_EQ(zonesim("report " + (out / "sa-seed1").string() + " " + (out / "ddz-seed2").string()).code, 0);
}

TEST(Cli, ReportRefusesMixedScenarios) {
  const auto a = (workdir() / "mix-a").string();
  const auto b = (workdir() / "mix-b").string();
  ASSERT_EQ(zonesim("simulate " + kDumbbell + " --config " + two_robot_config() + " --out " + a).code, 0);
  const fs::path s = workdir() / "other_scenario.json";
  std::ofstream(s) << R"({"schema_version": "1.0", "name": "other", "part_types": [{"type": "Q", "route": [1, 4], "quantity": 1}]})";
  ASSERT_EQ(zonesim("simulate --layout " + data("fixtures/dumbbell_layout.json") + " --scenario " + s.string() +
                    " --config " + two_robot_config() + " --out " + b)
                .code,
            0);
  EXPECT_EQ(zonesim("report " + a + " " + b).code, 2);
}

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "zonesim/zonesim.h"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kFailure = 1, kInvalid = 2, kInfeasible = 3, kDeadlock = 4 };

enum class Verbosity { kQuiet, kInfo, kDebug };

Verbosity verbosity() {
  const char* v = std::getenv("ZONESIM_LOG");
  if (!v) return Verbosity::kInfo;
  const std::string s(v);
  if (s == "quiet" || s == "error" || s == "0") return Verbosity::kQuiet;
  if (s == "debug" || s == "2") return Verbosity::kDebug;
  return Verbosity::kInfo;
}

std::mutex g_log_mutex;

void log_info(const std::string& msg) {
  if (verbosity() == Verbosity::kQuiet) return;
  std::lock_guard lock(g_log_mutex);
  std::cerr << "zonesim: " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (verbosity() != Verbosity::kDebug) return;
  std::lock_guard lock(g_log_mutex);
  std::cerr << "zonesim[debug]: " << msg << "\n";
}

int exit_code(zs_status s) {
  switch (s) {
    case ZS_OK:
      return kOk;
    case ZS_ERR_INVALID_ARGUMENT:
    case ZS_ERR_PARSE:
    case ZS_ERR_VALIDATION:
    case ZS_ERR_INCOMPATIBLE:
      return kInvalid;
    case ZS_ERR_INFEASIBLE:
      return kInfeasible;
    case ZS_ERR_DEADLOCK:
      return kDeadlock;
    default:
      return kFailure;
  }
}

struct CallFailed {
  zs_status status;
};

void check(zs_status s, const std::string& what) {
  if (s == ZS_OK) return;
  std::lock_guard lock(g_log_mutex);
  std::cerr << "zonesim: " << what << " failed (" << zs_status_name(s) << "): " << zs_last_error() << "\n";
  throw CallFailed{s};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Layout = std::unique_ptr<zs_layout, Deleter<zs_layout, zs_layout_free>>;
using ScenarioH = std::unique_ptr<zs_scenario, Deleter<zs_scenario, zs_scenario_free>>;
using Config = std::unique_ptr<zs_config, Deleter<zs_config, zs_config_free>>;
using Partition = std::unique_ptr<zs_partition, Deleter<zs_partition, zs_partition_free>>;
using Run = std::unique_ptr<zs_run, Deleter<zs_run, zs_run_free>>;

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { zs_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

Layout open_layout(const std::string& path) {
  zs_layout* h = nullptr;
  check(zs_layout_load(path.c_str(), &h), "loading layout " + path);
  return Layout(h);
}

ScenarioH open_scenario(const std::string& path) {
  zs_scenario* h = nullptr;
  check(zs_scenario_load(path.c_str(), &h), "loading scenario " + path);
  return ScenarioH(h);
}

Config open_config(const std::string& path) {
  zs_config* h = nullptr;
  check(zs_config_load(path.empty() ? nullptr : path.c_str(), &h), "loading config " + path);
  return Config(h);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "zonesim: cannot write " << path << "\n";
    throw CallFailed{ZS_ERR_IO};
  }
}

struct OptimizeArgs {
  std::string layout, scenario, config, method = "sa", out;
  int nz = 0;
  std::uint64_t seed = 1;
};

int cmd_optimize(const OptimizeArgs& a) {
  auto layout = open_layout(a.layout);
  auto scenario = open_scenario(a.scenario);
  auto config = open_config(a.config);
  int nz = a.nz;
  if (nz <= 0) check(zs_config_get_robots(config.get(), &nz), "reading robot count");
  log_info("optimizing " + std::to_string(nz) + " zone(s) with " + a.method + ", seed " + std::to_string(a.seed));
  zs_partition* raw = nullptr;
  OwnedString progress;
  double objective = 0.0;
  check(zs_optimize(layout.get(), scenario.get(), config.get(), a.method.c_str(), nz, a.seed, &raw, &progress.p,
                    &objective),
        "optimize");
  Partition part(raw);
  OwnedString report;
  const zs_status valid = zs_partition_validate(layout.get(), part.get(), nz, &report.p);
  if (valid != ZS_OK) {
    std::cerr << "zonesim: optimized partition is invalid:\n" << report.str();
    return exit_code(valid);
  }
  check(zs_partition_save(layout.get(), part.get(), a.out.c_str()), "writing " + a.out);
  fs::path progress_path(a.out);
  progress_path.replace_filename(progress_path.stem().string() + "_progress.csv");
  write_text(progress_path, progress.str());
  std::printf("%s zones=%d objective=%.6f partition=%s progress=%s\n", a.method.c_str(), nz, objective,
              a.out.c_str(), progress_path.string().c_str());
  return kOk;
}

struct SimulateArgs {
  std::string layout, scenario, config, method, partition, out = "runs", replay;
  std::uint64_t seed = 1;
  bool seed_given = false;
  bool train = false;
  int matrix = 0;
  int jobs = 0;
};

// Runs one simulation into dir; returns the exit code for its outcome.
int simulate_one(const zs_layout* layout, const zs_scenario* scenario, const std::string& config_path,
                 const std::string& method, std::uint64_t seed, bool seed_given, const std::string& partition_path,
                 bool train, const fs::path& dir) {
  auto config = open_config(config_path);
  if (!method.empty()) check(zs_config_set_method(config.get(), method.c_str()), "selecting method");
  if (seed_given) check(zs_config_set_seed(config.get(), seed), "setting seed");
  const char* m = nullptr;
  check(zs_config_get_method(config.get(), &m), "reading method");
  const std::string method_used(m);

  Partition initial;
  if (!partition_path.empty()) {
    zs_partition* raw = nullptr;
    check(zs_partition_load(layout, partition_path.c_str(), &raw), "loading partition " + partition_path);
    initial.reset(raw);
  } else if (method_used != "ddz" && !train) {
    std::cerr << "zonesim: method " << method_used << " needs an initial design: pass --partition or --train\n";
    return kInvalid;
  }

  log_info("simulating " + method_used + " into " + dir.string());
  zs_run* raw_run = nullptr;
  check(zs_simulate(layout, scenario, config.get(), initial.get(), &raw_run), "simulate");
  Run run(raw_run);
  check(zs_run_write(run.get(), dir.string().c_str()), "writing run to " + dir.string());
  OwnedString line;
  check(zs_run_summary(run.get(), &line.p), "summarizing run");
  {
    std::lock_guard lock(g_log_mutex);
    std::printf("%s\n", line.p);
    std::fflush(stdout);
  }
  switch (zs_run_get_status(run.get())) {
    case ZS_RUN_COMPLETED:
      return kOk;
    case ZS_RUN_DEADLOCK:
      std::cerr << "zonesim: deadlock detected, event log at " << (dir / "events.jsonl").string() << "\n";
      return kDeadlock;
    case ZS_RUN_TIME_CAP:
      std::cerr << "zonesim: time cap reached, event log at " << (dir / "events.jsonl").string() << "\n";
      return kFailure;
  }
  return kFailure;
}

int cmd_replay(const std::string& dir) {
  OwnedString metrics;
  int matches = 0;
  check(zs_replay(dir.c_str(), &metrics.p, &matches), "replay of " + dir);
  std::printf("%s\n", metrics.p);
  if (!matches) {
    std::cerr << "zonesim: replayed metrics differ from " << (fs::path(dir) / "metrics.json").string() << "\n";
    return kFailure;
  }
  log_info("replayed metrics match the stored report");
  return kOk;
}

int cmd_matrix(const SimulateArgs& a) {
  auto layout = open_layout(a.layout);
  auto scenario = open_scenario(a.scenario);
  struct Job {
    std::string method;
    std::uint64_t seed;
    fs::path dir;
  };
  std::vector<Job> jobs;
  const std::vector<std::string> methods = a.method.empty() ? std::vector<std::string>{"sa", "ga", "ddz"}
                                                            : std::vector<std::string>{a.method};
  for (int s = 1; s <= a.matrix; ++s) {
    for (const auto& m : methods) {
      const auto seed = static_cast<std::uint64_t>(s);
      jobs.push_back({m, seed, fs::path(a.out) / (m + "-seed" + std::to_string(s))});
    }
  }
  std::vector<int> codes(jobs.size(), kOk);
  std::atomic<std::size_t> next{0};
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = a.jobs > 0 ? static_cast<unsigned>(a.jobs) : std::min<unsigned>(hw, static_cast<unsigned>(jobs.size()));
  log_debug("matrix of " + std::to_string(jobs.size()) + " runs on " + std::to_string(workers) + " worker(s)");
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        codes[i] = simulate_one(layout.get(), scenario.get(), a.config, jobs[i].method, jobs[i].seed, true, "", true,
                                jobs[i].dir);
      } catch (const CallFailed& f) {
        codes[i] = exit_code(f.status);
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  std::vector<std::string> dirs;
  for (const auto& j : jobs) {
    if (fs::exists(j.dir / "manifest.json")) dirs.push_back(j.dir.string());
  }
  if (!dirs.empty()) {
    std::vector<const char*> ptrs;
    for (const auto& d : dirs) ptrs.push_back(d.c_str());
    OwnedString text;
    check(zs_report(ptrs.data(), ptrs.size(), a.out.c_str(), &text.p), "report");
    std::printf("%s", text.p);
  }
  for (int c : codes) {
    if (c != kOk) return c;
  }
  return kOk;
}

int cmd_simulate(const SimulateArgs& a) {
  if (!a.replay.empty()) return cmd_replay(a.replay);
  if (a.layout.empty() || a.scenario.empty()) {
    std::cerr << "zonesim: simulate needs --layout and --scenario\n";
    return kInvalid;
  }
  if (a.matrix > 0) return cmd_matrix(a);
  auto layout = open_layout(a.layout);
  auto scenario = open_scenario(a.scenario);
  return simulate_one(layout.get(), scenario.get(), a.config, a.method, a.seed, a.seed_given, a.partition, a.train,
                      a.out);
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& out) {
  std::vector<const char*> ptrs;
  for (const auto& d : dirs) ptrs.push_back(d.c_str());
  OwnedString text;
  check(zs_report(ptrs.data(), ptrs.size(), out.empty() ? nullptr : out.c_str(), &text.p), "report");
  std::printf("%s", text.p);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zone design and multi-robot delivery simulation"};
  app.set_version_flag("--version", std::string(zs_version()));
  app.require_subcommand(1);

  OptimizeArgs opt;
  auto* optimize = app.add_subcommand("optimize", "Design an initial zone partition offline");
  optimize->add_option("--layout", opt.layout, "Floor layout JSON")->required();
  optimize->add_option("--scenario", opt.scenario, "Scenario JSON; its training parts supply the flows")->required();
  optimize->add_option("--config", opt.config, "Simulation config JSON");
  optimize->add_option("--method", opt.method, "sa or ga")->check(CLI::IsMember({"sa", "ga"}));
  optimize->add_option("--nz", opt.nz, "Number of zones (default: robots in config)");
  optimize->add_option("--seed", opt.seed, "Random seed");
  optimize->add_option("--out", opt.out, "Partition output path")->required();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run the delivery simulation");
  simulate->add_option("--layout", sim.layout, "Floor layout JSON");
  simulate->add_option("--scenario", sim.scenario, "Scenario JSON");
  simulate->add_option("--config", sim.config, "Simulation config JSON");
  simulate->add_option("--method", sim.method, "sa, ga or ddz (overrides config)")
      ->check(CLI::IsMember({"sa", "ga", "ddz"}));
  auto* seed_opt = simulate->add_option("--seed", sim.seed, "Random seed (overrides config)");
  simulate->add_option("--partition", sim.partition, "Initial partition JSON");
  simulate->add_flag("--train", sim.train, "Train the initial partition when none is given");
  simulate->add_option("--out", sim.out, "Output directory");
  simulate->add_option("--matrix", sim.matrix, "Run seeds 1..N for every method (or just --method)")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--jobs", sim.jobs, "Worker threads for --matrix");
  simulate->add_option("--replay", sim.replay, "Recompute metrics from an existing run directory");

  std::vector<std::string> report_dirs;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Compare finished runs");
  report->add_option("runs", report_dirs, "Run directories")->required();
  report->add_option("--out", report_out, "Directory for report.csv and report_throughput.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }
  sim.seed_given = seed_opt->count() > 0;

  try {
    if (*optimize) return cmd_optimize(opt);
    if (*simulate) return cmd_simulate(sim);
    if (*report) return cmd_report(report_dirs, report_out);
  } catch (const CallFailed& f) {
    return exit_code(f.status);
  } catch (const std::exception& e) {
    std::cerr << "zonesim: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

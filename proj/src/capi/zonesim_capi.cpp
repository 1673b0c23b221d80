#include "zonesim/zonesim.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zonesim/error.hpp"
#include "zonesim/io.hpp"

namespace fs = std::filesystem;
using namespace zonesim;

struct zs_layout {
  std::shared_ptr<const FloorGraph> graph;
  InputDigest digest;
};

struct zs_scenario {
  Scenario scenario;
  InputDigest digest;
};

struct zs_config {
  SimConfig config;
};

struct zs_partition {
  ZonePartition partition;
  std::optional<InputDigest> digest;
};

struct zs_run {
  std::shared_ptr<const FloorGraph> graph;
  SimResult result;
  RunManifest manifest;
};

namespace {

thread_local std::string g_last_error;

zs_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
      return ZS_ERR_PARSE;
    case ErrorCode::kInfeasibleStart:
      return ZS_ERR_INFEASIBLE;
    case ErrorCode::kDeadlock:
      return ZS_ERR_DEADLOCK;
    case ErrorCode::kIo:
      return ZS_ERR_IO;
    case ErrorCode::kIncompatible:
      return ZS_ERR_INCOMPATIBLE;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kZeroVelocity:
    case ErrorCode::kDimensionMismatch:
      return ZS_ERR_INVALID_ARGUMENT;
    default:
      return ZS_ERR_VALIDATION;
  }
}

zs_status set_error(zs_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
zs_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const Error& e) {
    return set_error(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(ZS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(ZS_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

InputDigest digest_of(const std::string& path, const std::string& text) {
  return {fs::absolute(path).lexically_normal().string(), sha256_hex(text)};
}

std::vector<DeliveryRecord> design_history(const Scenario& s) {
  auto history = training_history(s);
  if (!history.empty()) return history;
  Scenario as_training = s;
  as_training.training = s.part_types;
  return training_history(as_training);
}

const char* run_status_name(SimStatus s) {
  switch (s) {
    case SimStatus::kCompleted:
      return "completed";
    case SimStatus::kTimeCap:
      return "time-cap";
    case SimStatus::kDeadlock:
      return "deadlock";
  }
  return "unknown";
}

}  // namespace

extern "C" {

const char* zs_last_error(void) { return g_last_error.c_str(); }

const char* zs_status_name(zs_status status) {
  switch (status) {
    case ZS_OK:
      return "ok";
    case ZS_ERR_INVALID_ARGUMENT:
      return "invalid-argument";
    case ZS_ERR_PARSE:
      return "parse";
    case ZS_ERR_VALIDATION:
      return "validation";
    case ZS_ERR_INFEASIBLE:
      return "infeasible";
    case ZS_ERR_DEADLOCK:
      return "deadlock";
    case ZS_ERR_IO:
      return "io";
    case ZS_ERR_INCOMPATIBLE:
      return "incompatible";
    case ZS_ERR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

const char* zs_version(void) { return kToolVersion; }

void zs_string_free(char* s) { std::free(s); }

zs_status zs_layout_load(const char* path, zs_layout** out) {
  if (!path || !out) return set_error(ZS_ERR_INVALID_ARGUMENT, "layout path and output are required");
  return guarded([&] {
    const std::string text = read_file(path);
    auto h = std::make_unique<zs_layout>();
    h->graph = std::make_shared<const FloorGraph>(build_layout(text, path));
    h->digest = digest_of(path, text);
    *out = h.release();
    return ZS_OK;
  });
}

size_t zs_layout_workstation_count(const zs_layout* layout) {
  return layout ? layout->graph->workstation_count() : 0;
}

void zs_layout_free(zs_layout* layout) { delete layout; }

zs_status zs_scenario_load(const char* path, zs_scenario** out) {
  if (!path || !out) return set_error(ZS_ERR_INVALID_ARGUMENT, "scenario path and output are required");
  return guarded([&] {
    const std::string text = read_file(path);
    auto h = std::make_unique<zs_scenario>();
    h->scenario = parse_scenario(text);
    h->digest = digest_of(path, text);
    *out = h.release();
    return ZS_OK;
  });
}

int zs_scenario_part_count(const zs_scenario* scenario) {
  return scenario ? scenario->scenario.part_count() : 0;
}

void zs_scenario_free(zs_scenario* scenario) { delete scenario; }

zs_status zs_config_load(const char* path, zs_config** out) {
  if (!out) return set_error(ZS_ERR_INVALID_ARGUMENT, "config output is required");
  return guarded([&] {
    auto h = std::make_unique<zs_config>();
    if (path) h->config = load_config(path);
    *out = h.release();
    return ZS_OK;
  });
}

zs_status zs_config_set_method(zs_config* config, const char* method) {
  if (!config || !method) return set_error(ZS_ERR_INVALID_ARGUMENT, "config and method are required");
  return guarded([&] {
    config->config.method = parse_method(method);
    return ZS_OK;
  });
}

zs_status zs_config_set_seed(zs_config* config, uint64_t seed) {
  if (!config) return set_error(ZS_ERR_INVALID_ARGUMENT, "config is required");
  config->config.seed = seed;
  return ZS_OK;
}

zs_status zs_config_get_method(const zs_config* config, const char** method) {
  if (!config || !method) return set_error(ZS_ERR_INVALID_ARGUMENT, "config and output are required");
  *method = method_name(config->config.method);
  return ZS_OK;
}

zs_status zs_config_get_robots(const zs_config* config, int* robots) {
  if (!config || !robots) return set_error(ZS_ERR_INVALID_ARGUMENT, "config and output are required");
  *robots = config->config.robots;
  return ZS_OK;
}

void zs_config_free(zs_config* config) { delete config; }

zs_status zs_partition_load(const zs_layout* layout, const char* path, zs_partition** out) {
  if (!layout || !path || !out) return set_error(ZS_ERR_INVALID_ARGUMENT, "layout, path and output are required");
  return guarded([&] {
    const std::string text = read_file(path);
    auto h = std::make_unique<zs_partition>();
    h->partition = parse_partition(*layout->graph, text);
    h->digest = digest_of(path, text);
    *out = h.release();
    return ZS_OK;
  });
}

zs_status zs_partition_save(const zs_layout* layout, const zs_partition* partition, const char* path) {
  if (!layout || !partition || !path) return set_error(ZS_ERR_INVALID_ARGUMENT, "layout, partition and path are required");
  return guarded([&] {
    write_file(path, partition_to_json(*layout->graph, partition->partition));
    return ZS_OK;
  });
}

zs_status zs_partition_validate(const zs_layout* layout, const zs_partition* partition, int robots, char** report) {
  if (!layout || !partition) return set_error(ZS_ERR_INVALID_ARGUMENT, "layout and partition are required");
  return guarded([&] {
    std::optional<int> count;
    if (robots >= 0) count = robots;
    const auto violations = validate_partition(*layout->graph, partition->partition, count);
    std::string text;
    for (const auto& v : violations) text += v.kind + ": " + v.message + "\n";
    if (report) *report = dup_string(text);
    if (violations.empty()) return ZS_OK;
    return set_error(ZS_ERR_VALIDATION, std::to_string(violations.size()) + " partition violation(s)");
  });
}

int zs_partition_zone_count(const zs_partition* partition) {
  return partition ? partition->partition.zone_count() : 0;
}

void zs_partition_free(zs_partition* partition) { delete partition; }

zs_status zs_optimize(const zs_layout* layout, const zs_scenario* scenario, const zs_config* config,
                      const char* method, int zones, uint64_t seed, zs_partition** out, char** progress,
                      double* objective) {
  if (!layout || !scenario || !method || !out) {
    return set_error(ZS_ERR_INVALID_ARGUMENT, "layout, scenario, method and output are required");
  }
  if (zones < 1) return set_error(ZS_ERR_INVALID_ARGUMENT, "zone count must be at least 1");
  return guarded([&] {
    const Method m = parse_method(method);
    if (m == Method::kDdz) fail(ErrorCode::kInvalidArgument, "offline design supports sa and ga only");
    const SimConfig defaults;
    const SimConfig& c = config ? config->config : defaults;
    const FloorGraph& g = *layout->graph;
    const LoadParams params{c.velocity, c.handling};
    const FlowSource flows = history_flow_source(g, design_history(scenario->scenario));
    OptimizeResult r;
    if (m == Method::kSa) {
      r = sa_optimize(g, flows, params, zones, SaConfig{}, seed);
    } else {
      GaConfig ga;
      ga.seed = seed;
      r = ga_optimize(g, flows, params, zones, ga);
    }
    auto h = std::make_unique<zs_partition>();
    h->partition = std::move(r.partition);
    if (progress) *progress = dup_string(progress_csv(r.progress));
    if (objective) *objective = r.objective;
    *out = h.release();
    return ZS_OK;
  });
}

zs_status zs_train(const zs_layout* layout, const zs_scenario* scenario, const zs_config* config,
                   zs_partition** out) {
  if (!layout || !scenario || !config || !out) {
    return set_error(ZS_ERR_INVALID_ARGUMENT, "layout, scenario, config and output are required");
  }
  return guarded([&] {
    auto h = std::make_unique<zs_partition>();
    h->partition = train_initial_partition(*layout->graph, scenario->scenario, config->config);
    *out = h.release();
    return ZS_OK;
  });
}

zs_status zs_simulate(const zs_layout* layout, const zs_scenario* scenario, const zs_config* config,
                      const zs_partition* initial, zs_run** out) {
  if (!layout || !scenario || !config || !out) {
    return set_error(ZS_ERR_INVALID_ARGUMENT, "layout, scenario, config and output are required");
  }
  return guarded([&] {
    const FloorGraph& g = *layout->graph;
    const SimConfig& c = config->config;
    validate_config(c);
    auto h = std::make_unique<zs_run>();
    h->graph = layout->graph;
    h->manifest.method = method_name(c.method);
    h->manifest.seed = c.seed;
    h->manifest.config = config_to_json(c);
    h->manifest.config_hash = sha256_hex(h->manifest.config.dump());
    h->manifest.layout = layout->digest;
    h->manifest.scenario = scenario->digest;
    ZonePartition start;
    if (initial) {
      start = initial->partition;
      h->manifest.partition = initial->digest;
    } else {
      start = train_initial_partition(g, scenario->scenario, c);
    }
    const auto violations = validate_partition(g, start, c.robots);
    if (!violations.empty()) {
      std::string msg = "initial partition is invalid:";
      for (const auto& v : violations) msg += "\n  " + v.kind + ": " + v.message;
      fail(ErrorCode::kValidation, msg);
    }
    h->result = run_simulation(g, scenario->scenario, c, start);
    h->manifest.status = run_status_name(h->result.status);
    *out = h.release();
    return ZS_OK;
  });
}

zs_run_status zs_run_get_status(const zs_run* run) {
  if (!run) return ZS_RUN_DEADLOCK;
  switch (run->result.status) {
    case SimStatus::kCompleted:
      return ZS_RUN_COMPLETED;
    case SimStatus::kTimeCap:
      return ZS_RUN_TIME_CAP;
    case SimStatus::kDeadlock:
      return ZS_RUN_DEADLOCK;
  }
  return ZS_RUN_DEADLOCK;
}

zs_status zs_run_write(const zs_run* run, const char* dir) {
  if (!run || !dir) return set_error(ZS_ERR_INVALID_ARGUMENT, "run and directory are required");
  return guarded([&] {
    write_run(dir, *run->graph, run->result, run->manifest);
    return ZS_OK;
  });
}

zs_status zs_run_summary(const zs_run* run, char** line) {
  if (!run || !line) return set_error(ZS_ERR_INVALID_ARGUMENT, "run and output are required");
  return guarded([&] {
    const auto& m = run->result.metrics;
    char balance[32];
    if (m.balance_comparable) {
      std::snprintf(balance, sizeof balance, "%.2f%%", m.percent_in_balance);
    } else {
      std::snprintf(balance, sizeof balance, "NA");
    }
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "%s seed=%llu status=%s parts=%d/%d time_to_complete=%.3fh in_balance=%s "
                  "avg_travel=%.0fft travel_sd=%.0fft",
                  m.method.c_str(), static_cast<unsigned long long>(run->manifest.seed), m.status.c_str(),
                  m.parts_completed, m.parts_total, m.time_to_complete_hours, balance, m.average_distance,
                  m.distance_stddev);
    *line = dup_string(buf);
    return ZS_OK;
  });
}

zs_status zs_run_metrics_json(const zs_run* run, char** json) {
  if (!run || !json) return set_error(ZS_ERR_INVALID_ARGUMENT, "run and output are required");
  return guarded([&] {
    *json = dup_string(metrics_to_json(run->result.metrics).dump(2));
    return ZS_OK;
  });
}

void zs_run_free(zs_run* run) { delete run; }

zs_status zs_replay(const char* dir, char** metrics_json, int* matches) {
  if (!dir) return set_error(ZS_ERR_INVALID_ARGUMENT, "run directory is required");
  return guarded([&] {
    const fs::path d(dir);
    const MetricsReport replayed = replay_metrics(d / "events.jsonl");
    if (matches) {
      const std::string stored = read_file(d / "metrics.json");
      *matches = metrics_to_json(replayed).dump(2) + "\n" == stored ? 1 : 0;
    }
    if (metrics_json) *metrics_json = dup_string(metrics_to_json(replayed).dump(2));
    return ZS_OK;
  });
}

zs_status zs_report(const char* const* dirs, size_t count, const char* out_dir, char** text) {
  if (!dirs || count == 0) return set_error(ZS_ERR_INVALID_ARGUMENT, "at least one run directory is required");
  return guarded([&] {
    std::vector<RunArtifacts> runs;
    for (size_t i = 0; i < count; ++i) {
      if (!dirs[i]) fail(ErrorCode::kInvalidArgument, "run directory is null");
      runs.push_back(read_run(dirs[i]));
    }
    const Report rep = build_report(runs);
    if (out_dir) {
      fs::create_directories(out_dir);
      write_file(fs::path(out_dir) / "report.csv", rep.table_csv);
      write_file(fs::path(out_dir) / "report_throughput.csv", rep.throughput_csv);
    }
    if (text) *text = dup_string(rep.text);
    return ZS_OK;
  });
}

}  // extern "C"

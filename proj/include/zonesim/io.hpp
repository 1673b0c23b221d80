#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "zonesim/metrics.hpp"
#include "zonesim/sim_engine.hpp"
#include "zonesim/zoning.hpp"

namespace zonesim {

inline constexpr const char* kSchemaVersion = "1.0";
inline constexpr const char* kToolVersion = "1.0.0";

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);

// Parsers throw Error(kParse) for malformed documents and unknown schema
// majors; layout problems come back as Error(kValidation) naming the line of
// the offending element.
LayoutSpec parse_layout(const std::string& text);
FloorGraph build_layout(const std::string& text, const std::string& origin = "layout");
FloorGraph load_layout(const std::filesystem::path& path);
std::string layout_to_json(const FloorGraph& graph);

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const Scenario& scenario);

SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json config_to_json(const SimConfig& config);

ZonePartition parse_partition(const FloorGraph& graph, const std::string& text);
ZonePartition load_partition(const FloorGraph& graph, const std::filesystem::path& path);
std::string partition_to_json(const FloorGraph& graph, const ZonePartition& partition);

std::string progress_csv(const std::vector<OptimizerProgress>& progress);

struct InputDigest {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string method;
  std::uint64_t seed = 0;
  std::string config_hash;
  nlohmann::ordered_json config;
  InputDigest layout;
  InputDigest scenario;
  std::optional<InputDigest> partition;
  std::string status;
  std::vector<std::string> outputs;
};

nlohmann::ordered_json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

struct RunArtifacts {
  std::filesystem::path dir;
  RunManifest manifest;
  MetricsReport metrics;
};

// Writes events.jsonl, metrics.json, throughput.csv, ddz_trace.jsonl,
// partition_final.json and manifest.json into `dir`.
void write_run(const std::filesystem::path& dir, const FloorGraph& graph, const SimResult& result,
               RunManifest manifest);

RunArtifacts read_run(const std::filesystem::path& dir);

// Recomputes metrics from a stored event log.
MetricsReport replay_metrics(const std::filesystem::path& event_log);

struct Report {
  std::string table_csv;       // one row per run
  std::string throughput_csv;  // long format: run, method, time, completed
  std::string text;            // aligned table for terminals
};

// Throws Error(kIncompatible) when runs used different scenarios or layouts.
Report build_report(const std::vector<RunArtifacts>& runs);

}  // namespace zonesim

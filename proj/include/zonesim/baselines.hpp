#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "zonesim/ddz.hpp"
#include "zonesim/scheduler.hpp"
#include "zonesim/zoning.hpp"

namespace zonesim {

struct DeliveryRecord {
  int part = 0;
  WsId from{};
  WsId to{};
  double time = 0.0;  // completion, minutes
};

// Trailing delivery history used by the centralized methods.
class PartHistoryWindow {
 public:
  explicit PartHistoryWindow(double length_minutes = 20.0) : length_(length_minutes) {}

  void add(const DeliveryRecord& record) { records_.push_back(record); }
  // Drops records that completed more than `length` minutes before `now`.
  void prune(double now);
  double length() const { return length_; }
  const std::deque<DeliveryRecord>& records() const { return records_; }

 private:
  double length_;
  std::deque<DeliveryRecord> records_;
};

// Per-zone loaded-trip counts. A record that crosses zones is split into
// its transfer-station legs, each credited to the zone that carries it.
std::vector<FlowMatrix> flow_from_history(const FloorGraph& graph,
                                          std::span<const DeliveryRecord> records,
                                          const ZonePartition& partition);

// Produces per-zone flows for any candidate design.
using FlowSource = std::function<std::vector<FlowMatrix>(const ZonePartition&)>;

FlowSource history_flow_source(const FloorGraph& graph, std::vector<DeliveryRecord> records);

struct LoadParams {
  double velocity = 200.0;
  HandlingTimes handling{0.5, 0.5};
};

std::vector<double> zone_loads(const FloorGraph& graph, const ZonePartition& partition,
                               const std::vector<FlowMatrix>& flows, const LoadParams& params);

// Population standard deviation.
double load_stddev(std::span<const double> loads);

// Balanced greedy growth from `nz` mutually distant seed workstations, with
// transfer stations assigned. Throws kInfeasibleStart.
ZonePartition initial_partition(const FloorGraph& graph, int nz);

// Builds zones from a workstation -> zone assignment (indexed by
// FloorGraph::ws_index). Workstations a zone cannot reach are handed to the
// nearest zone that can; `assignment` is rewritten to the repaired genome.
// Returns nullopt when no valid partition results.
std::optional<ZonePartition> partition_from_assignment(const FloorGraph& graph,
                                                       std::vector<int>& assignment, int nz);

std::vector<int> assignment_of(const FloorGraph& graph, const ZonePartition& partition);

struct OptimizerProgress {
  int step = 0;  // SA proposal index or GA generation
  double current = 0.0;
  double best = 0.0;
};

struct OptimizeResult {
  ZonePartition partition;
  double objective = 0.0;
  std::vector<OptimizerProgress> progress;
  int proposals = 0;
  int accepted_worse = 0;
};

struct SaConfig {
  AnnealingSchedule schedule{50.0, 0.05, 40, 1.0, false};
  int moves_per_temperature = 25;
};

OptimizeResult sa_optimize(const FloorGraph& graph, const FlowSource& flows, const LoadParams& params,
                           int nz, const SaConfig& config, std::uint64_t seed,
                           const ZonePartition* start = nullptr);

struct GaConfig {
  int population = 30;
  int generations = 40;
  double crossover_rate = 0.9;
  double mutation_rate = 0.05;
  int elitism = 2;
  int tournament = 3;
  std::uint64_t seed = 1;
};

// `initial_population` seeds the population; when it is shorter than the
// configured size the rest is filled with randomized greedy designs.
OptimizeResult ga_optimize(const FloorGraph& graph, const FlowSource& flows, const LoadParams& params,
                           int nz, const GaConfig& config,
                           std::span<const std::vector<int>> initial_population = {});

enum class DispatchMode { kBalanced, kImbalanced };

struct DeliveryPlan {
  std::vector<Leg> legs;
};

DeliveryPlan load_share_dispatch(const FloorGraph& graph, const PartTask& task,
                                 const ZonePartition& partition, DispatchMode mode);

}  // namespace zonesim

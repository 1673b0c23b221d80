#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "zonesim/baselines.hpp"
#include "zonesim/consensus.hpp"
#include "zonesim/ddz.hpp"
#include "zonesim/metrics.hpp"
#include "zonesim/scheduler.hpp"
#include "zonesim/zoning.hpp"

namespace zonesim {

enum class Method { kSa, kGa, kDdz };

const char* method_name(Method m);
Method parse_method(const std::string& name);  // throws kInvalidArgument

struct PartType {
  std::string name;
  std::vector<WsId> route;
  int quantity = 0;
};

enum class ReleasePolicy { kAllAtStart, kStaggered };

struct Scenario {
  std::string name;
  std::vector<PartType> part_types;
  std::map<int, double> processing_minutes;  // overrides by workstation number
  ReleasePolicy release = ReleasePolicy::kAllAtStart;
  double release_interval = 0.0;  // minutes between parts when staggered
  // Parts used to derive the initial zone design before the run.
  std::vector<PartType> training;

  int part_count() const;
};

struct SimConfig {
  Method method = Method::kDdz;
  std::uint64_t seed = 1;
  int robots = 3;
  double velocity = 200.0;  // feet per minute
  HandlingTimes handling{0.5, 0.5};
  SchedulerWeights weights;
  DdzConfig ddz;
  AnnealingSchedule ddz_schedule;
  ConsensusOptions consensus;
  double consensus_step_minutes = 0.002;
  double ddz_iteration_minutes = 0.05;  // robots stand still while DDZ computes
  double window_minutes = 20.0;
  SaConfig sa{{50.0, 0.05, 20, 1.0, false}, 10};
  GaConfig ga{16, 12, 0.9, 0.05, 2, 3, 1};
  double repair_minutes = 3.0;  // centralized optimizer turnaround
  double time_cap_minutes = 10080.0;
  bool record_consensus_trace = false;
};

// Throws kInvalidArgument naming the first bad field.
void validate_config(const SimConfig& config);

// Minutes each workstation (by ws_index) spends on one part.
std::vector<double> processing_times(const FloorGraph& graph, const Scenario& scenario);

// Route legs of the training parts as delivery records at t = 0.
std::vector<DeliveryRecord> training_history(const Scenario& scenario);

// Initial design for a method: greedy growth for DDZ, otherwise the
// method's optimizer run on the training history.
ZonePartition train_initial_partition(const FloorGraph& graph, const Scenario& scenario,
                                      const SimConfig& config);

// Append-only JSON-lines log with a strict (time, sequence) order.
class EventLog {
 public:
  void append(double time, const std::string& kind, nlohmann::ordered_json payload = nlohmann::ordered_json::object());
  const std::vector<std::string>& lines() const { return lines_; }
  std::string text() const;

 private:
  std::vector<std::string> lines_;
  long seq_ = 0;
  double last_time_ = 0.0;
};

struct FleetState {
  ZonePartition partition;
  std::vector<RobotQueue> queues;  // one per zone
};

struct RepairOutcome {
  bool applied = false;
  int moved = 0;
  std::vector<Violation> violations;
};

// Validates `next`, then swaps it in and re-queues pending tasks at a single
// instant. An invalid design leaves the state untouched.
RepairOutcome apply_zone_repair(const FloorGraph& graph, FleetState& state, const ZonePartition& next,
                                EventLog& log, double now);

struct MonitorSample {
  double time = 0.0;
  std::vector<double> loads;      // per robot
  std::vector<double> reference;  // consensus value or fleet mean, per robot
};

struct BalanceInterval {
  double start = 0.0;
  double end = 0.0;
  bool balanced = true;
};

struct BalanceTimeline {
  std::vector<BalanceInterval> intervals;
  double percent_balanced = 0.0;
  std::optional<double> repair_time;  // first sample at which some robot signals
};

// A sample is balanced when every robot sits within the load tolerance; the
// state holds until the next sample. Time before the first sample counts as
// balanced.
BalanceTimeline balance_monitor(std::span<const MonitorSample> samples, const DdzConfig& config,
                                double end_time);

enum class SimStatus { kCompleted, kTimeCap, kDeadlock };

struct SimResult {
  SimStatus status = SimStatus::kCompleted;
  std::string message;
  std::vector<std::string> log;             // JSON lines
  std::vector<std::string> protocol_trace;  // DDZ annealing decisions, JSON lines
  std::vector<ConsensusTraceRow> consensus_trace;
  MetricsReport metrics;
  std::vector<ZonePartition> adopted;  // initial design, then every adoption
  ZonePartition final_partition;
};

SimResult run_simulation(const FloorGraph& graph, const Scenario& scenario, const SimConfig& config,
                         const ZonePartition& initial);

}  // namespace zonesim

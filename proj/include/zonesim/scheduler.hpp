#pragma once

#include <optional>
#include <string>
#include <vector>

#include "zonesim/floor_graph.hpp"
#include "zonesim/zoning.hpp"

namespace zonesim {

// One delivery leg of a part. Robots only see pickup and dropoff; `target`
// is the next processing workstation the leg is heading toward.
struct PartTask {
  int part = 0;
  std::string type;
  WsId pickup{};
  WsId dropoff{};
  WsId target{};
  double age_start = 0.0;  // minutes; set when processing finished

  friend bool operator==(const PartTask&, const PartTask&) = default;
};

struct SchedulerWeights {
  double distance = 1.0;  // C_D, per minute of travel
  double age = 1.0;       // C_A, per minute of age

  friend bool operator==(const SchedulerWeights&, const SchedulerWeights&) = default;
};

struct RobotQueue {
  std::vector<PartTask> pending;
  std::optional<PartTask> selected;
  SchedulerWeights weights;

  std::size_t size() const { return pending.size() + (selected ? 1 : 0); }
  friend bool operator==(const RobotQueue&, const RobotQueue&) = default;
};

struct RankedTask {
  PartTask task;
  double score = 0.0;
  double job_distance = 0.0;  // feet
};

struct Ranking {
  std::vector<RankedTask> sorted;  // highest score first
  std::optional<PartTask> next;
};

// Shortest job first with aging over the pending tasks.
Ranking score_and_rank(const FloorGraph& graph, const RobotQueue& queue, PointIdx robot_position,
                       double velocity, double now);

struct RequeueResult {
  std::vector<RobotQueue> queues;
  int moved = 0;  // pending tasks whose robot changed
};

// Re-plans every pending task under `next` and hands it to the robot whose
// zone now carries its first leg. Selected tasks stay put. Throws kOrphanPart.
RequeueResult requeue_after_repair(const FloorGraph& graph, const std::vector<RobotQueue>& queues,
                                   const ZonePartition& previous, const ZonePartition& next);

}  // namespace zonesim

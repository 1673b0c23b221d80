#include "zonesim/scheduler.hpp"

#include <algorithm>
#include <tuple>

#include "zonesim/error.hpp"

namespace zonesim {

Ranking score_and_rank(const FloorGraph& graph, const RobotQueue& queue, PointIdx robot_position,
                       double velocity, double now) {
  if (!(velocity > 0.0)) fail(ErrorCode::kZeroVelocity, "robot velocity must be positive");
  Ranking out;
  out.sorted.reserve(queue.pending.size());
  for (const auto& task : queue.pending) {
    const PointIdx pick = graph.anchor(task.pickup);
    const PointIdx drop = graph.anchor(task.dropoff);
    const double job = graph.distance(robot_position, pick) + graph.distance(pick, drop);
    const double age = now - task.age_start;
    const double score = queue.weights.age * age - queue.weights.distance * (job / velocity);
    out.sorted.push_back({task, score, job});
  }
  std::stable_sort(out.sorted.begin(), out.sorted.end(), [](const RankedTask& a, const RankedTask& b) {
    return std::make_tuple(-a.score, a.task.age_start, a.task.part) <
           std::make_tuple(-b.score, b.task.age_start, b.task.part);
  });
  if (!out.sorted.empty()) out.next = out.sorted.front().task;
  return out;
}

RequeueResult requeue_after_repair(const FloorGraph& graph, const std::vector<RobotQueue>& queues,
                                   const ZonePartition& previous, const ZonePartition& next) {
  (void)previous;
  if (static_cast<int>(queues.size()) != next.zone_count()) {
    fail(ErrorCode::kDimensionMismatch, "one queue per zone is required");
  }
  RequeueResult out;
  out.queues.resize(queues.size());
  for (std::size_t r = 0; r < queues.size(); ++r) {
    out.queues[r].selected = queues[r].selected;
    out.queues[r].weights = queues[r].weights;
  }
  for (std::size_t r = 0; r < queues.size(); ++r) {
    for (const auto& task : queues[r].pending) {
      if (next.zone_of(task.pickup) < 0) {
        fail(ErrorCode::kOrphanPart, "part " + std::to_string(task.part) + " sits at WS" +
                                         std::to_string(to_int(task.pickup)) + " which lies in no zone");
      }
      const Leg leg = plan_leg(graph, next, task.pickup, task.target);
      PartTask moved = task;
      moved.dropoff = leg.dropoff;
      out.queues[leg.zone].pending.push_back(moved);
      if (static_cast<std::size_t>(leg.zone) != r) ++out.moved;
    }
  }
  return out;
}

}  // namespace zonesim

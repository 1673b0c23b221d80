#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "support.hpp"
#include "zonesim/error.hpp"
#include "zonesim/scheduler.hpp"

using namespace zonesim;
using namespace zonesim::testing;

namespace {

constexpr double kVelocity = 200.0;

PartTask task(int part, int pickup, int dropoff, double age_start) {
  return {part, "T", ws(pickup), ws(dropoff), ws(dropoff), age_start};
}

std::vector<int> order_of(const Ranking& r) {
  std::vector<int> out;
  for (const auto& t : r.sorted) out.push_back(t.task.part);
  return out;
}

ZonePartition linked_fig2() { return assign_transfer_stations(fig2(), fig2_partition(), std::vector<double>{10.0, 20.0}); }

}  // namespace

TEST(ScoreAndRank, EmptyQueueSelectsNothing) {
  const auto r = score_and_rank(floor18(), RobotQueue{}, floor18().anchor(ws(1)), kVelocity, 0.0);
  EXPECT_TRUE(r.sorted.empty());
  EXPECT_FALSE(r.next.has_value());
}

TEST(ScoreAndRank, SinglePartIsSelected) {
  const auto& g = floor18();
  RobotQueue q;
  q.pending = {task(7, 2, 5, 1.0)};
  const auto r = score_and_rank(g, q, g.anchor(ws(1)), kVelocity, 4.0);
  ASSERT_TRUE(r.next.has_value());
  EXPECT_EQ(r.next->part, 7);
  const double job = g.distance(ws(1), ws(2)) + g.distance(ws(2), ws(5));
  EXPECT_DOUBLE_EQ(r.sorted[0].job_distance, job);
  EXPECT_DOUBLE_EQ(r.sorted[0].score, 3.0 - job / kVelocity);
}

TEST(ScoreAndRank, WithoutAgingShortestJobWins) {
  const auto& g = floor18();
  RobotQueue q;
  q.weights = {1.0, 0.0};
  for (int i = 0; i < 17; ++i) q.pending.push_back(task(i, 2 + i, 1, -10.0 * i));
  const auto r = score_and_rank(g, q, g.anchor(ws(1)), kVelocity, 0.0);
  for (std::size_t i = 1; i < r.sorted.size(); ++i) EXPECT_LE(r.sorted[i - 1].job_distance, r.sorted[i].job_distance);
}

TEST(ScoreAndRank, WithoutDistanceOldestWins) {
  const auto& g = floor18();
  RobotQueue q;
  q.weights = {0.0, 1.0};
  std::mt19937_64 rng(3);
  for (int i = 0; i < 30; ++i) q.pending.push_back(task(i, 1 + static_cast<int>(rng() % 18), 1 + static_cast<int>(rng() % 18), static_cast<double>(rng() % 100)));
  const auto r = score_and_rank(g, q, g.anchor(ws(9)), kVelocity, 100.0);
  for (std::size_t i = 1; i < r.sorted.size(); ++i) EXPECT_LE(r.sorted[i - 1].task.age_start, r.sorted[i].task.age_start);
}

TEST(ScoreAndRank, ScalingWeightsKeepsOrder) {
  const auto& g = floor18();
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    RobotQueue q;
    for (int i = 0; i < 12; ++i) q.pending.push_back(task(i, 1 + static_cast<int>(rng() % 18), 1 + static_cast<int>(rng() % 18), static_cast<double>(rng() % 60)));
    q.weights = {1.5, 0.7};
    const auto base = order_of(score_and_rank(g, q, g.anchor(ws(4)), kVelocity, 60.0));
    q.weights = {1.5 * 4.0, 0.7 * 4.0};
    EXPECT_EQ(order_of(score_and_rank(g, q, g.anchor(ws(4)), kVelocity, 60.0)), base);
  }
}

TEST(ScoreAndRank, TiesGoToOlderThenLowerPart) {
  const auto& g = floor18();
  RobotQueue q;
  q.weights = {0.0, 0.0};
  q.pending = {task(5, 3, 4, 2.0), task(2, 3, 4, 2.0), task(9, 3, 4, 1.0)};
  const auto r = score_and_rank(g, q, g.anchor(ws(1)), kVelocity, 10.0);
  EXPECT_EQ(order_of(r), (std::vector<int>{9, 2, 5}));
}

TEST(ScoreAndRank, RejectsZeroVelocity) {
  RobotQueue q;
  q.pending = {task(1, 1, 2, 0.0)};
  try {
    score_and_rank(floor18(), q, floor18().anchor(ws(1)), 0.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroVelocity);
  }
}

// A near task arrives every service, yet the far task must still be served.
TEST(ScoreAndRank, AgingPreventsStarvation) {
  const auto& g = floor18();
  std::mt19937_64 rng(17);
  RobotQueue q;
  q.pending.push_back(task(0, 18, 1, 0.0));
  PointIdx at = g.anchor(ws(1));
  double now = 0.0;
  std::map<int, double> arrival{{0, 0.0}};
  std::map<int, double> served;
  int next_id = 1;
  for (int step = 0; step < 500; ++step) {
    const int near = 1 + static_cast<int>(rng() % 3);
    q.pending.push_back(task(next_id, near, 1 + static_cast<int>(rng() % 3), now));
    arrival[next_id++] = now;
    const auto r = score_and_rank(g, q, at, kVelocity, now);
    const PartTask pick = *r.next;
    std::erase(q.pending, pick);
    now += r.sorted.front().job_distance / kVelocity + 1.0;
    at = g.anchor(pick.dropoff);
    served[pick.part] = now;
  }
  ASSERT_TRUE(served.count(0));
  // Anything that arrived early enough has been served.
  for (const auto& [id, t] : arrival) {
    if (t < now / 2) EXPECT_TRUE(served.count(id)) << "part " << id;
  }
}

TEST(Requeue, IdentityDesignMovesNothing) {
  const auto& g = fig2();
  const auto p = linked_fig2();
  std::vector<RobotQueue> qs(2);
  qs[0].pending = {task(1, 4, 5, 0.0), {2, "T", ws(4), ws(2), ws(3), 1.0}};
  qs[1].pending = {task(3, 6, 3, 0.0)};
  qs[1].selected = task(4, 2, 6, 0.0);
  const auto r = requeue_after_repair(g, qs, p, p);
  EXPECT_EQ(r.moved, 0);
  EXPECT_EQ(r.queues, qs);
}

TEST(Requeue, MovedWorkstationFollowsItsZone) {
  const auto& g = fig2();
  const auto p = linked_fig2();
  auto next = transfer_tip(g, p, 0, 1, ws(1));
  next = assign_transfer_stations(g, next, std::vector<double>{10.0, 20.0});
  ASSERT_TRUE(validate_partition(g, next, 2).empty());
  std::vector<RobotQueue> qs(2);
  qs[0].pending = {{1, "T", ws(1), ws(2), ws(3), 0.0}, task(2, 4, 5, 0.0)};
  qs[0].selected = task(3, 5, 4, 0.0);
  const auto r = requeue_after_repair(g, qs, p, next);
  EXPECT_EQ(r.moved, 1);
  ASSERT_EQ(r.queues[1].pending.size(), 1u);
  EXPECT_EQ(r.queues[1].pending[0].part, 1);
  EXPECT_EQ(r.queues[1].pending[0].dropoff, ws(3));
  EXPECT_EQ(r.queues[0].pending.size(), 1u);
  EXPECT_EQ(r.queues[0].selected, qs[0].selected);
}

TEST(Requeue, CrossZoneTaskStopsAtStation) {
  const auto& g = fig2();
  const auto p = linked_fig2();
  std::vector<RobotQueue> qs(2);
  qs[1].pending = {{1, "T", ws(4), ws(3), ws(3), 0.0}};
  const auto r = requeue_after_repair(g, qs, p, p);
  ASSERT_EQ(r.queues[0].pending.size(), 1u);
  EXPECT_EQ(r.queues[0].pending[0].dropoff, ws(2));
  EXPECT_EQ(r.moved, 1);
}

TEST(Requeue, ConservesTasks) {
  const auto& g = floor18();
  const auto p = initial_partition(g, 3);
  const auto nz = p.zone_count();
  std::mt19937_64 rng(5);
  std::vector<RobotQueue> qs(nz);
  int id = 0;
  for (auto& q : qs) {
    for (int i = 0; i < 10; ++i) {
      const int from = 1 + static_cast<int>(rng() % 18);
      const int to = 1 + (from + static_cast<int>(rng() % 17)) % 18;
      q.pending.push_back({id++, "T", ws(from), ws(1), ws(to), 0.0});
    }
  }
  const auto r = requeue_after_repair(g, qs, p, p);
  std::multiset<int> before, after;
  for (const auto& q : qs)
    for (const auto& t : q.pending) before.insert(t.part);
  for (std::size_t z = 0; z < r.queues.size(); ++z) {
    for (const auto& t : r.queues[z].pending) {
      after.insert(t.part);
      EXPECT_EQ(plan_leg(g, p, t.pickup, t.target).zone, static_cast<int>(z));
    }
  }
  EXPECT_EQ(before, after);
}

TEST(Requeue, Errors) {
  const auto& g = fig2();
  const auto p = linked_fig2();
  std::vector<RobotQueue> one(1);
  EXPECT_THROW(requeue_after_repair(g, one, p, p), Error);
  ZonePartition holed = p;
  std::erase(holed.zones[0].workstations, ws(1));
  std::vector<RobotQueue> qs(2);
  qs[0].pending = {task(1, 1, 4, 0.0)};
  try {
    requeue_after_repair(g, qs, p, holed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOrphanPart);
  }
}

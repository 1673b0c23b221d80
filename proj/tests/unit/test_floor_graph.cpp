#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "support.hpp"
#include "zonesim/error.hpp"

using namespace zonesim;
using namespace zonesim::testing;

namespace {

FloorGraph line_graph() {
  LayoutSpec spec;
  spec.adjacency_threshold = 20.0;
  spec.points = {{"A", 0, 0, PointKind::kWorkstationAnchor},
                 {"B", 10, 0, PointKind::kWorkstationAnchor},
                 {"C", 30, 0, PointKind::kWorkstationAnchor}};
  spec.segments = {{"A", "B"}, {"B", "C"}};
  spec.workstations = {{1, "A", 1.0}, {2, "B", 1.0}, {3, "C", 1.0}};
  return FloorGraph::build(spec);
}

std::vector<double> floyd_warshall(const FloorGraph& g) {
  const std::size_t n = g.point_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(n * n, inf);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0.0;
  for (const auto& s : g.segments()) {
    const auto a = static_cast<std::size_t>(s.a), b = static_cast<std::size_t>(s.b);
    d[a * n + b] = std::min(d[a * n + b], s.length);
    d[b * n + a] = std::min(d[b * n + a], s.length);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::min(d[i * n + j], d[i * n + k] + d[k * n + j]);
  return d;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(ShortestPath, SameWorkstationIsEmpty) {
  const Path p = shortest_path(floor18(), ws(5), ws(5));
  EXPECT_EQ(p.distance, 0.0);
  EXPECT_TRUE(p.segments.empty());
}

TEST(ShortestPath, ThreePointLine) {
  const auto g = line_graph();
  const Path p = shortest_path(g, ws(1), ws(3));
  EXPECT_DOUBLE_EQ(p.distance, 30.0);
  ASSERT_EQ(p.segments.size(), 2u);
  EXPECT_EQ(p.segments[0], seg(g, "A", "B"));
  EXPECT_EQ(p.segments[1], seg(g, "B", "C"));
}

TEST(ShortestPath, MatchesFloydWarshallOnShippedLayout) {
  const auto& g = floor18();
  const auto fw = floyd_warshall(g);
  const std::size_t n = g.point_count();
  for (const auto& a : g.workstations()) {
    for (const auto& b : g.workstations()) {
      const Path p = shortest_path(g, a.id, b.id);
      EXPECT_NEAR(p.distance, fw[static_cast<std::size_t>(a.anchor) * n + b.anchor], 1e-9)
          << "WS" << to_int(a.id) << " -> WS" << to_int(b.id);
      double sum = 0.0;
      for (SegIdx s : p.segments) sum += g.segments()[s].length;
      EXPECT_NEAR(sum, p.distance, 1e-9);
    }
  }
  EXPECT_NEAR(shortest_path(g, ws(4), ws(14)).distance, fw[g.anchor(ws(4)) * n + g.anchor(ws(14))], 1e-9);
}

TEST(ShortestPath, EqualLengthTieGoesThroughSmallerPointId) {
  LayoutSpec spec;
  spec.adjacency_threshold = 5.0;
  spec.points = {{"A", 0, 0, PointKind::kWorkstationAnchor},
                 {"B", 10, 0, PointKind::kJunction},
                 {"C", 0, 10, PointKind::kJunction},
                 {"D", 10, 10, PointKind::kWorkstationAnchor}};
  spec.segments = {{"A", "C"}, {"C", "D"}, {"A", "B"}, {"B", "D"}};
  spec.workstations = {{1, "A", 0.0}, {2, "D", 0.0}};
  const auto g = FloorGraph::build(spec);
  for (int run = 0; run < 3; ++run) {
    const Path p = shortest_path(g, ws(1), ws(2));
    ASSERT_EQ(p.points.size(), 3u);
    EXPECT_EQ(g.points()[p.points[1]].id, "B");
  }
}

TEST(ShortestPath, RestrictionAndErrors) {
  const auto g = line_graph();
  SegmentMask mask(g.segment_count(), true);
  mask[seg(g, "B", "C")] = false;
  EXPECT_EQ(code_of([&] { shortest_path(g, ws(1), ws(3), mask); }), ErrorCode::kNoFeasiblePath);
  EXPECT_DOUBLE_EQ(shortest_path(g, ws(1), ws(2), mask).distance, 10.0);
  EXPECT_EQ(code_of([&] { shortest_path(g, ws(1), ws(9)); }), ErrorCode::kUnknownWorkstation);
}

TEST(ShortestPath, MetricProperties) {
  const auto& g = floor18();
  std::mt19937_64 rng(7);
  SegmentMask mask(g.segment_count());
  for (std::size_t s = 0; s < mask.size(); ++s) mask[s] = (rng() % 4) != 0;
  for (const auto& a : g.workstations()) {
    for (const auto& b : g.workstations()) {
      const double ab = g.distance(a.id, b.id);
      EXPECT_DOUBLE_EQ(ab, g.distance(b.id, a.id));
      for (const auto& c : g.workstations()) EXPECT_LE(g.distance(a.id, c.id), ab + g.distance(b.id, c.id) + 1e-9);
      try {
        EXPECT_GE(shortest_path(g, a.id, b.id, mask).distance, ab - 1e-9);
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kNoFeasiblePath);
      }
    }
  }
}

TEST(Adjacent, ThresholdComparison) {
  LayoutSpec spec;
  spec.adjacency_threshold = 20.0;
  spec.points = {{"A", 0, 0, PointKind::kWorkstationAnchor},
                 {"B", 5, 0, PointKind::kWorkstationAnchor},
                 {"C", 30, 0, PointKind::kWorkstationAnchor}};
  spec.segments = {{"A", "B"}, {"B", "C"}};
  spec.workstations = {{1, "A", 0.0}, {2, "B", 0.0}, {3, "C", 0.0}};
  const auto g = FloorGraph::build(spec);
  EXPECT_TRUE(adjacent(g, ws(1), ws(1)));
  EXPECT_TRUE(adjacent(g, ws(1), ws(2)));
  EXPECT_FALSE(adjacent(g, ws(2), ws(3)));  // 25 ft
  EXPECT_EQ(code_of([&] { adjacent(g, ws(1), ws(4)); }), ErrorCode::kUnknownWorkstation);
}

TEST(Adjacent, ReflexiveAndSymmetric) {
  const auto& g = floor18();
  for (const auto& a : g.workstations()) {
    EXPECT_TRUE(adjacent(g, a.id, a.id));
    for (const auto& b : g.workstations()) EXPECT_EQ(adjacent(g, a.id, b.id), adjacent(g, b.id, a.id));
  }
}

TEST(FloorGraphBuild, RejectsBrokenLayouts) {
  auto base = [] {
    LayoutSpec s;
    s.adjacency_threshold = 10.0;
    s.points = {{"A", 0, 0, PointKind::kWorkstationAnchor}, {"B", 10, 0, PointKind::kWorkstationAnchor}};
    s.segments = {{"A", "B"}};
    s.workstations = {{1, "A", 1.0}, {2, "B", 1.0}};
    return s;
  };
  auto section_of = [](const LayoutSpec& s) -> std::string {
    try {
      FloorGraph::build(s);
    } catch (const LayoutError& e) {
      return e.section() + "#" + std::to_string(e.index());
    }
    return "accepted";
  };
  EXPECT_EQ(section_of(base()), "accepted");

  auto dup = base();
  dup.points.push_back({"A", 5, 5, PointKind::kJunction});
  EXPECT_EQ(section_of(dup), "points#2");

  auto same_pos = base();
  same_pos.points[1].x = 0;
  EXPECT_EQ(section_of(same_pos).rfind("points#", 0), 0u);

  auto dangling = base();
  dangling.segments.push_back({"A", "Z"});
  EXPECT_EQ(section_of(dangling), "segments#1");

  auto wrong_kind = base();
  wrong_kind.points[1].kind = PointKind::kJunction;
  EXPECT_EQ(section_of(wrong_kind), "workstations#1");

  auto negative = base();
  negative.workstations[0].processing_time = -1.0;
  EXPECT_EQ(section_of(negative), "workstations#0");

  auto disconnected = base();
  disconnected.points.push_back({"C", 50, 0, PointKind::kWorkstationAnchor});
  disconnected.points.push_back({"D", 60, 0, PointKind::kJunction});
  disconnected.segments.push_back({"C", "D"});
  disconnected.workstations.push_back({3, "C", 1.0});
  EXPECT_EQ(section_of(disconnected), "points#-1");
}

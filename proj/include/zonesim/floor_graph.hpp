#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace zonesim {

// Workstation number as printed on the floor plan (WS1..WSn).
enum class WsId : int {};

constexpr int to_int(WsId id) { return static_cast<int>(id); }

// Dense indices into FloorGraph::points() / segments(). Point indices follow
// the lexicographic order of point ids, which makes index order the
// tie-breaking order for equal-length paths.
using PointIdx = int;
using SegIdx = int;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double manhattan(Vec2 a, Vec2 b) {
  const double dx = a.x > b.x ? a.x - b.x : b.x - a.x;
  const double dy = a.y > b.y ? a.y - b.y : b.y - a.y;
  return dx + dy;
}

enum class PointKind { kJunction, kWorkstationAnchor };

struct CriticalPoint {
  std::string id;
  Vec2 pos;
  PointKind kind = PointKind::kJunction;
};

struct CriticalSegment {
  PointIdx a = 0;
  PointIdx b = 0;
  double length = 0.0;
};

struct Workstation {
  WsId id{};
  PointIdx anchor = 0;
  double processing_time = 0.0;  // minutes per part
};

struct Path {
  std::vector<SegIdx> segments;
  std::vector<PointIdx> points;  // from..to inclusive; {from} when empty
  double distance = 0.0;
};

// Allowed-segment filter indexed by SegIdx. An empty mask means "all".
using SegmentMask = std::vector<bool>;

// Raw description used to build a graph; ids are resolved and checked by
// FloorGraph::build.
struct LayoutSpec {
  struct Point {
    std::string id;
    double x = 0.0;
    double y = 0.0;
    PointKind kind = PointKind::kJunction;
  };
  struct Segment {
    std::string a;
    std::string b;
  };
  struct Station {
    int id = 0;
    std::string anchor;
    double processing_time = 0.0;
  };
  std::string name;
  std::vector<Point> points;
  std::vector<Segment> segments;
  std::vector<Station> workstations;
  double adjacency_threshold = 0.0;
};

struct DijkstraResult {
  std::vector<double> dist;      // +inf when unreachable
  std::vector<SegIdx> via;       // segment used to reach each point, -1 at sources
};

class FloorGraph {
 public:
  // Validates every layout invariant and throws Error(kValidation) naming
  // the first violation.
  static FloorGraph build(const LayoutSpec& spec);

  const std::string& name() const { return name_; }
  std::span<const CriticalPoint> points() const { return points_; }
  std::span<const CriticalSegment> segments() const { return segments_; }
  std::span<const Workstation> workstations() const { return stations_; }
  double adjacency_threshold() const { return adjacency_threshold_; }

  std::size_t point_count() const { return points_.size(); }
  std::size_t segment_count() const { return segments_.size(); }
  std::size_t workstation_count() const { return stations_.size(); }

  std::optional<PointIdx> find_point(std::string_view id) const;
  std::optional<SegIdx> find_segment(PointIdx a, PointIdx b) const;
  std::span<const SegIdx> incident(PointIdx p) const { return incident_[p]; }
  PointIdx other_end(SegIdx s, PointIdx p) const {
    const auto& seg = segments_[s];
    return seg.a == p ? seg.b : seg.a;
  }

  bool has_workstation(WsId id) const;
  // Throws Error(kUnknownWorkstation).
  const Workstation& workstation(WsId id) const;
  std::size_t ws_index(WsId id) const;
  PointIdx anchor(WsId id) const { return workstation(id).anchor; }
  // Workstation anchored at p, if any.
  std::optional<WsId> workstation_at(PointIdx p) const;

  // Unrestricted shortest distance between points (precomputed).
  double distance(PointIdx a, PointIdx b) const {
    return all_dist_[static_cast<std::size_t>(a) * points_.size() + b];
  }
  double distance(WsId a, WsId b) const { return distance(anchor(a), anchor(b)); }

  // Multi-source Dijkstra restricted to `allowed` (empty = all segments).
  DijkstraResult dijkstra(std::span<const PointIdx> sources,
                          const SegmentMask& allowed) const;

  // Minimal path between two points; throws Error(kNoFeasiblePath).
  Path path_between(PointIdx from, PointIdx to, const SegmentMask& allowed = {}) const;

  // Walks `via` back from `target`; target must be reachable.
  Path extract_path(const DijkstraResult& result, PointIdx target) const;

  // Straight-line interpolation along a point sequence.
  Vec2 position_along(std::span<const PointIdx> points, double travelled) const;

 private:
  std::string name_;
  std::vector<CriticalPoint> points_;
  std::vector<CriticalSegment> segments_;
  std::vector<Workstation> stations_;
  std::vector<std::vector<SegIdx>> incident_;
  std::unordered_map<std::string, PointIdx> point_by_id_;
  std::unordered_map<int, std::size_t> ws_by_id_;
  std::vector<int> ws_at_point_;  // ws index or -1
  std::vector<double> all_dist_;
  std::vector<SegIdx> all_via_;
  double adjacency_threshold_ = 0.0;
};

// Global shortest path between two workstations, optionally restricted.
Path shortest_path(const FloorGraph& graph, WsId from, WsId to,
                   const SegmentMask& allowed = {});

// Manhattan distance between anchors within the adjacency threshold.
bool adjacent(const FloorGraph& graph, WsId a, WsId b);

}  // namespace zonesim

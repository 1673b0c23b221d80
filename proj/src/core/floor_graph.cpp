#include "zonesim/floor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "zonesim/error.hpp"

namespace zonesim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool nearly_equal(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) return a == b;
  return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kValidation: return "Validation";
    case ErrorCode::kUnknownWorkstation: return "UnknownWorkstation";
    case ErrorCode::kNoFeasiblePath: return "NoFeasiblePath";
    case ErrorCode::kZoneViolation: return "ZoneViolation";
    case ErrorCode::kNotATip: return "NotATip";
    case ErrorCode::kWouldDisconnect: return "WouldDisconnect";
    case ErrorCode::kWouldEmptyZone: return "WouldEmptyZone";
    case ErrorCode::kZeroVelocity: return "ZeroVelocity";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNoNeighbors: return "NoNeighbors";
    case ErrorCode::kInvalidMove: return "InvalidMove";
    case ErrorCode::kInfeasibleStart: return "InfeasibleStart";
    case ErrorCode::kOrphanPart: return "OrphanPart";
    case ErrorCode::kDeadlock: return "DeadlockDetected";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kIncompatible: return "Incompatible";
  }
  return "Unknown";
}

FloorGraph FloorGraph::build(const LayoutSpec& spec) {
  FloorGraph g;
  g.name_ = spec.name;
  if (!(std::isfinite(spec.adjacency_threshold) && spec.adjacency_threshold >= 0.0)) {
    throw LayoutError("adjacency_threshold_feet", -1,
                      "adjacency threshold must be a finite non-negative number");
  }
  g.adjacency_threshold_ = spec.adjacency_threshold;

  // Sort points by id so index order equals lexicographic id order.
  std::vector<std::size_t> order(spec.points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return spec.points[a].id < spec.points[b].id;
  });
  for (std::size_t i = 0; i < spec.points.size(); ++i) {
    const auto& p = spec.points[i];
    if (p.id.empty()) throw LayoutError("points", static_cast<int>(i), "point has an empty id");
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw LayoutError("points", static_cast<int>(i),
                        "point '" + p.id + "' has a non-finite coordinate");
    }
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& p = spec.points[order[k]];
    if (k > 0 && spec.points[order[k - 1]].id == p.id) {
      throw LayoutError("points", static_cast<int>(order[k]), "duplicate point id '" + p.id + "'");
    }
    g.point_by_id_.emplace(p.id, static_cast<PointIdx>(k));
    g.points_.push_back({p.id, {p.x, p.y}, p.kind});
  }
  {
    std::vector<std::size_t> by_pos(order.size());
    std::iota(by_pos.begin(), by_pos.end(), 0);
    std::stable_sort(by_pos.begin(), by_pos.end(), [&](std::size_t a, std::size_t b) {
      const auto& pa = g.points_[a].pos;
      const auto& pb = g.points_[b].pos;
      return std::tie(pa.x, pa.y) < std::tie(pb.x, pb.y);
    });
    for (std::size_t k = 1; k < by_pos.size(); ++k) {
      const auto& pa = g.points_[by_pos[k - 1]];
      const auto& pb = g.points_[by_pos[k]];
      if (pa.pos.x == pb.pos.x && pa.pos.y == pb.pos.y) {
        throw LayoutError("points", static_cast<int>(order[by_pos[k]]),
                          "points '" + pa.id + "' and '" + pb.id + "' share a position");
      }
    }
  }

  g.incident_.assign(g.points_.size(), {});
  for (std::size_t i = 0; i < spec.segments.size(); ++i) {
    const auto& s = spec.segments[i];
    const auto a = g.find_point(s.a);
    const auto b = g.find_point(s.b);
    const int idx = static_cast<int>(i);
    if (!a) throw LayoutError("segments", idx, "segment references unknown point '" + s.a + "'");
    if (!b) throw LayoutError("segments", idx, "segment references unknown point '" + s.b + "'");
    if (*a == *b) throw LayoutError("segments", idx, "segment '" + s.a + "' is a self loop");
    if (g.find_segment(*a, *b)) {
      throw LayoutError("segments", idx, "duplicate segment " + s.a + "-" + s.b);
    }
    const double len = manhattan(g.points_[*a].pos, g.points_[*b].pos);
    const SegIdx sid = static_cast<SegIdx>(g.segments_.size());
    g.segments_.push_back({std::min(*a, *b), std::max(*a, *b), len});
    g.incident_[*a].push_back(sid);
    g.incident_[*b].push_back(sid);
  }

  g.ws_at_point_.assign(g.points_.size(), -1);
  std::vector<std::size_t> ws_order(spec.workstations.size());
  std::iota(ws_order.begin(), ws_order.end(), 0);
  std::sort(ws_order.begin(), ws_order.end(), [&](std::size_t a, std::size_t b) {
    return spec.workstations[a].id < spec.workstations[b].id;
  });
  for (std::size_t k = 0; k < ws_order.size(); ++k) {
    const auto& w = spec.workstations[ws_order[k]];
    const int idx = static_cast<int>(ws_order[k]);
    const std::string label = "WS" + std::to_string(w.id);
    if (g.ws_by_id_.count(w.id)) throw LayoutError("workstations", idx, "duplicate workstation " + label);
    const auto anchor = g.find_point(w.anchor);
    if (!anchor) {
      throw LayoutError("workstations", idx, label + " anchor '" + w.anchor + "' does not exist");
    }
    if (g.points_[*anchor].kind != PointKind::kWorkstationAnchor) {
      throw LayoutError("workstations", idx,
                        label + " anchor '" + w.anchor + "' is not a workstation-anchor point");
    }
    if (!(std::isfinite(w.processing_time) && w.processing_time >= 0.0)) {
      throw LayoutError("workstations", idx, label + " has a negative processing time");
    }
    if (g.ws_at_point_[*anchor] >= 0) {
      throw LayoutError("workstations", idx,
                        label + " shares anchor '" + w.anchor + "' with another workstation");
    }
    if (g.incident_[*anchor].empty()) {
      throw LayoutError("workstations", idx, label + " anchor has no incident segment");
    }
    g.ws_at_point_[*anchor] = static_cast<int>(g.stations_.size());
    g.ws_by_id_.emplace(w.id, g.stations_.size());
    g.stations_.push_back({WsId{w.id}, *anchor, w.processing_time});
  }

  // All-pairs distances, one Dijkstra per source.
  const std::size_t n = g.points_.size();
  g.all_dist_.assign(n * n, kInf);
  g.all_via_.assign(n * n, -1);
  for (std::size_t s = 0; s < n; ++s) {
    const PointIdx src = static_cast<PointIdx>(s);
    auto r = g.dijkstra(std::span<const PointIdx>(&src, 1), {});
    std::copy(r.dist.begin(), r.dist.end(), g.all_dist_.begin() + static_cast<std::ptrdiff_t>(s * n));
    std::copy(r.via.begin(), r.via.end(), g.all_via_.begin() + static_cast<std::ptrdiff_t>(s * n));
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (n > 0 && !std::isfinite(g.all_dist_[p])) {
      throw LayoutError("points", -1,
                        "graph is disconnected: '" + g.points_[p].id + "' is unreachable from '" +
                            g.points_[0].id + "'");
    }
  }
  return g;
}

std::optional<PointIdx> FloorGraph::find_point(std::string_view id) const {
  auto it = point_by_id_.find(std::string(id));
  if (it == point_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<SegIdx> FloorGraph::find_segment(PointIdx a, PointIdx b) const {
  if (a < 0 || static_cast<std::size_t>(a) >= incident_.size()) return std::nullopt;
  for (SegIdx s : incident_[a]) {
    if (other_end(s, a) == b) return s;
  }
  return std::nullopt;
}

bool FloorGraph::has_workstation(WsId id) const { return ws_by_id_.count(to_int(id)) > 0; }

const Workstation& FloorGraph::workstation(WsId id) const { return stations_[ws_index(id)]; }

std::size_t FloorGraph::ws_index(WsId id) const {
  auto it = ws_by_id_.find(to_int(id));
  if (it == ws_by_id_.end()) {
    fail(ErrorCode::kUnknownWorkstation, "unknown workstation WS" + std::to_string(to_int(id)));
  }
  return it->second;
}

std::optional<WsId> FloorGraph::workstation_at(PointIdx p) const {
  const int w = ws_at_point_[p];
  if (w < 0) return std::nullopt;
  return stations_[w].id;
}

DijkstraResult FloorGraph::dijkstra(std::span<const PointIdx> sources,
                                    const SegmentMask& allowed) const {
  const std::size_t n = points_.size();
  DijkstraResult r{std::vector<double>(n, kInf), std::vector<SegIdx>(n, -1)};
  std::vector<PointIdx> pred(n, -1);
  std::vector<bool> done(n, false);
  using Item = std::pair<double, PointIdx>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (PointIdx s : sources) {
    if (r.dist[s] != 0.0) {
      r.dist[s] = 0.0;
      pq.push({0.0, s});
    }
  }
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = true;
    for (SegIdx s : incident_[u]) {
      if (!allowed.empty() && !allowed[s]) continue;
      const PointIdx v = other_end(s, u);
      if (done[v]) continue;
      const double nd = d + segments_[s].length;
      if (nd < r.dist[v] && !nearly_equal(nd, r.dist[v])) {
        r.dist[v] = nd;
        r.via[v] = s;
        pred[v] = u;
        pq.push({nd, v});
      } else if (nearly_equal(nd, r.dist[v]) && u < pred[v]) {
        // Equal length: prefer the lexicographically smaller predecessor.
        r.via[v] = s;
        pred[v] = u;
      }
    }
  }
  return r;
}

Path FloorGraph::extract_path(const DijkstraResult& result, PointIdx target) const {
  Path path;
  path.distance = result.dist[target];
  PointIdx cur = target;
  path.points.push_back(cur);
  while (result.via[cur] >= 0) {
    const SegIdx s = result.via[cur];
    path.segments.push_back(s);
    cur = other_end(s, cur);
    path.points.push_back(cur);
  }
  std::reverse(path.segments.begin(), path.segments.end());
  std::reverse(path.points.begin(), path.points.end());
  return path;
}

Path FloorGraph::path_between(PointIdx from, PointIdx to, const SegmentMask& allowed) const {
  if (from == to) return Path{{}, {from}, 0.0};
  if (allowed.empty()) {
    // Reconstruct from the cached single-source tree rooted at `from`.
    const std::size_t n = points_.size();
    const auto base = static_cast<std::size_t>(from) * n;
    DijkstraResult view;
    view.dist.assign(all_dist_.begin() + static_cast<std::ptrdiff_t>(base),
                     all_dist_.begin() + static_cast<std::ptrdiff_t>(base + n));
    view.via.assign(all_via_.begin() + static_cast<std::ptrdiff_t>(base),
                    all_via_.begin() + static_cast<std::ptrdiff_t>(base + n));
    return extract_path(view, to);
  }
  auto r = dijkstra(std::span<const PointIdx>(&from, 1), allowed);
  if (!std::isfinite(r.dist[to])) {
    fail(ErrorCode::kNoFeasiblePath,
         "no feasible path from '" + points_[from].id + "' to '" + points_[to].id + "'");
  }
  return extract_path(r, to);
}

Vec2 FloorGraph::position_along(std::span<const PointIdx> pts, double travelled) const {
  if (pts.empty()) return {};
  Vec2 cur = points_[pts.front()].pos;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const Vec2 next = points_[pts[k]].pos;
    const double len = manhattan(cur, next);
    if (travelled <= len) {
      const double f = len > 0.0 ? travelled / len : 0.0;
      return {cur.x + (next.x - cur.x) * f, cur.y + (next.y - cur.y) * f};
    }
    travelled -= len;
    cur = next;
  }
  return cur;
}

Path shortest_path(const FloorGraph& graph, WsId from, WsId to, const SegmentMask& allowed) {
  const PointIdx a = graph.anchor(from);
  const PointIdx b = graph.anchor(to);
  if (from == to) return Path{{}, {a}, 0.0};
  return graph.path_between(a, b, allowed);
}

bool adjacent(const FloorGraph& graph, WsId a, WsId b) {
  const auto& pa = graph.points()[graph.anchor(a)].pos;
  const auto& pb = graph.points()[graph.anchor(b)].pos;
  return manhattan(pa, pb) <= graph.adjacency_threshold();
}

}  // namespace zonesim

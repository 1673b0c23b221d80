#include "zonesim/zoning.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "zonesim/error.hpp"

namespace zonesim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string ws_name(WsId ws) { return "WS" + std::to_string(to_int(ws)); }

// Incidence of a zone's primary segments, keyed by point.
class ZoneIncidence {
 public:
  ZoneIncidence(const FloorGraph& graph, std::span<const SegIdx> segs)
      : adj_(graph.point_count()) {
    for (SegIdx s : segs) {
      const auto& seg = graph.segments()[s];
      adj_[seg.a].push_back(s);
      adj_[seg.b].push_back(s);
    }
  }
  const std::vector<SegIdx>& at(PointIdx p) const { return adj_[p]; }
  std::size_t degree(PointIdx p) const { return adj_[p].size(); }

 private:
  std::vector<std::vector<SegIdx>> adj_;
};

std::vector<bool> anchor_flags(const FloorGraph& graph, const Zone& zone) {
  std::vector<bool> flags(graph.point_count(), false);
  for (WsId ws : zone.workstations) flags[graph.anchor(ws)] = true;
  return flags;
}

void erase_sorted(std::vector<SegIdx>& v, std::span<const SegIdx> gone) {
  std::vector<SegIdx> sorted_gone(gone.begin(), gone.end());
  std::sort(sorted_gone.begin(), sorted_gone.end());
  std::vector<SegIdx> out;
  std::set_difference(v.begin(), v.end(), sorted_gone.begin(), sorted_gone.end(),
                      std::back_inserter(out));
  v = std::move(out);
}

std::optional<std::vector<SegIdx>> try_tip_branch(const FloorGraph& graph, const Zone& zone,
                                                  WsId ws) {
  if (!zone.contains(ws)) return std::nullopt;
  if (zone.workstations.size() == 1) return std::vector<SegIdx>{};
  const ZoneIncidence inc(graph, zone.segments);
  const auto anchors = anchor_flags(graph, zone);
  PointIdx cur = graph.anchor(ws);
  if (inc.degree(cur) != 1) return std::nullopt;
  std::vector<SegIdx> branch;
  SegIdx seg = inc.at(cur).front();
  while (true) {
    branch.push_back(seg);
    const PointIdx next = graph.other_end(seg, cur);
    if (anchors[next] || inc.degree(next) != 2) break;
    const auto& two = inc.at(next);
    seg = two[0] == seg ? two[1] : two[0];
    cur = next;
  }
  Zone rest = zone;
  rest.workstations.erase(std::find(rest.workstations.begin(), rest.workstations.end(), ws));
  erase_sorted(rest.segments, branch);
  prune_dangling(graph, rest);
  if (!zone_connected(graph, rest)) return std::nullopt;
  std::sort(branch.begin(), branch.end());
  return branch;
}

bool path_is_walk(const FloorGraph& graph, std::span<const SegIdx> path, PointIdx from,
                  PointIdx to) {
  PointIdx cur = from;
  for (SegIdx s : path) {
    if (s < 0 || static_cast<std::size_t>(s) >= graph.segment_count()) return false;
    const auto& seg = graph.segments()[s];
    if (seg.a != cur && seg.b != cur) return false;
    cur = graph.other_end(s, cur);
  }
  return cur == to;
}

bool link_holds(const FloorGraph& graph, const ZonePartition& p, const std::vector<int>& owner,
                const TransferLink& l) {
  const int nz = p.zone_count();
  if (l.station_zone < 0 || l.station_zone >= nz || l.path_zone < 0 || l.path_zone >= nz ||
      l.station_zone == l.path_zone) {
    return false;
  }
  if (!p.zones[l.station_zone].contains(l.station)) return false;
  if (!p.zones[l.path_zone].contains(l.path_from)) return false;
  if (!path_is_walk(graph, l.path, graph.anchor(l.path_from), graph.anchor(l.station))) return false;
  for (SegIdx s : l.path) {
    const int o = owner[s];
    if (o >= 0 && o != l.station_zone && o != l.path_zone) return false;
  }
  return true;
}

// Zone-level hop counts to `target_zone` over the link network.
std::vector<int> zone_hops(const ZonePartition& p, int target_zone) {
  const int nz = p.zone_count();
  std::vector<std::vector<int>> adj(nz);
  for (const auto& l : p.links) {
    adj[l.station_zone].push_back(l.path_zone);
    adj[l.path_zone].push_back(l.station_zone);
  }
  std::vector<int> hops(nz, std::numeric_limits<int>::max());
  std::deque<int> q{target_zone};
  hops[target_zone] = 0;
  while (!q.empty()) {
    const int z = q.front();
    q.pop_front();
    for (int n : adj[z]) {
      if (hops[n] == std::numeric_limits<int>::max()) {
        hops[n] = hops[z] + 1;
        q.push_back(n);
      }
    }
  }
  return hops;
}

}  // namespace

bool Zone::contains(WsId ws) const {
  return std::binary_search(workstations.begin(), workstations.end(), ws);
}

int ZonePartition::zone_of(WsId ws) const {
  for (const auto& z : zones) {
    if (z.contains(ws)) return z.id;
  }
  return -1;
}

std::vector<TransferLink> ZonePartition::links_of(int z) const {
  std::vector<TransferLink> out;
  for (const auto& l : links) {
    if (l.involves(z)) out.push_back(l);
  }
  return out;
}

std::vector<WsId> ZonePartition::stations(int z) const {
  std::vector<WsId> out = zones[z].workstations;
  for (const auto& l : links) {
    if (l.involves(z)) out.push_back(l.station);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> ZonePartition::segment_owner(std::size_t segment_count) const {
  std::vector<int> owner(segment_count, -1);
  for (const auto& z : zones) {
    for (SegIdx s : z.segments) {
      if (s >= 0 && static_cast<std::size_t>(s) < segment_count) owner[s] = z.id;
    }
  }
  return owner;
}

double FlowMatrix::total() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

bool zone_connected(const FloorGraph& graph, const Zone& zone) {
  if (zone.workstations.size() <= 1) return true;
  const ZoneIncidence inc(graph, zone.segments);
  std::vector<bool> seen(graph.point_count(), false);
  std::deque<PointIdx> q{graph.anchor(zone.workstations.front())};
  seen[q.front()] = true;
  while (!q.empty()) {
    const PointIdx u = q.front();
    q.pop_front();
    for (SegIdx s : inc.at(u)) {
      const PointIdx v = graph.other_end(s, u);
      if (!seen[v]) {
        seen[v] = true;
        q.push_back(v);
      }
    }
  }
  return std::all_of(zone.workstations.begin(), zone.workstations.end(),
                     [&](WsId ws) { return seen[graph.anchor(ws)]; });
}

void prune_dangling(const FloorGraph& graph, Zone& zone) {
  const auto anchors = anchor_flags(graph, zone);
  bool changed = true;
  while (changed) {
    changed = false;
    const ZoneIncidence inc(graph, zone.segments);
    std::vector<SegIdx> drop;
    for (SegIdx s : zone.segments) {
      const auto& seg = graph.segments()[s];
      if ((inc.degree(seg.a) == 1 && !anchors[seg.a]) || (inc.degree(seg.b) == 1 && !anchors[seg.b])) {
        drop.push_back(s);
      }
    }
    if (!drop.empty()) {
      erase_sorted(zone.segments, drop);
      changed = true;
    }
  }
}

std::vector<SegIdx> tip_branch(const FloorGraph& graph, const Zone& zone, WsId ws) {
  auto branch = try_tip_branch(graph, zone, ws);
  if (!branch) fail(ErrorCode::kNotATip, ws_name(ws) + " is not a tip of zone " + std::to_string(zone.id));
  return *branch;
}

std::vector<WsId> tip_workstations(const FloorGraph& graph, const Zone& zone) {
  std::vector<WsId> tips;
  for (WsId ws : zone.workstations) {
    if (try_tip_branch(graph, zone, ws)) tips.push_back(ws);
  }
  return tips;
}

ZonePartition transfer_tip(const FloorGraph& graph, const ZonePartition& partition,
                           int from_zone, int to_zone, WsId ws) {
  const int nz = partition.zone_count();
  if (from_zone < 0 || from_zone >= nz || to_zone < 0 || to_zone >= nz || from_zone == to_zone) {
    fail(ErrorCode::kInvalidArgument, "transfer_tip: bad zone pair");
  }
  ZonePartition next = partition;
  Zone& giver = next.zones[from_zone];
  Zone& taker = next.zones[to_zone];
  if (!giver.contains(ws)) {
    fail(ErrorCode::kNotATip, ws_name(ws) + " does not belong to zone " + std::to_string(from_zone));
  }
  if (giver.workstations.size() == 1) {
    fail(ErrorCode::kWouldEmptyZone, "zone " + std::to_string(from_zone) + " would lose its last workstation");
  }
  const auto branch = tip_branch(graph, giver, ws);
  giver.workstations.erase(std::find(giver.workstations.begin(), giver.workstations.end(), ws));
  erase_sorted(giver.segments, branch);
  prune_dangling(graph, giver);
  if (!zone_connected(graph, giver)) {
    fail(ErrorCode::kWouldDisconnect, "removing " + ws_name(ws) + " disconnects zone " + std::to_string(from_zone));
  }

  const auto owner = next.segment_owner(graph.segment_count());
  SegmentMask allowed(graph.segment_count());
  for (std::size_t s = 0; s < allowed.size(); ++s) allowed[s] = owner[s] < 0;
  std::vector<PointIdx> sources;
  for (WsId w : taker.workstations) sources.push_back(graph.anchor(w));
  for (SegIdx s : taker.segments) {
    sources.push_back(graph.segments()[s].a);
    sources.push_back(graph.segments()[s].b);
  }
  std::sort(sources.begin(), sources.end());
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
  const auto reach = graph.dijkstra(sources, allowed);
  const PointIdx target = graph.anchor(ws);
  if (!std::isfinite(reach.dist[target])) {
    fail(ErrorCode::kNoFeasiblePath,
         "zone " + std::to_string(to_zone) + " cannot reach " + ws_name(ws) + " over free segments");
  }
  const Path attach = graph.extract_path(reach, target);
  taker.segments.insert(taker.segments.end(), attach.segments.begin(), attach.segments.end());
  std::sort(taker.segments.begin(), taker.segments.end());
  taker.workstations.insert(std::upper_bound(taker.workstations.begin(), taker.workstations.end(), ws), ws);

  const auto new_owner = next.segment_owner(graph.segment_count());
  std::erase_if(next.links, [&](const TransferLink& l) { return !link_holds(graph, next, new_owner, l); });
  return next;
}

SegmentMask feasible_mask(const ZonePartition& partition, std::size_t segment_count, int a, int b) {
  const auto owner = partition.segment_owner(segment_count);
  SegmentMask mask(segment_count);
  for (std::size_t s = 0; s < segment_count; ++s) {
    mask[s] = owner[s] < 0 || owner[s] == a || owner[s] == b;
  }
  return mask;
}

Path shortest_feasible_path(const FloorGraph& graph, const ZonePartition& partition, WsId from,
                            WsId to) {
  graph.workstation(from);
  graph.workstation(to);
  const int za = partition.zone_of(from);
  const int zb = partition.zone_of(to);
  if (za < 0) fail(ErrorCode::kZoneViolation, ws_name(from) + " belongs to no zone");
  if (zb < 0) fail(ErrorCode::kZoneViolation, ws_name(to) + " belongs to no zone");
  return shortest_path(graph, from, to, feasible_mask(partition, graph.segment_count(), za, zb));
}

std::vector<TransferLink> find_transfer_stations(const FloorGraph& graph,
                                                 const ZonePartition& partition, int a, int b,
                                                 std::span<const double> loads) {
  const int nz = partition.zone_count();
  if (a == b || a < 0 || b < 0 || a >= nz || b >= nz) {
    fail(ErrorCode::kInvalidArgument, "find_transfer_stations needs two distinct zones");
  }
  if (loads.size() < static_cast<std::size_t>(nz)) {
    fail(ErrorCode::kDimensionMismatch, "find_transfer_stations: missing zone loads");
  }
  const auto tips_a = tip_workstations(graph, partition.zones[a]);
  const auto tips_b = tip_workstations(graph, partition.zones[b]);
  std::vector<WsId> near_b;  // tips of A adjacent to some tip of B
  std::vector<WsId> near_a;  // tips of B adjacent to some tip of A
  for (WsId ta : tips_a) {
    if (std::any_of(tips_b.begin(), tips_b.end(), [&](WsId tb) { return adjacent(graph, ta, tb); })) {
      near_b.push_back(ta);
    }
  }
  for (WsId tb : tips_b) {
    if (std::any_of(tips_a.begin(), tips_a.end(), [&](WsId ta) { return adjacent(graph, ta, tb); })) {
      near_a.push_back(tb);
    }
  }
  if (near_a.empty() || near_b.empty()) return {};

  const SegmentMask abp = feasible_mask(partition, graph.segment_count(), a, b);
  struct Candidate {
    WsId from_a;
    WsId from_b;
    Path path;  // oriented from the lower-numbered workstation
  };
  std::vector<Candidate> spc;
  for (WsId ta : near_b) {
    for (WsId tb : near_a) {
      const bool a_first = to_int(ta) < to_int(tb);
      const PointIdx src = graph.anchor(a_first ? ta : tb);
      const PointIdx dst = graph.anchor(a_first ? tb : ta);
      const auto r = graph.dijkstra(std::span<const PointIdx>(&src, 1), abp);
      if (!std::isfinite(r.dist[dst])) continue;
      spc.push_back({ta, tb, graph.extract_path(r, dst)});
    }
  }
  auto key = [](const Candidate& c) {
    return std::make_tuple(c.path.distance, std::min(to_int(c.from_a), to_int(c.from_b)),
                           std::max(to_int(c.from_a), to_int(c.from_b)), c.path.points);
  };
  std::sort(spc.begin(), spc.end(), [&](const Candidate& x, const Candidate& y) { return key(x) < key(y); });

  std::vector<TransferLink> out;
  while (!spc.empty()) {
    // Connecting paths are never primary segments, so assigning one leaves
    // the remaining candidates feasible; only the endpoints are consumed.
    const Candidate chosen = spc.front();
    TransferLink link;
    if (loads[a] >= loads[b]) {
      link = {chosen.from_a, a, b, chosen.from_b, chosen.path.segments};
    } else {
      link = {chosen.from_b, b, a, chosen.from_a, chosen.path.segments};
    }
    if (to_int(link.path_from) > to_int(link.station)) {
      std::reverse(link.path.begin(), link.path.end());
    }
    out.push_back(std::move(link));
    std::erase_if(spc, [&](const Candidate& c) {
      return c.from_a == chosen.from_a || c.from_b == chosen.from_b;
    });
  }
  return out;
}

ZonePartition assign_transfer_stations(const FloorGraph& graph, const ZonePartition& partition,
                                       std::span<const double> loads, std::span<const int> affected) {
  ZonePartition next = partition;
  const int nz = partition.zone_count();
  std::vector<bool> touched(nz, affected.empty());
  for (int z : affected) {
    if (z >= 0 && z < nz) touched[z] = true;
  }
  std::erase_if(next.links, [&](const TransferLink& l) {
    return touched[l.station_zone] || touched[l.path_zone];
  });
  for (int a = 0; a < nz; ++a) {
    for (int b = a + 1; b < nz; ++b) {
      if (!touched[a] && !touched[b]) continue;
      auto found = find_transfer_stations(graph, partition, a, b, loads);
      next.links.insert(next.links.end(), found.begin(), found.end());
    }
  }
  std::sort(next.links.begin(), next.links.end(), [](const TransferLink& x, const TransferLink& y) {
    return std::make_tuple(std::min(x.station_zone, x.path_zone), std::max(x.station_zone, x.path_zone),
                           to_int(x.station), to_int(x.path_from)) <
           std::make_tuple(std::min(y.station_zone, y.path_zone), std::max(y.station_zone, y.path_zone),
                           to_int(y.station), to_int(y.path_from));
  });
  return next;
}

LoadBreakdown zone_load(const FloorGraph& graph, const ZonePartition& partition, int zone,
                        const FlowMatrix& flows, double velocity, HandlingTimes handling) {
  if (!(velocity > 0.0)) fail(ErrorCode::kZeroVelocity, "robot velocity must be positive");
  if (zone < 0 || zone >= partition.zone_count()) fail(ErrorCode::kInvalidArgument, "zone_load: bad zone");
  if (flows.size() != graph.workstation_count()) {
    fail(ErrorCode::kDimensionMismatch, "flow matrix does not match the layout");
  }
  LoadBreakdown out;
  out.stations = partition.stations(zone);
  const std::size_t k = out.stations.size();
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = graph.ws_index(out.stations[i]);

  out.flow.assign(k * k, 0.0);
  out.empty.assign(k * k, 0.0);
  out.dist.assign(k * k, 0.0);
  out.empty_distance.assign(k * k, 0.0);
  out.loaded_distance.assign(k * k, 0.0);
  std::vector<double> inflow(k, 0.0), outflow(k, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double f = flows.at(idx[i], idx[j]);
      out.flow[i * k + j] = f;
      outflow[i] += f;
      inflow[j] += f;
      total += f;
    }
  }
  if (total > 0.0) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) out.empty[i * k + j] = inflow[i] * outflow[j] / total;
    }
  }

  std::vector<int> zone_of(k);
  for (std::size_t i = 0; i < k; ++i) zone_of[i] = partition.zone_of(out.stations[i]);
  std::map<std::pair<int, int>, SegmentMask> masks;
  double travel = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    std::map<int, DijkstraResult> from_i;  // keyed by peer zone
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t ij = i * k + j;
      if (i == j || (out.flow[ij] == 0.0 && out.empty[ij] == 0.0)) continue;
      const int zj = zone_of[j];
      auto it = from_i.find(zj);
      if (it == from_i.end()) {
        const auto key = std::minmax(zone_of[i], zj);
        auto m = masks.find(key);
        if (m == masks.end()) {
          m = masks.emplace(key, feasible_mask(partition, graph.segment_count(), key.first, key.second)).first;
        }
        const PointIdx src = graph.anchor(out.stations[i]);
        it = from_i.emplace(zj, graph.dijkstra(std::span<const PointIdx>(&src, 1), m->second)).first;
      }
      const double d = it->second.dist[graph.anchor(out.stations[j])];
      if (!std::isfinite(d)) {
        fail(ErrorCode::kNoFeasiblePath, "zone " + std::to_string(zone) + ": no feasible path " +
                                             ws_name(out.stations[i]) + " -> " + ws_name(out.stations[j]));
      }
      out.dist[ij] = d;
      out.empty_distance[ij] = out.empty[ij] * d;
      out.loaded_distance[ij] = out.flow[ij] * d;
      travel += out.empty_distance[ij] + out.loaded_distance[ij];
    }
  }
  out.load = travel / velocity + total * (handling.unload + handling.load);
  return out;
}

std::vector<Violation> validate_partition(const FloorGraph& graph, const ZonePartition& partition,
                                          std::optional<int> robot_count) {
  std::vector<Violation> out;
  auto add = [&](std::string kind, std::string msg) { out.push_back({std::move(kind), std::move(msg)}); };
  const int nz = partition.zone_count();
  if (nz < 1) {
    add("no-zones", "partition has no zones");
    return out;
  }
  if (robot_count && *robot_count != nz) {
    add("zone-count", "partition has " + std::to_string(nz) + " zones for " + std::to_string(*robot_count) + " robots");
  }
  bool structurally_sound = true;
  for (int z = 0; z < nz; ++z) {
    const Zone& zone = partition.zones[z];
    if (zone.id != z) {
      add("zone-id", "zone at position " + std::to_string(z) + " has id " + std::to_string(zone.id));
      structurally_sound = false;
    }
    if (zone.workstations.empty()) {
      add("empty-zone", "zone " + std::to_string(z) + " has no workstations");
      structurally_sound = false;
    }
    if (!std::is_sorted(zone.workstations.begin(), zone.workstations.end()) ||
        std::adjacent_find(zone.workstations.begin(), zone.workstations.end()) != zone.workstations.end()) {
      add("unsorted-zone", "zone " + std::to_string(z) + " workstation list is not strictly ascending");
      structurally_sound = false;
    }
    for (WsId ws : zone.workstations) {
      if (!graph.has_workstation(ws)) {
        add("unknown-workstation", "zone " + std::to_string(z) + " lists unknown " + ws_name(ws));
        structurally_sound = false;
      }
    }
    for (SegIdx s : zone.segments) {
      if (s < 0 || static_cast<std::size_t>(s) >= graph.segment_count()) {
        add("unknown-segment", "zone " + std::to_string(z) + " lists segment " + std::to_string(s));
        structurally_sound = false;
      }
    }
  }
  if (!structurally_sound) return out;

  std::vector<int> seen_in(graph.workstation_count(), -1);
  for (const auto& zone : partition.zones) {
    for (WsId ws : zone.workstations) {
      int& slot = seen_in[graph.ws_index(ws)];
      if (slot >= 0) {
        add("duplicate-membership", ws_name(ws) + " is in zones " + std::to_string(slot) + " and " + std::to_string(zone.id));
      } else {
        slot = zone.id;
      }
    }
  }
  for (std::size_t i = 0; i < seen_in.size(); ++i) {
    if (seen_in[i] < 0) add("unassigned-workstation", ws_name(graph.workstations()[i].id) + " belongs to no zone");
  }
  std::vector<int> seg_owner(graph.segment_count(), -1);
  for (const auto& zone : partition.zones) {
    for (SegIdx s : zone.segments) {
      if (seg_owner[s] >= 0 && seg_owner[s] != zone.id) {
        const auto& seg = graph.segments()[s];
        add("overlapping-segments", "segment " + graph.points()[seg.a].id + "-" + graph.points()[seg.b].id +
                                        " is primary in zones " + std::to_string(seg_owner[s]) + " and " +
                                        std::to_string(zone.id));
      } else {
        seg_owner[s] = zone.id;
      }
    }
  }
  for (const auto& zone : partition.zones) {
    if (!zone_connected(graph, zone)) {
      add("disconnected-zone", "zone " + std::to_string(zone.id) + " segments do not connect its workstations");
    } else if (tip_workstations(graph, zone).empty()) {
      add("no-tip", "zone " + std::to_string(zone.id) + " has no tip workstation");
    }
  }
  for (const auto& l : partition.links) {
    const std::string label = "transfer station " + ws_name(l.station);
    if (l.station_zone < 0 || l.station_zone >= nz || l.path_zone < 0 || l.path_zone >= nz ||
        l.station_zone == l.path_zone) {
      add("broken-link", label + " names invalid zones");
      continue;
    }
    if (!graph.has_workstation(l.station) || !graph.has_workstation(l.path_from)) {
      add("broken-link", label + " references unknown workstations");
      continue;
    }
    if (!partition.zones[l.station_zone].contains(l.station)) {
      add("broken-link", label + " is not in zone " + std::to_string(l.station_zone));
    }
    if (!partition.zones[l.path_zone].contains(l.path_from)) {
      add("broken-link", label + " path start " + ws_name(l.path_from) + " is not in zone " + std::to_string(l.path_zone));
    }
    if (!path_is_walk(graph, l.path, graph.anchor(l.path_from), graph.anchor(l.station))) {
      add("broken-link", label + " connecting path does not join " + ws_name(l.path_from) + " to the station");
      continue;
    }
    for (SegIdx s : l.path) {
      const int o = seg_owner[s];
      if (o >= 0 && o != l.station_zone && o != l.path_zone) {
        const auto& seg = graph.segments()[s];
        add("path-crossing", label + " connecting path crosses zone " + std::to_string(o) + " at " +
                                 graph.points()[seg.a].id + "-" + graph.points()[seg.b].id);
        break;
      }
    }
  }
  if (nz > 1) {
    for (int z = 0; z < nz; ++z) {
      if (partition.links_of(z).empty()) add("isolated-zone", "zone " + std::to_string(z) + " has no transfer station");
    }
    const auto hops = zone_hops(partition, 0);
    for (int z = 1; z < nz; ++z) {
      if (hops[z] == std::numeric_limits<int>::max()) {
        add("disconnected-network", "zone " + std::to_string(z) + " cannot reach zone 0 through transfer stations");
      }
    }
  }
  return out;
}

Leg plan_leg(const FloorGraph& graph, const ZonePartition& partition, WsId at, WsId target) {
  if (at == target) fail(ErrorCode::kInvalidArgument, "plan_leg: part is already at " + ws_name(at));
  const int za = partition.zone_of(at);
  const int zt = partition.zone_of(target);
  if (za < 0) fail(ErrorCode::kOrphanPart, ws_name(at) + " lies in no zone");
  if (zt < 0) fail(ErrorCode::kOrphanPart, ws_name(target) + " lies in no zone");
  const auto hops = zone_hops(partition, zt);

  std::vector<int> serving{za};
  for (const auto& l : partition.links) {
    if (l.station == at) serving.push_back(l.path_zone);
  }
  int carrier = za;
  for (int z : serving) {
    if (hops[z] < hops[carrier] || (hops[z] == hops[carrier] && carrier != za && z < carrier)) carrier = z;
  }
  if (hops[carrier] == std::numeric_limits<int>::max()) {
    fail(ErrorCode::kNoFeasiblePath, "no transfer-station route from zone " + std::to_string(carrier) +
                                         " to zone " + std::to_string(zt));
  }
  if (carrier == zt) return {carrier, target};

  const TransferLink* best = nullptr;
  double best_cost = kInf;
  for (const auto& l : partition.links) {
    if (!l.involves(carrier)) continue;
    const int peer = l.peer_of(carrier);
    if (hops[peer] != hops[carrier] - 1) continue;
    const double cost = graph.distance(at, l.station) + graph.distance(l.station, target);
    if (!best || cost < best_cost ||
        (cost == best_cost && std::make_pair(to_int(l.station), peer) <
                                  std::make_pair(to_int(best->station), best->peer_of(carrier)))) {
      best = &l;
      best_cost = cost;
    }
  }
  if (!best || best->station == at) {
    fail(ErrorCode::kNoFeasiblePath, "no usable transfer station out of zone " + std::to_string(carrier));
  }
  return {carrier, best->station};
}

std::vector<Leg> plan_route(const FloorGraph& graph, const ZonePartition& partition, WsId at,
                            WsId target) {
  std::vector<Leg> legs;
  const int limit = partition.zone_count() + 2;
  while (at != target) {
    if (static_cast<int>(legs.size()) > limit) {
      fail(ErrorCode::kNoFeasiblePath, "transfer route does not converge toward " + ws_name(target));
    }
    legs.push_back(plan_leg(graph, partition, at, target));
    at = legs.back().dropoff;
  }
  return legs;
}

}  // namespace zonesim

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zonesim/floor_graph.hpp"

namespace zonesim {

// A shared hand-off workstation between two zones. The station lies in the
// primary workstation set of `station_zone`; `path_zone` reaches it through
// `path`, a connecting path that starts at its own tip `path_from`.
struct TransferLink {
  WsId station{};
  int station_zone = -1;
  int path_zone = -1;
  WsId path_from{};
  std::vector<SegIdx> path;

  bool involves(int z) const { return station_zone == z || path_zone == z; }
  int peer_of(int z) const { return station_zone == z ? path_zone : station_zone; }
  friend bool operator==(const TransferLink&, const TransferLink&) = default;
};

struct Zone {
  int id = 0;
  std::vector<WsId> workstations;  // sorted ascending
  std::vector<SegIdx> segments;    // primary segments, sorted ascending

  bool contains(WsId ws) const;
  friend bool operator==(const Zone&, const Zone&) = default;
};

struct ZonePartition {
  std::string design_id;
  std::vector<Zone> zones;
  std::vector<TransferLink> links;

  int zone_count() const { return static_cast<int>(zones.size()); }
  // Zone whose primary set holds ws, or -1.
  int zone_of(WsId ws) const;
  // Links touching zone z.
  std::vector<TransferLink> links_of(int z) const;
  // Stations zone z serves: its workstations plus every transfer station it
  // shares with a neighbor (sorted, unique).
  std::vector<WsId> stations(int z) const;
  // Owner zone of each segment's primary assignment, -1 when unassigned.
  std::vector<int> segment_owner(std::size_t segment_count) const;

  friend bool operator==(const ZonePartition&, const ZonePartition&) = default;
};

// Dense loaded-trip counts over all workstations, indexed by FloorGraph::ws_index.
class FlowMatrix {
 public:
  FlowMatrix() = default;
  explicit FlowMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double& at(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double total() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct HandlingTimes {
  double unload = 0.0;  // t_u, minutes
  double load = 0.0;    // t_l, minutes
};

// Square matrices over `stations` (row-major, stations.size()^2).
struct LoadBreakdown {
  std::vector<WsId> stations;
  std::vector<double> flow;   // f
  std::vector<double> empty;  // g
  std::vector<double> dist;   // d, feet (0 where unused)
  std::vector<double> empty_distance;   // DA
  std::vector<double> loaded_distance;  // DB
  double load = 0.0;                    // minutes
};

// Tip workstations of a zone, ascending.
std::vector<WsId> tip_workstations(const FloorGraph& graph, const Zone& zone);

// Segments removed together with tip `ws` (its sole branch). Throws kNotATip.
std::vector<SegIdx> tip_branch(const FloorGraph& graph, const Zone& zone, WsId ws);

// True when the zone's primary segments connect all of its workstations.
bool zone_connected(const FloorGraph& graph, const Zone& zone);

// Drops dangling segments that end at a point holding none of the zone's
// workstations.
void prune_dangling(const FloorGraph& graph, Zone& zone);

// Moves tip `ws` from `from_zone` to `to_zone`. Links touching either zone
// that no longer hold are dropped; call assign_transfer_stations afterwards.
ZonePartition transfer_tip(const FloorGraph& graph, const ZonePartition& partition,
                           int from_zone, int to_zone, WsId ws);

// Mask of segments a path between zones a and b may use: their primary
// segments plus unassigned ones.
SegmentMask feasible_mask(const ZonePartition& partition, std::size_t segment_count, int a, int b);

Path shortest_feasible_path(const FloorGraph& graph, const ZonePartition& partition, WsId from,
                            WsId to);

// Transfer-station discovery between zones a and b for the given per-zone
// loads. Returns no links when the zones share no adjacent tips.
std::vector<TransferLink> find_transfer_stations(const FloorGraph& graph,
                                                 const ZonePartition& partition, int a, int b,
                                                 std::span<const double> loads);

// Recomputes links for every zone pair touching `affected` (all pairs when
// empty); links between two unaffected zones are kept.
ZonePartition assign_transfer_stations(const FloorGraph& graph, const ZonePartition& partition,
                                       std::span<const double> loads,
                                       std::span<const int> affected = {});

LoadBreakdown zone_load(const FloorGraph& graph, const ZonePartition& partition, int zone,
                        const FlowMatrix& flows, double velocity, HandlingTimes handling);

struct Violation {
  std::string kind;
  std::string message;
};

std::vector<Violation> validate_partition(const FloorGraph& graph, const ZonePartition& partition,
                                          std::optional<int> robot_count = std::nullopt);

// One robot delivery: `zone`'s robot carries the part from its current
// workstation to `dropoff` (the target itself or a transfer station).
struct Leg {
  int zone = -1;
  WsId dropoff{};
};

// Next leg of a part sitting at `at` and bound for `target` under the
// partition's transfer-station network. Throws kOrphanPart when `at` or
// `target` is in no zone and kNoFeasiblePath when zones cannot be linked.
Leg plan_leg(const FloorGraph& graph, const ZonePartition& partition, WsId at, WsId target);

// Every leg from `at` to `target`.
std::vector<Leg> plan_route(const FloorGraph& graph, const ZonePartition& partition, WsId at,
                            WsId target);

}  // namespace zonesim

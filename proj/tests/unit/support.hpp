#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <tuple>
#include <vector>

#include "zonesim/baselines.hpp"
#include "zonesim/floor_graph.hpp"
#include "zonesim/io.hpp"
#include "zonesim/zoning.hpp"

namespace zonesim::testing {

inline std::string data_path(const std::string& rel) { return std::string(ZONESIM_DATA_DIR) + "/" + rel; }

inline const FloorGraph& floor18() {
  static const FloorGraph g = load_layout(data_path("floor18.json"));
  return g;
}

inline const FloorGraph& fig2() {
  static const FloorGraph g = load_layout(data_path("fixtures/fig2_layout.json"));
  return g;
}

inline const FloorGraph& dumbbell() {
  static const FloorGraph g = load_layout(data_path("fixtures/dumbbell_layout.json"));
  return g;
}

inline ZonePartition fig2_partition() {
  return load_partition(fig2(), data_path("fixtures/fig2_partition.json"));
}

inline WsId ws(int n) { return WsId{n}; }

inline SegIdx seg(const FloorGraph& g, const std::string& a, const std::string& b) {
  return *g.find_segment(*g.find_point(a), *g.find_point(b));
}

inline std::vector<SegIdx> segs(const FloorGraph& g, std::initializer_list<std::pair<const char*, const char*>> list) {
  std::vector<SegIdx> out;
  for (const auto& [a, b] : list) out.push_back(seg(g, a, b));
  std::sort(out.begin(), out.end());
  return out;
}

// rows x cols lattice of junctions "Pr_c" spaced `pitch` apart, with one
// workstation anchored at every lattice point numbered row-major from 1.
inline FloorGraph grid(int rows, int cols, double pitch = 10.0, double threshold = 15.0) {
  LayoutSpec spec;
  spec.name = "grid";
  spec.adjacency_threshold = threshold;
  auto id = [](int r, int c) { return "P" + std::to_string(r) + "_" + std::to_string(c); };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      spec.points.push_back({id(r, c), c * pitch, r * pitch, PointKind::kWorkstationAnchor});
      spec.workstations.push_back({r * cols + c + 1, id(r, c), 1.0});
      if (c + 1 < cols) spec.segments.push_back({id(r, c), id(r, c + 1)});
      if (r + 1 < rows) spec.segments.push_back({id(r, c), id(r + 1, c)});
    }
  }
  return FloorGraph::build(spec);
}

inline FlowMatrix flows_of(const FloorGraph& g, std::initializer_list<std::tuple<int, int, double>> entries) {
  FlowMatrix f(g.workstation_count());
  for (const auto& [i, j, v] : entries) f.at(g.ws_index(ws(i)), g.ws_index(ws(j))) += v;
  return f;
}

inline std::vector<DeliveryRecord> scenario_history(const Scenario& s) { return training_history(s); }

}  // namespace zonesim::testing

#include "zonesim/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zonesim/error.hpp"

namespace zonesim {

CommGraph CommGraph::from_positions(std::span<const Vec2> positions, double range) {
  CommGraph g;
  g.node_count = positions.size();
  g.range = range;
  g.neighbors.assign(g.node_count, {});
  for (std::size_t i = 0; i < g.node_count; ++i) {
    for (std::size_t j = i + 1; j < g.node_count; ++j) {
      const double dx = positions[j].x - positions[i].x;
      const double dy = positions[j].y - positions[i].y;
      if (std::hypot(dx, dy) <= range) {
        g.edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
        g.neighbors[i].push_back(static_cast<int>(j));
        g.neighbors[j].push_back(static_cast<int>(i));
      }
    }
  }
  for (auto& n : g.neighbors) std::sort(n.begin(), n.end());
  return g;
}

CommGraph CommGraph::from_edges(std::size_t node_count, std::span<const std::pair<int, int>> edges) {
  CommGraph g;
  g.node_count = node_count;
  g.neighbors.assign(node_count, {});
  for (auto [a, b] : edges) {
    if (a == b || a < 0 || b < 0 || static_cast<std::size_t>(a) >= node_count ||
        static_cast<std::size_t>(b) >= node_count) {
      fail(ErrorCode::kInvalidArgument, "comm graph edge out of range");
    }
    const auto e = std::minmax(a, b);
    if (std::find(g.edges.begin(), g.edges.end(), std::pair<int, int>(e.first, e.second)) != g.edges.end()) continue;
    g.edges.emplace_back(e.first, e.second);
    g.neighbors[a].push_back(b);
    g.neighbors[b].push_back(a);
  }
  std::sort(g.edges.begin(), g.edges.end());
  for (auto& n : g.neighbors) std::sort(n.begin(), n.end());
  return g;
}

WeightMatrix metropolis_weights(const CommGraph& graph) {
  const std::size_t n = graph.node_count;
  WeightMatrix m{n, std::vector<double>(n * n, 0.0)};
  for (auto [i, j] : graph.edges) {
    const double w = 1.0 / (1.0 + std::max(graph.degree(i), graph.degree(j)));
    m.w[i * n + j] = w;
    m.w[j * n + i] = w;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (int k : graph.neighbors[i]) off += m.w[i * n + k];
    m.w[i * n + i] = 1.0 - off;
  }
  return m;
}

ConsensusState consensus_step(const ConsensusState& state, const CommGraph& graph) {
  if (state.values.size() != graph.node_count) {
    fail(ErrorCode::kDimensionMismatch, "consensus state has " + std::to_string(state.values.size()) +
                                            " values for " + std::to_string(graph.node_count) + " nodes");
  }
  const auto w = metropolis_weights(graph);
  ConsensusState next{state.values, state.iteration + 1};
  for (std::size_t i = 0; i < graph.node_count; ++i) {
    double x = w.at(i, i) * state.values[i];
    for (int j : graph.neighbors[i]) x += w.at(i, j) * state.values[j];
    next.values[i] = x;
  }
  return next;
}

bool consensus_done(std::span<const double> values, double mean, const ConsensusOptions& options,
                    int steps) {
  if (steps >= options.max_steps) return true;
  if (options.stop == ConsensusStop::kFixedSteps) return false;
  double spread = 0.0;
  for (double v : values) spread = std::max(spread, std::fabs(v - mean));
  return spread < options.tolerance;
}

ConsensusResult run_consensus(std::span<const double> initial_loads, const PositionTrace& trace,
                              double range, const ConsensusOptions& options,
                              std::vector<ConsensusTraceRow>* trace_out) {
  ConsensusResult out;
  ConsensusState state{{initial_loads.begin(), initial_loads.end()}, 0};
  const double mean = initial_loads.empty()
                          ? 0.0
                          : std::accumulate(initial_loads.begin(), initial_loads.end(), 0.0) /
                                static_cast<double>(initial_loads.size());
  auto record = [&](const CommGraph* g) {
    if (!trace_out) return;
    for (std::size_t i = 0; i < state.values.size(); ++i) {
      trace_out->push_back({state.iteration, static_cast<int>(i), state.values[i], g ? g->degree(static_cast<int>(i)) : 0});
    }
  };
  record(nullptr);
  while (!consensus_done(state.values, mean, options, state.iteration)) {
    const auto positions = trace(state.iteration);
    const auto graph = CommGraph::from_positions(positions, range);
    state = consensus_step(state, graph);
    record(&graph);
  }
  out.values = state.values;
  out.steps = state.iteration;
  for (double v : out.values) out.spread = std::max(out.spread, std::fabs(v - mean));
  out.converged = out.spread < options.tolerance;
  return out;
}

}  // namespace zonesim

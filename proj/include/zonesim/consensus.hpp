#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "zonesim/floor_graph.hpp"

namespace zonesim {

// Range-limited robot communication graph at one instant.
struct CommGraph {
  std::size_t node_count = 0;
  double range = 0.0;
  std::vector<std::pair<int, int>> edges;  // i < j
  std::vector<std::vector<int>> neighbors;  // ascending

  int degree(int i) const { return static_cast<int>(neighbors[i].size()); }

  // Edge {i,j} iff the Euclidean distance between positions is <= range.
  static CommGraph from_positions(std::span<const Vec2> positions, double range);
  static CommGraph from_edges(std::size_t node_count, std::span<const std::pair<int, int>> edges);
};

// Dense row-major weight matrix.
struct WeightMatrix {
  std::size_t n = 0;
  std::vector<double> w;

  double at(std::size_t i, std::size_t j) const { return w[i * n + j]; }
};

WeightMatrix metropolis_weights(const CommGraph& graph);

struct ConsensusState {
  std::vector<double> values;  // x_i, minutes
  int iteration = 0;
};

// One synchronous averaging step; throws kDimensionMismatch.
ConsensusState consensus_step(const ConsensusState& state, const CommGraph& graph);

enum class ConsensusStop {
  kTolerance,   // stop once max_i |x_i - mean(L)| < tolerance
  kFixedSteps,  // always run max_steps
};

struct ConsensusOptions {
  double tolerance = 1e-4;
  int max_steps = 500;
  ConsensusStop stop = ConsensusStop::kTolerance;
};

struct ConsensusTraceRow {
  int step = 0;
  int robot = 0;
  double value = 0.0;
  int degree = 0;
};

struct ConsensusResult {
  std::vector<double> values;
  int steps = 0;
  double spread = 0.0;  // max_i |x_i - mean(initial)|
  bool converged = false;
};

// Robot positions at a given consensus step.
using PositionTrace = std::function<std::vector<Vec2>(int step)>;

// Checks the stopping rule for the current values.
bool consensus_done(std::span<const double> values, double mean, const ConsensusOptions& options,
                    int steps);

ConsensusResult run_consensus(std::span<const double> initial_loads, const PositionTrace& trace,
                              double range, const ConsensusOptions& options = {},
                              std::vector<ConsensusTraceRow>* trace_out = nullptr);

}  // namespace zonesim

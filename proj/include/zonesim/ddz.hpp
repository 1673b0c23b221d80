#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"
#include "zonesim/consensus.hpp"
#include "zonesim/zoning.hpp"

namespace zonesim {

// Geometric cooling shared by the decentralized protocol and the
// centralized annealing baseline.
struct AnnealingSchedule {
  double initial_temperature = 10.0;   // T_i
  double freezing_temperature = 0.01;  // T_f
  int reductions = 0;                  // M; <= 0 means "size to the run"
  double k = 1.0;                      // weight temperature constant
  // k -> 0+ limit: strictly worsening moves are never accepted.
  bool greedy_limit = false;
};

double temperature(const AnnealingSchedule& schedule, double n, int reductions);
inline double temperature(const AnnealingSchedule& schedule, double n) {
  return temperature(schedule, n, schedule.reductions);
}

// min(1, exp(energy / (k * tc))), energy = sigma_before - sigma_after.
double acceptance_probability(double energy, double k, double tc, bool greedy_limit = false);

enum class SigmaForm {
  kDeviation,  // (L_i - x_i)^2 own term
  kLiteral,    // (L_i + x_i)^2 own term, as printed
};

enum class LeaderHandoff { kRoundRobin, kRandom };

struct DdzConfig {
  double load_tolerance = 10.0;   // L_TOL, minutes
  double imbalance_time = 6.0;    // T_LT, minutes
  double consensus_period = 2.0;  // T_AC, minutes
  int episodes = 0;               // E_t; <= 0 means one per participant
  int iterations = 40;            // I_t per episode
  double comm_range = 150.0;      // r, feet
  SigmaForm sigma_form = SigmaForm::kDeviation;
  bool reset_n_per_episode = false;
  LeaderHandoff handoff = LeaderHandoff::kRoundRobin;
};

struct NeighborView {
  int robot = 0;
  std::vector<int> neighbors;
  double own_load = 0.0;                // L_i
  std::vector<double> neighbor_loads;   // L_j, parallel to neighbors
  double consensus = 0.0;               // x_i
};

double load_sigma(const NeighborView& view, SigmaForm form = SigmaForm::kDeviation);

struct LoadSample {
  double time = 0.0;
  double load = 0.0;
  double consensus = 0.0;
};

// True iff |L - x| > tolerance held continuously over the trailing
// imbalance_time minutes, judged from time-ordered samples.
bool detect_imbalance(std::span<const LoadSample> history, const DdzConfig& config, double now);

// Robots reached by flooding the start signal from `origin`.
std::vector<int> propagate_start(int origin, const CommGraph& graph);

// Everything the participating robots can see while redesigning zones.
struct DdzWorld {
  const FloorGraph* graph = nullptr;
  ZonePartition partition;
  std::vector<std::vector<int>> neighbors;  // per robot, within participants
  std::vector<double> consensus;            // x_i per robot
  // Re-queues all parts under a design and returns every robot's load.
  // Must be a pure function of the design.
  std::function<std::vector<double>(const ZonePartition&)> evaluate_loads;
};

struct DdzEpisode {
  int leader = 0;
  double start_sigma = 0.0;
  double best_sigma = 0.0;
  std::vector<double> best_sigma_trace;  // after every iteration
  ZonePartition best;
};

struct DdzResult {
  ZonePartition partition;  // final adopted design
  std::vector<DdzEpisode> episodes;
  int proposals = 0;
  int invalid_moves = 0;
  int accepted = 0;
  int accepted_worse = 0;
  std::vector<nlohmann::json> trace;
};

DdzResult ddz_optimize(int leader, std::span<const int> participants, const DdzWorld& world,
                       const DdzConfig& config, const AnnealingSchedule& schedule,
                       std::uint64_t seed);

}  // namespace zonesim

#include "zonesim/ddz.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "zonesim/error.hpp"
#include "zonesim/rng.hpp"

namespace zonesim {

double temperature(const AnnealingSchedule& schedule, double n, int reductions) {
  if (reductions < 1) fail(ErrorCode::kInvalidArgument, "temperature schedule needs M >= 1");
  // T_i * (T_f / T_i)^(n/M), written so both endpoints are exact.
  const double f = n / static_cast<double>(reductions);
  return std::pow(schedule.initial_temperature, 1.0 - f) * std::pow(schedule.freezing_temperature, f);
}

double acceptance_probability(double energy, double k, double tc, bool greedy_limit) {
  if (energy >= 0.0) return 1.0;
  if (greedy_limit) return 0.0;
  return std::min(1.0, std::exp(energy / (k * tc)));
}

double load_sigma(const NeighborView& view, SigmaForm form) {
  const double own = form == SigmaForm::kDeviation ? view.own_load - view.consensus
                                                    : view.own_load + view.consensus;
  double sum = own * own;
  for (double lj : view.neighbor_loads) sum += (lj - view.consensus) * (lj - view.consensus);
  return std::sqrt(sum / static_cast<double>(view.neighbor_loads.size() + 1));
}

bool detect_imbalance(std::span<const LoadSample> history, const DdzConfig& config, double now) {
  auto violating = [&](const LoadSample& s) {
    return std::fabs(s.load - s.consensus) > config.load_tolerance;
  };
  if (history.empty() || !violating(history.back())) return false;
  double start = history.back().time;
  for (std::size_t i = history.size() - 1; i-- > 0;) {
    if (!violating(history[i])) break;
    start = history[i].time;
  }
  return now - start >= config.imbalance_time - 1e-9;
}

std::vector<int> propagate_start(int origin, const CommGraph& graph) {
  std::vector<bool> reached(graph.node_count, false);
  std::deque<int> frontier{origin};
  reached[origin] = true;
  while (!frontier.empty()) {
    const int r = frontier.front();
    frontier.pop_front();
    for (int n : graph.neighbors[r]) {
      if (!reached[n]) {
        reached[n] = true;
        frontier.push_back(n);
      }
    }
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < reached.size(); ++i) {
    if (reached[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

namespace {

NeighborView view_of(int robot, const std::vector<int>& neighbors, const std::vector<double>& loads,
                     const std::vector<double>& consensus) {
  NeighborView v;
  v.robot = robot;
  v.neighbors = neighbors;
  v.own_load = loads[robot];
  for (int j : neighbors) v.neighbor_loads.push_back(loads[j]);
  v.consensus = consensus[robot];
  return v;
}

std::vector<int> dropped_link_zones(const ZonePartition& before, const ZonePartition& after) {
  std::vector<int> zones;
  for (const auto& l : before.links) {
    if (std::find(after.links.begin(), after.links.end(), l) == after.links.end()) {
      zones.push_back(l.station_zone);
      zones.push_back(l.path_zone);
    }
  }
  return zones;
}

}  // namespace

DdzResult ddz_optimize(int leader, std::span<const int> participants, const DdzWorld& world,
                       const DdzConfig& config, const AnnealingSchedule& schedule,
                       std::uint64_t seed) {
  if (!world.graph || !world.evaluate_loads) {
    fail(ErrorCode::kInvalidArgument, "ddz_optimize needs a graph and a load evaluator");
  }
  const FloorGraph& graph = *world.graph;
  const std::set<int> members(participants.begin(), participants.end());
  if (!members.count(leader)) fail(ErrorCode::kInvalidArgument, "leader is not a participant");
  const int nz = world.partition.zone_count();
  if (static_cast<int>(world.consensus.size()) != nz || static_cast<int>(world.neighbors.size()) != nz) {
    fail(ErrorCode::kDimensionMismatch, "ddz world needs one consensus value and neighbor set per robot");
  }

  Rng rng(seed);
  const int episodes = config.episodes > 0 ? config.episodes : static_cast<int>(members.size());
  const int iterations = std::max(config.iterations, 0);
  const int reductions = schedule.reductions > 0
                             ? schedule.reductions
                             : std::max(1, config.reset_n_per_episode ? iterations : episodes * iterations);

  DdzResult out;
  ZonePartition current = world.partition;
  std::vector<double> loads = world.evaluate_loads(current);
  long n_total = 0;
  int cur = leader;

  for (int ep = 0; ep < episodes; ++ep) {
    std::vector<int> nbrs;
    for (int j : world.neighbors[cur]) {
      if (members.count(j) && j != cur) nbrs.push_back(j);
    }
    if (nbrs.empty()) {
      out.trace.push_back({{"event", "no-neighbors"}, {"episode", ep}, {"leader", cur}});
      break;
    }
    DdzEpisode episode;
    episode.leader = cur;
    episode.start_sigma = load_sigma(view_of(cur, nbrs, loads, world.consensus), config.sigma_form);
    episode.best_sigma = episode.start_sigma;
    episode.best = current;
    std::vector<double> best_loads = loads;
    out.trace.push_back({{"event", "episode-start"}, {"episode", ep}, {"leader", cur},
                         {"neighbors", nbrs}, {"sigma", episode.start_sigma}});

    for (int it = 0; it < iterations; ++it) {
      const long n = config.reset_n_per_episode ? it : n_total;
      ++n_total;
      ++out.proposals;
      const double sigma = load_sigma(view_of(cur, nbrs, loads, world.consensus), config.sigma_form);
      const int j = nbrs[rng.index(nbrs.size())];
      const int giver = loads[cur] >= loads[j] ? cur : j;
      const int receiver = giver == cur ? j : cur;
      const auto tips = tip_workstations(graph, current.zones[giver]);
      nlohmann::json rec{{"event", "proposal"}, {"episode", ep}, {"leader", cur}, {"n", n},
                         {"giver", giver}, {"receiver", receiver}, {"sigma_before", sigma}};
      if (tips.empty() || current.zones[giver].workstations.size() < 2) {
        rec["event"] = "invalid-move";
        rec["reason"] = "giver has no transferable tip";
        out.trace.push_back(std::move(rec));
        ++out.invalid_moves;
        episode.best_sigma_trace.push_back(episode.best_sigma);
        continue;
      }
      const WsId ws = tips[rng.index(tips.size())];
      rec["ws"] = to_int(ws);
      ZonePartition candidate;
      std::vector<double> candidate_loads;
      try {
        candidate = transfer_tip(graph, current, giver, receiver, ws);
        std::vector<int> affected{cur};
        affected.insert(affected.end(), nbrs.begin(), nbrs.end());
        const auto dropped = dropped_link_zones(current, candidate);
        affected.insert(affected.end(), dropped.begin(), dropped.end());
        candidate = assign_transfer_stations(graph, candidate, loads, affected);
        const auto violations = validate_partition(graph, candidate);
        if (!violations.empty()) fail(ErrorCode::kInvalidMove, violations.front().message);
        candidate_loads = world.evaluate_loads(candidate);
      } catch (const Error& e) {
        rec["event"] = "invalid-move";
        rec["reason"] = e.what();
        out.trace.push_back(std::move(rec));
        ++out.invalid_moves;
        episode.best_sigma_trace.push_back(episode.best_sigma);
        continue;
      }
      const double sigma_new =
          load_sigma(view_of(cur, nbrs, candidate_loads, world.consensus), config.sigma_form);
      const double energy = sigma - sigma_new;
      const double tc = temperature(schedule, static_cast<double>(n), reductions);
      const double p = acceptance_probability(energy, schedule.k, tc, schedule.greedy_limit);
      const double r = rng.uniform_open_closed();
      const bool accept = sigma_new <= sigma || r <= p;
      rec["sigma_after"] = sigma_new;
      rec["temperature"] = tc;
      rec["p"] = p;
      rec["r"] = r;
      rec["accepted"] = accept;
      out.trace.push_back(std::move(rec));
      if (sigma_new < episode.best_sigma) {
        episode.best_sigma = sigma_new;
        episode.best = candidate;
        best_loads = candidate_loads;
      }
      if (accept) {
        ++out.accepted;
        if (sigma_new > sigma) ++out.accepted_worse;
        current = std::move(candidate);
        loads = std::move(candidate_loads);
      }
      episode.best_sigma_trace.push_back(episode.best_sigma);
    }

    current = episode.best;
    loads = best_loads;
    out.trace.push_back({{"event", "episode-end"}, {"episode", ep}, {"leader", cur},
                         {"best_sigma", episode.best_sigma}});
    out.episodes.push_back(std::move(episode));

    int next = cur;
    if (config.handoff == LeaderHandoff::kRandom) {
      next = nbrs[rng.index(nbrs.size())];
    } else {
      auto it = std::upper_bound(nbrs.begin(), nbrs.end(), cur);
      next = it == nbrs.end() ? nbrs.front() : *it;
    }
    if (ep + 1 < episodes) out.trace.push_back({{"event", "leader-handoff"}, {"from", cur}, {"to", next}});
    cur = next;
  }
  out.partition = std::move(current);
  return out;
}

}  // namespace zonesim

#include "zonesim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "zonesim/error.hpp"
#include "zonesim/rng.hpp"

namespace zonesim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPenalty = -1e12;

void check_zone_count(const FloorGraph& graph, int nz) {
  if (nz < 1) fail(ErrorCode::kInvalidArgument, "zone count must be at least 1");
  if (static_cast<std::size_t>(nz) > graph.workstation_count()) {
    fail(ErrorCode::kInfeasibleStart, "cannot build " + std::to_string(nz) + " zones from " +
                                          std::to_string(graph.workstation_count()) + " workstations");
  }
}

std::vector<WsId> sorted_workstations(const FloorGraph& graph) {
  std::vector<WsId> out;
  for (const auto& w : graph.workstations()) out.push_back(w.id);
  std::sort(out.begin(), out.end());
  return out;
}

// Farthest-point seeds: the first is the station farthest from `first`,
// each later one maximizes its distance to the seeds already chosen.
std::vector<WsId> spread_seeds(const FloorGraph& graph, int nz, WsId first) {
  const auto all = sorted_workstations(graph);
  if (nz == 1) return {first};
  std::vector<WsId> seeds;
  WsId far = first;
  for (WsId w : all) {
    if (graph.distance(first, w) > graph.distance(first, far)) far = w;
  }
  seeds.push_back(far);
  while (static_cast<int>(seeds.size()) < nz) {
    WsId pick{};
    double pick_d = -1.0;
    for (WsId w : all) {
      if (std::find(seeds.begin(), seeds.end(), w) != seeds.end()) continue;
      double d = kInf;
      for (WsId s : seeds) d = std::min(d, graph.distance(s, w));
      if (d > pick_d) {
        pick = w;
        pick_d = d;
      }
    }
    seeds.push_back(pick);
  }
  return seeds;
}

struct Growth {
  std::vector<Zone> zones;
  std::vector<int> owner;  // per segment
  std::vector<int> ws_zone;  // per ws index, -1 when unclaimed
};

Growth start_growth(const FloorGraph& graph, const std::vector<WsId>& seeds) {
  Growth g;
  g.owner.assign(graph.segment_count(), -1);
  g.ws_zone.assign(graph.workstation_count(), -1);
  for (std::size_t z = 0; z < seeds.size(); ++z) {
    Zone zone;
    zone.id = static_cast<int>(z);
    zone.workstations.push_back(seeds[z]);
    g.zones.push_back(std::move(zone));
    g.ws_zone[graph.ws_index(seeds[z])] = static_cast<int>(z);
  }
  return g;
}

DijkstraResult reach_from_zone(const FloorGraph& graph, const Growth& g, int z) {
  SegmentMask free(graph.segment_count());
  for (std::size_t s = 0; s < free.size(); ++s) free[s] = g.owner[s] < 0;
  std::vector<PointIdx> sources;
  for (WsId w : g.zones[z].workstations) sources.push_back(graph.anchor(w));
  for (SegIdx s : g.zones[z].segments) {
    sources.push_back(graph.segments()[s].a);
    sources.push_back(graph.segments()[s].b);
  }
  std::sort(sources.begin(), sources.end());
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
  return graph.dijkstra(sources, free);
}

void claim(const FloorGraph& graph, Growth& g, int z, WsId ws, const DijkstraResult& reach) {
  const Path p = graph.extract_path(reach, graph.anchor(ws));
  Zone& zone = g.zones[z];
  for (SegIdx s : p.segments) {
    g.owner[s] = z;
    zone.segments.push_back(s);
  }
  std::sort(zone.segments.begin(), zone.segments.end());
  zone.workstations.insert(std::upper_bound(zone.workstations.begin(), zone.workstations.end(), ws), ws);
  g.ws_zone[graph.ws_index(ws)] = z;
}

// Nearest workstation satisfying `eligible` reachable from zone z.
std::optional<WsId> nearest(const FloorGraph& graph, const DijkstraResult& reach,
                            const std::function<bool(std::size_t)>& eligible) {
  std::optional<WsId> best;
  double best_d = kInf;
  for (std::size_t i = 0; i < graph.workstation_count(); ++i) {
    if (!eligible(i)) continue;
    const WsId w = graph.workstations()[i].id;
    const double d = reach.dist[graph.anchor(w)];
    if (d < best_d || (d == best_d && best && w < *best)) {
      best = w;
      best_d = d;
    }
  }
  return best_d < kInf ? best : std::nullopt;
}

ZonePartition finish(const FloorGraph& graph, Growth& g) {
  ZonePartition p;
  p.zones = std::move(g.zones);
  for (auto& z : p.zones) prune_dangling(graph, z);
  const std::vector<double> zero(p.zones.size(), 0.0);
  return assign_transfer_stations(graph, p, zero);
}

std::optional<ZonePartition> grow_from_seeds(const FloorGraph& graph, const std::vector<WsId>& seeds) {
  Growth g = start_growth(graph, seeds);
  const int nz = static_cast<int>(seeds.size());
  std::size_t claimed = seeds.size();
  while (claimed < graph.workstation_count()) {
    std::vector<int> order(nz);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return g.zones[a].workstations.size() < g.zones[b].workstations.size();
    });
    bool grew = false;
    for (int z : order) {
      const auto reach = reach_from_zone(graph, g, z);
      const auto ws = nearest(graph, reach, [&](std::size_t i) { return g.ws_zone[i] < 0; });
      if (!ws) continue;
      claim(graph, g, z, *ws, reach);
      ++claimed;
      grew = true;
      break;
    }
    if (!grew) return std::nullopt;
  }
  ZonePartition p = finish(graph, g);
  if (!validate_partition(graph, p).empty()) return std::nullopt;
  return p;
}

double evaluate(const FloorGraph& graph, const FlowSource& flows, const LoadParams& params,
                const ZonePartition& p) {
  const auto loads = zone_loads(graph, p, flows(p), params);
  return load_stddev(loads);
}

// Linked zone pairs, ascending.
std::vector<std::pair<int, int>> linked_pairs(const ZonePartition& p) {
  std::set<std::pair<int, int>> s;
  for (const auto& l : p.links) s.insert(std::minmax(l.station_zone, l.path_zone));
  return {s.begin(), s.end()};
}

}  // namespace

void PartHistoryWindow::prune(double now) {
  std::erase_if(records_, [&](const DeliveryRecord& r) { return r.time < now - length_; });
}

std::vector<FlowMatrix> flow_from_history(const FloorGraph& graph,
                                          std::span<const DeliveryRecord> records,
                                          const ZonePartition& partition) {
  const std::size_t n = graph.workstation_count();
  std::vector<FlowMatrix> out(partition.zones.size(), FlowMatrix(n));
  std::map<std::pair<int, int>, int> trips;
  for (const auto& r : records) {
    if (r.from == r.to) continue;
    ++trips[{to_int(r.from), to_int(r.to)}];
  }
  for (const auto& [key, count] : trips) {
    const WsId from{key.first};
    const WsId to{key.second};
    std::vector<Leg> legs;
    try {
      legs = plan_route(graph, partition, from, to);
    } catch (const Error&) {
      const int z = partition.zone_of(from);
      if (z < 0) continue;
      legs = {{z, to}};
    }
    WsId at = from;
    for (const Leg& leg : legs) {
      out[leg.zone].at(graph.ws_index(at), graph.ws_index(leg.dropoff)) += count;
      at = leg.dropoff;
    }
  }
  return out;
}

FlowSource history_flow_source(const FloorGraph& graph, std::vector<DeliveryRecord> records) {
  return [&graph, records = std::move(records)](const ZonePartition& p) {
    return flow_from_history(graph, records, p);
  };
}

std::vector<double> zone_loads(const FloorGraph& graph, const ZonePartition& partition,
                               const std::vector<FlowMatrix>& flows, const LoadParams& params) {
  if (flows.size() != partition.zones.size()) {
    fail(ErrorCode::kDimensionMismatch, "one flow matrix per zone is required");
  }
  std::vector<double> out;
  for (int z = 0; z < partition.zone_count(); ++z) {
    out.push_back(zone_load(graph, partition, z, flows[z], params.velocity, params.handling).load);
  }
  return out;
}

double load_stddev(std::span<const double> loads) {
  if (loads.empty()) return 0.0;
  const double mean = std::accumulate(loads.begin(), loads.end(), 0.0) / static_cast<double>(loads.size());
  double ss = 0.0;
  for (double l : loads) ss += (l - mean) * (l - mean);
  return std::sqrt(ss / static_cast<double>(loads.size()));
}

ZonePartition initial_partition(const FloorGraph& graph, int nz) {
  check_zone_count(graph, nz);
  const auto all = sorted_workstations(graph);
  auto p = grow_from_seeds(graph, spread_seeds(graph, nz, all.front()));
  if (!p) {
    fail(ErrorCode::kInfeasibleStart, "greedy growth cannot build " + std::to_string(nz) +
                                          " linked connected zones on this layout");
  }
  return *p;
}

std::vector<int> assignment_of(const FloorGraph& graph, const ZonePartition& partition) {
  std::vector<int> out(graph.workstation_count(), -1);
  for (const auto& z : partition.zones) {
    for (WsId w : z.workstations) out[graph.ws_index(w)] = z.id;
  }
  return out;
}

std::optional<ZonePartition> partition_from_assignment(const FloorGraph& graph,
                                                       std::vector<int>& assignment, int nz) {
  const std::size_t n = graph.workstation_count();
  if (nz < 1 || static_cast<std::size_t>(nz) > n) return std::nullopt;
  assignment.resize(n, 0);
  for (int& a : assignment) {
    if (a < 0 || a >= nz) a = 0;
  }
  // Every zone needs a member: empty zones take the highest-index member of
  // the currently largest zone.
  for (int z = 0; z < nz; ++z) {
    if (std::find(assignment.begin(), assignment.end(), z) != assignment.end()) continue;
    std::vector<int> size(nz, 0);
    for (int a : assignment) ++size[a];
    const int big = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());
    for (std::size_t i = n; i-- > 0;) {
      if (assignment[i] == big) {
        assignment[i] = z;
        break;
      }
    }
  }

  std::vector<WsId> seeds(nz);
  std::vector<bool> has_seed(nz, false);
  for (WsId w : sorted_workstations(graph)) {
    const int z = assignment[graph.ws_index(w)];
    if (!has_seed[z]) {
      seeds[z] = w;
      has_seed[z] = true;
    }
  }
  Growth g = start_growth(graph, seeds);
  std::size_t claimed = seeds.size();

  // Interleaved growth: each zone in turn claims its nearest reachable member.
  bool progress = true;
  while (progress && claimed < n) {
    progress = false;
    for (int z = 0; z < nz; ++z) {
      const auto reach = reach_from_zone(graph, g, z);
      const auto ws = nearest(graph, reach, [&](std::size_t i) { return g.ws_zone[i] < 0 && assignment[i] == z; });
      if (!ws) continue;
      claim(graph, g, z, *ws, reach);
      ++claimed;
      progress = true;
    }
  }
  // Leftovers go to whichever zone reaches them first.
  while (claimed < n) {
    int best_zone = -1;
    WsId best_ws{};
    double best_d = kInf;
    DijkstraResult best_reach;
    for (int z = 0; z < nz; ++z) {
      auto reach = reach_from_zone(graph, g, z);
      const auto ws = nearest(graph, reach, [&](std::size_t i) { return g.ws_zone[i] < 0; });
      if (!ws) continue;
      const double d = reach.dist[graph.anchor(*ws)];
      if (d < best_d) {
        best_zone = z;
        best_ws = *ws;
        best_d = d;
        best_reach = std::move(reach);
      }
    }
    if (best_zone < 0) return std::nullopt;
    claim(graph, g, best_zone, best_ws, best_reach);
    ++claimed;
  }
  for (std::size_t i = 0; i < n; ++i) assignment[i] = g.ws_zone[i];
  ZonePartition p = finish(graph, g);
  if (!validate_partition(graph, p).empty()) return std::nullopt;
  return p;
}

OptimizeResult sa_optimize(const FloorGraph& graph, const FlowSource& flows, const LoadParams& params,
                           int nz, const SaConfig& config, std::uint64_t seed,
                           const ZonePartition* start) {
  check_zone_count(graph, nz);
  if (config.moves_per_temperature < 1) fail(ErrorCode::kInvalidArgument, "SA needs at least one move per temperature");
  OptimizeResult out;
  out.partition = start ? *start : initial_partition(graph, nz);
  if (out.partition.zone_count() != nz) fail(ErrorCode::kInvalidArgument, "SA start partition has the wrong zone count");
  std::vector<double> loads = zone_loads(graph, out.partition, flows(out.partition), params);
  double current_obj = load_stddev(loads);
  out.objective = current_obj;
  if (nz == 1) return out;

  const int reductions = config.schedule.reductions > 0 ? config.schedule.reductions : 40;
  const int steps = reductions * config.moves_per_temperature;
  Rng rng(seed);
  ZonePartition current = out.partition;
  for (int step = 0; step < steps; ++step) {
    ++out.proposals;
    const double n = static_cast<double>(step / config.moves_per_temperature);
    const auto pairs = linked_pairs(current);
    if (pairs.empty()) break;
    const auto [za, zb] = pairs[rng.index(pairs.size())];
    const bool a_gives = rng.uniform() < 0.5;
    const int giver = a_gives ? za : zb;
    const int receiver = a_gives ? zb : za;
    const auto tips = tip_workstations(graph, current.zones[giver]);
    std::optional<ZonePartition> candidate;
    std::vector<double> candidate_loads;
    if (!tips.empty() && current.zones[giver].workstations.size() > 1) {
      const WsId ws = tips[rng.index(tips.size())];
      try {
        ZonePartition moved = transfer_tip(graph, current, giver, receiver, ws);
        moved = assign_transfer_stations(graph, moved, loads);
        if (validate_partition(graph, moved).empty()) {
          candidate_loads = zone_loads(graph, moved, flows(moved), params);
          candidate = std::move(moved);
        }
      } catch (const Error&) {
      }
    }
    const double r = rng.uniform_open_closed();
    if (candidate) {
      const double obj = load_stddev(candidate_loads);
      const double tc = temperature(config.schedule, n, reductions);
      const double p = acceptance_probability(current_obj - obj, config.schedule.k, tc,
                                              config.schedule.greedy_limit);
      if (obj <= current_obj || r <= p) {
        if (obj > current_obj) ++out.accepted_worse;
        current = std::move(*candidate);
        loads = std::move(candidate_loads);
        current_obj = obj;
        if (current_obj < out.objective) {
          out.objective = current_obj;
          out.partition = current;
        }
      }
    }
    out.progress.push_back({step, current_obj, out.objective});
  }
  return out;
}

OptimizeResult ga_optimize(const FloorGraph& graph, const FlowSource& flows, const LoadParams& params,
                           int nz, const GaConfig& config,
                           std::span<const std::vector<int>> initial_population) {
  check_zone_count(graph, nz);
  if (config.population < 2) fail(ErrorCode::kInvalidArgument, "GA population must be at least 2");
  if (config.crossover_rate < 0 || config.crossover_rate > 1 || config.mutation_rate < 0 ||
      config.mutation_rate > 1) {
    fail(ErrorCode::kInvalidArgument, "GA rates must lie in [0, 1]");
  }
  const std::size_t n = graph.workstation_count();
  Rng rng(config.seed);

  std::map<std::vector<int>, std::pair<double, std::optional<ZonePartition>>> cache;
  struct Individual {
    std::vector<int> genome;
    double fitness = kPenalty;
  };
  auto assess = [&](std::vector<int> genome) {
    genome.resize(n, 0);
    const std::vector<int> raw = genome;
    auto hit = cache.find(raw);
    if (hit == cache.end()) {
      std::optional<ZonePartition> p = partition_from_assignment(graph, genome, nz);
      double fit = kPenalty;
      if (p) {
        try {
          fit = -evaluate(graph, flows, params, *p);
        } catch (const Error&) {
          p.reset();
        }
      }
      hit = cache.emplace(raw, std::make_pair(fit, std::move(p))).first;
    }
    Individual ind;
    ind.fitness = hit->second.first;
    ind.genome = hit->second.second ? assignment_of(graph, *hit->second.second) : raw;
    if (hit->second.second && !cache.count(ind.genome)) cache.emplace(ind.genome, hit->second);
    return ind;
  };

  std::vector<Individual> pop;
  for (const auto& g : initial_population) {
    if (static_cast<int>(pop.size()) >= config.population) break;
    pop.push_back(assess(g));
  }
  const auto all = sorted_workstations(graph);
  if (static_cast<int>(pop.size()) < config.population) {
    if (auto p = grow_from_seeds(graph, spread_seeds(graph, nz, all.front()))) {
      pop.push_back(assess(assignment_of(graph, *p)));
    }
  }
  int attempts = 0;
  while (static_cast<int>(pop.size()) < config.population) {
    std::vector<int> genome(n);
    if (++attempts <= config.population * 4) {
      std::vector<WsId> seeds;
      std::vector<WsId> pool = all;
      for (int z = 0; z < nz; ++z) {
        const std::size_t k = rng.index(pool.size());
        seeds.push_back(pool[k]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
      }
      if (auto p = grow_from_seeds(graph, seeds)) {
        pop.push_back(assess(assignment_of(graph, *p)));
        continue;
      }
    }
    for (auto& gene : genome) gene = static_cast<int>(rng.index(static_cast<std::size_t>(nz)));
    pop.push_back(assess(genome));
  }

  auto better = [](const Individual& a, const Individual& b) { return a.fitness > b.fitness; };
  OptimizeResult out;
  Individual best = *std::max_element(pop.begin(), pop.end(),
                                      [](const Individual& a, const Individual& b) { return a.fitness < b.fitness; });
  for (const auto& ind : pop) {
    if (ind.fitness > best.fitness) best = ind;
  }
  auto record = [&](int gen) {
    double gen_best = kPenalty;
    for (const auto& ind : pop) gen_best = std::max(gen_best, ind.fitness);
    out.progress.push_back({gen, -gen_best, -best.fitness});
  };
  record(0);

  auto tournament = [&]() -> const Individual& {
    std::size_t pick = rng.index(pop.size());
    for (int t = 1; t < config.tournament; ++t) {
      const std::size_t c = rng.index(pop.size());
      if (pop[c].fitness > pop[pick].fitness || (pop[c].fitness == pop[pick].fitness && c < pick)) pick = c;
    }
    return pop[pick];
  };

  for (int gen = 1; gen <= config.generations; ++gen) {
    std::vector<Individual> ranked = pop;
    std::stable_sort(ranked.begin(), ranked.end(), better);
    std::vector<Individual> next(ranked.begin(),
                                 ranked.begin() + std::min<std::ptrdiff_t>(config.elitism, ranked.size()));
    while (static_cast<int>(next.size()) < config.population) {
      std::vector<int> child = tournament().genome;
      const std::vector<int>& other = tournament().genome;
      if (n > 1 && rng.uniform() < config.crossover_rate) {
        const std::size_t cut = 1 + rng.index(n - 1);
        std::copy(other.begin() + static_cast<std::ptrdiff_t>(cut), other.end(),
                  child.begin() + static_cast<std::ptrdiff_t>(cut));
      }
      for (auto& gene : child) {
        if (rng.uniform() < config.mutation_rate) gene = static_cast<int>(rng.index(static_cast<std::size_t>(nz)));
      }
      ++out.proposals;
      next.push_back(assess(child));
    }
    pop = std::move(next);
    for (const auto& ind : pop) {
      if (ind.fitness > best.fitness) best = ind;
    }
    record(gen);
  }

  const auto& entry = cache.at(best.genome);
  if (!entry.second) fail(ErrorCode::kInfeasibleStart, "GA found no valid zone design");
  out.partition = *entry.second;
  out.objective = -entry.first;
  return out;
}

DeliveryPlan load_share_dispatch(const FloorGraph& graph, const PartTask& task,
                                 const ZonePartition& partition, DispatchMode mode) {
  DeliveryPlan plan;
  if (task.pickup == task.target) return plan;
  if (mode == DispatchMode::kBalanced) {
    plan.legs = plan_route(graph, partition, task.pickup, task.target);
    return plan;
  }
  int holder = partition.zone_of(task.pickup);
  try {
    holder = plan_leg(graph, partition, task.pickup, task.target).zone;
  } catch (const Error&) {
  }
  if (holder < 0) fail(ErrorCode::kOrphanPart, "part " + std::to_string(task.part) + " sits in no zone");
  plan.legs.push_back({holder, task.target});
  return plan;
}

}  // namespace zonesim

#include "zonesim/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <tuple>

#include "zonesim/error.hpp"
#include "zonesim/rng.hpp"

namespace zonesim {

const char* method_name(Method m) {
  switch (m) {
    case Method::kSa: return "sa";
    case Method::kGa: return "ga";
    case Method::kDdz: return "ddz";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "sa") return Method::kSa;
  if (name == "ga") return Method::kGa;
  if (name == "ddz") return Method::kDdz;
  fail(ErrorCode::kInvalidArgument, "unknown method '" + name + "' (expected sa, ga or ddz)");
}

int Scenario::part_count() const {
  int n = 0;
  for (const auto& t : part_types) n += t.quantity;
  return n;
}

void validate_config(const SimConfig& c) {
  auto bad = [](const std::string& what) { fail(ErrorCode::kInvalidArgument, "config: " + what); };
  if (!(c.velocity > 0.0)) fail(ErrorCode::kZeroVelocity, "config: velocity must be positive");
  if (c.robots < 1) bad("robots must be at least 1");
  if (c.handling.load < 0 || c.handling.unload < 0) bad("handling times must be non-negative");
  if (!(c.ddz.load_tolerance > 0) || !(c.ddz.imbalance_time > 0) || !(c.ddz.consensus_period > 0)) {
    bad("load_tolerance, imbalance_time and consensus_period must be positive");
  }
  if (!(c.ddz.comm_range > 0)) bad("comm_range must be positive");
  if (c.ddz.iterations < 1) bad("iterations must be at least 1");
  const auto& s = c.ddz_schedule;
  if (!(s.initial_temperature > s.freezing_temperature) || !(s.freezing_temperature > 0) || !(s.k > 0)) {
    bad("annealing schedule needs T_i > T_f > 0 and k > 0");
  }
  if (!(c.consensus.tolerance > 0) || c.consensus.max_steps < 1) bad("consensus tolerance and max_steps must be positive");
  if (!(c.consensus_step_minutes > 0)) bad("consensus_step_minutes must be positive");
  if (c.consensus.max_steps * c.consensus_step_minutes > c.ddz.consensus_period) {
    bad("a consensus round (max_steps * consensus_step_minutes) must fit inside consensus_period");
  }
  if (c.ddz_iteration_minutes < 0 || c.repair_minutes < 0) bad("repair durations must be non-negative");
  if (!(c.window_minutes > 0)) bad("window_minutes must be positive");
  if (!(c.time_cap_minutes > 0)) bad("time_cap_minutes must be positive");
  if (c.weights.age < 0 || c.weights.distance < 0) bad("scheduler weights must be non-negative");
}

std::vector<double> processing_times(const FloorGraph& graph, const Scenario& scenario) {
  std::vector<double> out;
  for (const auto& w : graph.workstations()) {
    auto it = scenario.processing_minutes.find(to_int(w.id));
    out.push_back(it != scenario.processing_minutes.end() ? it->second : w.processing_time);
  }
  return out;
}

std::vector<DeliveryRecord> training_history(const Scenario& scenario) {
  std::vector<DeliveryRecord> out;
  int part = 0;
  for (const auto& t : scenario.training) {
    for (int q = 0; q < t.quantity; ++q, ++part) {
      for (std::size_t i = 1; i < t.route.size(); ++i) {
        if (t.route[i - 1] != t.route[i]) out.push_back({part, t.route[i - 1], t.route[i], 0.0});
      }
    }
  }
  return out;
}

ZonePartition train_initial_partition(const FloorGraph& graph, const Scenario& scenario,
                                      const SimConfig& config) {
  if (config.method == Method::kDdz) return initial_partition(graph, config.robots);
  auto history = training_history(scenario);
  if (history.empty()) return initial_partition(graph, config.robots);
  const LoadParams params{config.velocity, config.handling};
  const FlowSource flows = history_flow_source(graph, std::move(history));
  if (config.method == Method::kSa) {
    return sa_optimize(graph, flows, params, config.robots, SaConfig{}, config.seed).partition;
  }
  GaConfig ga;
  ga.seed = config.seed;
  return ga_optimize(graph, flows, params, config.robots, ga).partition;
}

void EventLog::append(double time, const std::string& kind, nlohmann::ordered_json payload) {
  if (time < last_time_) fail(ErrorCode::kInvalidArgument, "event log must be appended in time order");
  last_time_ = time;
  nlohmann::ordered_json e;
  e["t"] = time;
  e["seq"] = seq_++;
  e["kind"] = kind;
  for (auto it = payload.begin(); it != payload.end(); ++it) e[it.key()] = it.value();
  lines_.push_back(e.dump());
}

std::string EventLog::text() const {
  std::string out;
  for (const auto& l : lines_) {
    out += l;
    out += '\n';
  }
  return out;
}

namespace {

nlohmann::ordered_json zones_json(const ZonePartition& p) {
  auto zones = nlohmann::ordered_json::array();
  for (const auto& z : p.zones) {
    auto ws = nlohmann::ordered_json::array();
    for (WsId w : z.workstations) ws.push_back(to_int(w));
    zones.push_back(ws);
  }
  return zones;
}

nlohmann::ordered_json links_json(const ZonePartition& p) {
  auto links = nlohmann::ordered_json::array();
  for (const auto& l : p.links) links.push_back({to_int(l.station), l.station_zone, l.path_zone});
  return links;
}

}  // namespace

RepairOutcome apply_zone_repair(const FloorGraph& graph, FleetState& state, const ZonePartition& next,
                                EventLog& log, double now) {
  RepairOutcome out;
  out.violations = validate_partition(graph, next, static_cast<int>(state.queues.size()));
  if (!out.violations.empty()) {
    auto v = nlohmann::ordered_json::array();
    for (const auto& x : out.violations) v.push_back(x.kind + ": " + x.message);
    log.append(now, "repair-rejected", {{"violations", v}});
    return out;
  }
  auto requeued = requeue_after_repair(graph, state.queues, state.partition, next);
  state.queues = std::move(requeued.queues);
  state.partition = next;
  out.applied = true;
  out.moved = requeued.moved;
  log.append(now, "zone-repair-applied", {{"moved", out.moved}, {"zones", zones_json(next)}, {"links", links_json(next)}});
  return out;
}

BalanceTimeline balance_monitor(std::span<const MonitorSample> samples, const DdzConfig& config,
                                double end_time) {
  BalanceTimeline out;
  std::vector<std::vector<LoadSample>> history;
  auto push = [&](double start, double end, bool balanced) {
    if (end <= start) return;
    if (!out.intervals.empty() && out.intervals.back().balanced == balanced && out.intervals.back().end == start) {
      out.intervals.back().end = end;
    } else {
      out.intervals.push_back({start, end, balanced});
    }
  };
  double cursor = 0.0;
  bool state = true;
  for (const auto& s : samples) {
    push(cursor, std::min(s.time, end_time), state);
    cursor = std::min(s.time, end_time);
    state = true;
    if (history.size() < s.loads.size()) history.resize(s.loads.size());
    for (std::size_t r = 0; r < s.loads.size(); ++r) {
      const double ref = r < s.reference.size() ? s.reference[r] : 0.0;
      if (std::fabs(s.loads[r] - ref) > config.load_tolerance) state = false;
      history[r].push_back({s.time, s.loads[r], ref});
      if (!out.repair_time && detect_imbalance(history[r], config, s.time)) out.repair_time = s.time;
    }
  }
  push(cursor, end_time, state);
  double balanced = 0.0;
  for (const auto& iv : out.intervals) {
    if (iv.balanced) balanced += iv.end - iv.start;
  }
  out.percent_balanced = end_time > 0.0 ? 100.0 * balanced / end_time : 0.0;
  return out;
}

namespace {

enum class EvKind {
  kRelease,
  kProcessingDone,
  kRobotArrive,
  kHandlingDone,
  kRepairApply,
  kConsensusTick,
  kConsensusDone,
  kMonitorTick,
};

bool periodic(EvKind k) {
  return k == EvKind::kConsensusTick || k == EvKind::kConsensusDone || k == EvKind::kMonitorTick;
}

struct Event {
  double time = 0.0;
  long seq = 0;
  EvKind kind{};
  int subject = 0;
};

struct Later {
  bool operator()(const Event& x, const Event& y) const {
    return std::tie(x.time, x.seq) > std::tie(y.time, y.seq);
  }
};

enum class PartState { kQueuedAtStation, kProcessing, kWaitingPickup, kInTransit, kAtTransfer, kDone };

struct Part {
  int id = 0;
  std::string type;
  std::vector<WsId> route;
  std::size_t cursor = 0;  // route index of the last workstation reached
  PartState state = PartState::kQueuedAtStation;
  double age_start = 0.0;
};

enum class Phase { kIdle, kToPickup, kLoading, kToDropoff, kUnloading };

struct Robot {
  PointIdx at = 0;
  Phase phase = Phase::kIdle;
  Path path;
  double depart = 0.0;
  double odometer = 0.0;
  bool paused = false;
};

struct Station {
  std::deque<int> queue;
  int current = -1;
};

std::vector<double> queue_loads(const FloorGraph& graph, const ZonePartition& p,
                                const std::vector<RobotQueue>& queues, const LoadParams& params) {
  std::vector<FlowMatrix> flows(p.zones.size(), FlowMatrix(graph.workstation_count()));
  for (std::size_t r = 0; r < queues.size(); ++r) {
    auto add = [&](const PartTask& t) { flows[r].at(graph.ws_index(t.pickup), graph.ws_index(t.dropoff)) += 1.0; };
    for (const auto& t : queues[r].pending) add(t);
    if (queues[r].selected) add(*queues[r].selected);
  }
  return zone_loads(graph, p, flows, params);
}

class Simulation {
 public:
  Simulation(const FloorGraph& graph, const Scenario& scenario, const SimConfig& config,
             const ZonePartition& initial)
      : graph_(graph), scenario_(scenario), config_(config), params_{config.velocity, config.handling},
        proc_(processing_times(graph, scenario)), stations_(graph.workstation_count()),
        seeds_(config.seed ^ 0x5eed5eedULL), window_(config.window_minutes) {
    fleet_.partition = initial;
    fleet_.queues.assign(static_cast<std::size_t>(config.robots), RobotQueue{{}, std::nullopt, config.weights});
  }

  SimResult run();

 private:
  void schedule(double time, EvKind kind, int subject = 0) {
    if (!periodic(kind)) ++pending_work_;
    events_.push({time, seq_++, kind, subject});
  }

  Vec2 position(int r, double t) const {
    const Robot& robot = robots_[r];
    if (robot.phase == Phase::kToPickup || robot.phase == Phase::kToDropoff) {
      const double travelled = std::min(config_.velocity * (t - robot.depart), robot.path.distance);
      return graph_.position_along(robot.path.points, std::max(travelled, 0.0));
    }
    return graph_.points()[robot.at].pos;
  }

  std::vector<Vec2> positions(double t) const {
    std::vector<Vec2> out;
    for (int r = 0; r < config_.robots; ++r) out.push_back(position(r, t));
    return out;
  }

  void handle(const Event& e);
  void station_enqueue(std::size_t ws, int part);
  void station_start(std::size_t ws);
  void processing_done(std::size_t ws);
  void make_task(int part, WsId at);
  void reach_workstation(int part, WsId ws);
  void dispatch(int r);
  void robot_arrive(int r);
  void handling_done(int r);
  void consensus_tick();
  void consensus_done();
  void monitor_tick();
  void start_ddz(int leader, std::vector<int> participants);
  void maybe_run_ddz();
  void repair_apply();
  void record_balance(const std::vector<double>& loads, const std::vector<double>& reference);
  void reset_detectors() {
    for (auto& h : history_) h.clear();
  }

  const FloorGraph& graph_;
  const Scenario& scenario_;
  const SimConfig& config_;
  const LoadParams params_;
  std::vector<double> proc_;

  double now_ = 0.0;
  long seq_ = 0;
  long pending_work_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
  EventLog log_;

  FleetState fleet_;
  std::vector<Robot> robots_;
  std::vector<Part> parts_;
  std::vector<Station> stations_;
  int completed_ = 0;

  Rng seeds_;
  PartHistoryWindow window_;
  std::vector<std::vector<LoadSample>> history_;
  std::optional<bool> balanced_;
  bool load_share_ = false;

  // Consensus round in progress.
  std::vector<double> round_loads_;
  ConsensusResult round_;
  std::vector<double> consensus_;

  // Zone repair in progress.
  bool repair_pending_ = false;
  bool ddz_active_ = false;
  bool ddz_running_ = false;
  int ddz_leader_ = -1;
  int ddz_session_ = 0;
  std::vector<int> ddz_participants_;
  ZonePartition pending_design_;

  std::vector<std::string> protocol_trace_;
  std::vector<ConsensusTraceRow> consensus_trace_;
  std::vector<ZonePartition> adopted_;
};

void Simulation::station_enqueue(std::size_t ws, int part) {
  stations_[ws].queue.push_back(part);
  parts_[part].state = PartState::kQueuedAtStation;
  if (stations_[ws].current < 0) station_start(ws);
}

void Simulation::station_start(std::size_t ws) {
  Station& st = stations_[ws];
  if (st.current >= 0 || st.queue.empty()) return;
  st.current = st.queue.front();
  st.queue.pop_front();
  parts_[st.current].state = PartState::kProcessing;
  schedule(now_ + proc_[ws], EvKind::kProcessingDone, static_cast<int>(ws));
}

void Simulation::processing_done(std::size_t ws) {
  Station& st = stations_[ws];
  const int id = st.current;
  st.current = -1;
  Part& part = parts_[id];
  log_.append(now_, "processing-done", {{"part", id}, {"ws", to_int(part.route[part.cursor])}});
  if (part.cursor + 1 == part.route.size()) {
    part.state = PartState::kDone;
    ++completed_;
    log_.append(now_, "part-complete", {{"part", id}, {"type", part.type}});
  } else {
    part.age_start = now_;
    const WsId here = part.route[part.cursor];
    if (part.route[part.cursor + 1] == here) {
      ++part.cursor;
      log_.append(now_, "arrival", {{"part", id}, {"type", part.type}, {"ws", to_int(here)}});
      station_enqueue(ws, id);
    } else {
      make_task(id, here);
    }
  }
  station_start(ws);
}

void Simulation::make_task(int id, WsId at) {
  Part& part = parts_[id];
  const WsId target = part.route[part.cursor + 1];
  PartTask task{id, part.type, at, target, target, part.age_start};
  Leg leg;
  const bool direct = load_share_ && config_.method != Method::kDdz;
  if (direct) {
    leg = load_share_dispatch(graph_, task, fleet_.partition, DispatchMode::kImbalanced).legs.front();
  } else {
    leg = plan_leg(graph_, fleet_.partition, at, target);
  }
  task.dropoff = leg.dropoff;
  fleet_.queues[leg.zone].pending.push_back(task);
  part.state = at == part.route[part.cursor] ? PartState::kWaitingPickup : PartState::kAtTransfer;
  log_.append(now_, "task", {{"part", id}, {"robot", leg.zone}, {"pickup", to_int(at)},
                             {"dropoff", to_int(task.dropoff)}, {"target", to_int(target)}, {"direct", direct}});
}

void Simulation::reach_workstation(int id, WsId ws) {
  Part& part = parts_[id];
  if (ws == part.route[part.cursor + 1]) {
    window_.add({id, part.route[part.cursor], ws, now_});
    ++part.cursor;
    log_.append(now_, "arrival", {{"part", id}, {"type", part.type}, {"ws", to_int(ws)}});
    station_enqueue(graph_.ws_index(ws), id);
  } else {
    make_task(id, ws);
  }
}

void Simulation::dispatch(int r) {
  Robot& robot = robots_[r];
  RobotQueue& q = fleet_.queues[r];
  if (robot.phase != Phase::kIdle || robot.paused || q.selected || q.pending.empty()) return;
  const Ranking ranking = score_and_rank(graph_, q, robot.at, config_.velocity, now_);
  const PartTask task = *ranking.next;
  q.pending.erase(std::find_if(q.pending.begin(), q.pending.end(),
                               [&](const PartTask& t) { return t.part == task.part; }));
  q.selected = task;
  robot.path = graph_.path_between(robot.at, graph_.anchor(task.pickup));
  robot.phase = Phase::kToPickup;
  robot.depart = now_;
  schedule(now_ + robot.path.distance / config_.velocity, EvKind::kRobotArrive, r);
}

void Simulation::robot_arrive(int r) {
  Robot& robot = robots_[r];
  const PartTask& task = *fleet_.queues[r].selected;
  robot.at = robot.path.points.back();
  robot.odometer += robot.path.distance;
  if (robot.phase == Phase::kToPickup) {
    log_.append(now_, "pickup", {{"robot", r}, {"part", task.part}, {"ws", to_int(task.pickup)},
                                 {"dist", robot.path.distance}});
    parts_[task.part].state = PartState::kInTransit;
    robot.phase = Phase::kLoading;
    schedule(now_ + config_.handling.load, EvKind::kHandlingDone, r);
  } else {
    robot.phase = Phase::kUnloading;
    schedule(now_ + config_.handling.unload, EvKind::kHandlingDone, r);
  }
}

void Simulation::handling_done(int r) {
  Robot& robot = robots_[r];
  RobotQueue& q = fleet_.queues[r];
  const PartTask task = *q.selected;
  if (robot.phase == Phase::kLoading) {
    robot.path = graph_.path_between(robot.at, graph_.anchor(task.dropoff));
    robot.phase = Phase::kToDropoff;
    robot.depart = now_;
    schedule(now_ + robot.path.distance / config_.velocity, EvKind::kRobotArrive, r);
    return;
  }
  log_.append(now_, "dropoff", {{"robot", r}, {"part", task.part}, {"ws", to_int(task.dropoff)},
                                {"dist", robot.path.distance}});
  robot.phase = Phase::kIdle;
  q.selected.reset();
  reach_workstation(task.part, task.dropoff);
}

void Simulation::record_balance(const std::vector<double>& loads, const std::vector<double>& reference) {
  bool balanced = true;
  for (std::size_t r = 0; r < loads.size(); ++r) {
    if (std::fabs(loads[r] - reference[r]) > config_.ddz.load_tolerance) balanced = false;
    auto& h = history_[r];
    h.push_back({now_, loads[r], reference[r]});
    if (h.size() > 512) h.erase(h.begin(), h.begin() + 256);
  }
  if (!balanced_ || *balanced_ != balanced) {
    balanced_ = balanced;
    log_.append(now_, "balance", {{"balanced", balanced}, {"loads", loads}, {"reference", reference}});
  }
}

void Simulation::consensus_tick() {
  schedule(now_ + config_.ddz.consensus_period, EvKind::kConsensusTick);
  round_loads_ = queue_loads(graph_, fleet_.partition, fleet_.queues, params_);
  const double start = now_;
  const double dt = config_.consensus_step_minutes;
  PositionTrace trace = [&](int step) { return positions(start + dt * step); };
  std::vector<ConsensusTraceRow> rows;
  round_ = run_consensus(round_loads_, trace, config_.ddz.comm_range, config_.consensus,
                         config_.record_consensus_trace ? &rows : nullptr);
  consensus_trace_.insert(consensus_trace_.end(), rows.begin(), rows.end());
  schedule(now_ + dt * round_.steps, EvKind::kConsensusDone);
}

void Simulation::consensus_done() {
  consensus_ = round_.values;
  log_.append(now_, "consensus-round", {{"steps", round_.steps}, {"converged", round_.converged},
                                        {"loads", round_loads_}, {"values", consensus_}});
  record_balance(round_loads_, consensus_);
  if (ddz_active_) return;
  for (int r = 0; r < config_.robots; ++r) {
    if (!detect_imbalance(history_[r], config_.ddz, now_)) continue;
    const auto pos = positions(now_);
    const CommGraph comm = CommGraph::from_positions(pos, config_.ddz.comm_range);
    auto participants = propagate_start(r, comm);
    const bool isolated = participants.size() < 2;
    log_.append(now_, "imbalance-signal", {{"robot", r}, {"isolated", isolated}});
    if (isolated) continue;
    start_ddz(r, std::move(participants));
    return;
  }
}

void Simulation::start_ddz(int leader, std::vector<int> participants) {
  ddz_active_ = true;
  ddz_running_ = false;
  ddz_leader_ = leader;
  ddz_participants_ = std::move(participants);
  auto inflight = nlohmann::ordered_json::array();
  for (int r : ddz_participants_) {
    robots_[r].paused = true;
    if (fleet_.queues[r].selected) inflight.push_back(fleet_.queues[r].selected->part);
  }
  log_.append(now_, "ddz-start", {{"leader", leader}, {"participants", ddz_participants_}, {"inflight", inflight}});
}

void Simulation::maybe_run_ddz() {
  if (!ddz_active_ || ddz_running_) return;
  for (int r : ddz_participants_) {
    if (fleet_.queues[r].selected || robots_[r].phase != Phase::kIdle) return;
  }
  ddz_running_ = true;
  const auto pos = positions(now_);
  const CommGraph comm = CommGraph::from_positions(pos, config_.ddz.comm_range);
  DdzWorld world;
  world.graph = &graph_;
  world.partition = fleet_.partition;
  world.neighbors.resize(static_cast<std::size_t>(config_.robots));
  for (int r : ddz_participants_) {
    for (int j : comm.neighbors[r]) {
      if (std::binary_search(ddz_participants_.begin(), ddz_participants_.end(), j)) world.neighbors[r].push_back(j);
    }
  }
  world.consensus = consensus_.empty() ? std::vector<double>(static_cast<std::size_t>(config_.robots), 0.0) : consensus_;
  const std::vector<RobotQueue> snapshot = fleet_.queues;
  const ZonePartition base = fleet_.partition;
  const FloorGraph& graph = graph_;
  const LoadParams params = params_;
  world.evaluate_loads = [&graph, snapshot, base, params](const ZonePartition& p) {
    const auto requeued = requeue_after_repair(graph, snapshot, base, p);
    return queue_loads(graph, p, requeued.queues, params);
  };
  const DdzResult result = ddz_optimize(ddz_leader_, ddz_participants_, world, config_.ddz,
                                        config_.ddz_schedule, seeds_.next_u64());
  for (const auto& t : result.trace) {
    nlohmann::json line = t;
    line["session"] = ddz_session_;
    line["t"] = now_;
    protocol_trace_.push_back(line.dump());
  }
  ++ddz_session_;
  for (const auto& ep : result.episodes) adopted_.push_back(ep.best);
  pending_design_ = result.partition;
  log_.append(now_, "repair-start", {{"method", "ddz"}, {"leader", ddz_leader_}, {"proposals", result.proposals},
                                     {"accepted", result.accepted}, {"accepted_worse", result.accepted_worse},
                                     {"invalid_moves", result.invalid_moves},
                                     {"episodes", result.episodes.size()}});
  schedule(now_ + std::max(result.proposals, 1) * config_.ddz_iteration_minutes, EvKind::kRepairApply);
}

void Simulation::monitor_tick() {
  schedule(now_ + config_.ddz.consensus_period, EvKind::kMonitorTick);
  window_.prune(now_);
  const std::vector<DeliveryRecord> records(window_.records().begin(), window_.records().end());
  const auto loads = zone_loads(graph_, fleet_.partition, flow_from_history(graph_, records, fleet_.partition), params_);
  double mean = 0.0;
  for (double l : loads) mean += l;
  mean /= static_cast<double>(loads.size());
  record_balance(loads, std::vector<double>(loads.size(), mean));
  if (repair_pending_) return;
  int signaler = -1;
  for (int r = 0; r < config_.robots && signaler < 0; ++r) {
    if (detect_imbalance(history_[r], config_.ddz, now_)) signaler = r;
  }
  if (signaler < 0) return;
  log_.append(now_, "imbalance-signal", {{"robot", signaler}, {"isolated", false}});
  load_share_ = true;
  log_.append(now_, "load-share", {{"active", true}});
  const FlowSource flows = history_flow_source(graph_, records);
  OptimizeResult res;
  if (config_.method == Method::kSa) {
    res = sa_optimize(graph_, flows, params_, config_.robots, config_.sa, seeds_.next_u64(), &fleet_.partition);
  } else {
    GaConfig ga = config_.ga;
    ga.seed = seeds_.next_u64();
    const std::vector<std::vector<int>> seed_pop{assignment_of(graph_, fleet_.partition)};
    res = ga_optimize(graph_, flows, params_, config_.robots, ga, seed_pop);
  }
  pending_design_ = res.partition;
  repair_pending_ = true;
  log_.append(now_, "repair-start", {{"method", method_name(config_.method)}, {"objective", res.objective},
                                     {"proposals", res.proposals}});
  schedule(now_ + config_.repair_minutes, EvKind::kRepairApply);
}

void Simulation::repair_apply() {
  const RepairOutcome outcome = apply_zone_repair(graph_, fleet_, pending_design_, log_, now_);
  if (outcome.applied) adopted_.push_back(fleet_.partition);
  if (config_.method == Method::kDdz) {
    for (int r : ddz_participants_) robots_[r].paused = false;
    log_.append(now_, "ddz-end", {{"leader", ddz_leader_}});
    ddz_active_ = false;
    ddz_running_ = false;
    ddz_participants_.clear();
  } else {
    repair_pending_ = false;
    if (load_share_) {
      load_share_ = false;
      log_.append(now_, "load-share", {{"active", false}});
    }
  }
  reset_detectors();
}

void Simulation::handle(const Event& e) {
  switch (e.kind) {
    case EvKind::kRelease: {
      Part& part = parts_[e.subject];
      log_.append(now_, "arrival", {{"part", part.id}, {"type", part.type}, {"ws", to_int(part.route.front())}});
      station_enqueue(graph_.ws_index(part.route.front()), part.id);
      break;
    }
    case EvKind::kProcessingDone: processing_done(static_cast<std::size_t>(e.subject)); break;
    case EvKind::kRobotArrive: robot_arrive(e.subject); break;
    case EvKind::kHandlingDone: handling_done(e.subject); break;
    case EvKind::kRepairApply: repair_apply(); break;
    case EvKind::kConsensusTick: consensus_tick(); break;
    case EvKind::kConsensusDone: consensus_done(); break;
    case EvKind::kMonitorTick: monitor_tick(); break;
  }
}

SimResult Simulation::run() {
  validate_config(config_);
  const auto violations = validate_partition(graph_, fleet_.partition, config_.robots);
  if (!violations.empty()) {
    fail(ErrorCode::kValidation, "initial partition is invalid: " + violations.front().message);
  }
  for (const auto& t : scenario_.part_types) {
    if (t.route.empty()) fail(ErrorCode::kValidation, "part type " + t.name + " has an empty route");
    for (WsId w : t.route) graph_.workstation(w);
    for (int q = 0; q < t.quantity; ++q) {
      Part p;
      p.id = static_cast<int>(parts_.size());
      p.type = t.name;
      p.route = t.route;
      parts_.push_back(std::move(p));
    }
  }
  adopted_.push_back(fleet_.partition);
  history_.resize(static_cast<std::size_t>(config_.robots));
  for (int r = 0; r < config_.robots; ++r) {
    Robot robot;
    robot.at = graph_.anchor(fleet_.partition.zones[r].workstations.front());
    robots_.push_back(robot);
  }

  const int total = static_cast<int>(parts_.size());
  log_.append(0.0, "run-start", {{"method", method_name(config_.method)}, {"robots", config_.robots},
                                 {"parts", total}, {"seed", config_.seed}, {"layout", graph_.name()},
                                 {"scenario", scenario_.name}, {"zones", zones_json(fleet_.partition)},
                                 {"links", links_json(fleet_.partition)}});
  for (int i = 0; i < total; ++i) {
    const double t = scenario_.release == ReleasePolicy::kStaggered ? i * scenario_.release_interval : 0.0;
    schedule(t, EvKind::kRelease, i);
  }
  if (total > 0) {
    schedule(config_.ddz.consensus_period,
             config_.method == Method::kDdz ? EvKind::kConsensusTick : EvKind::kMonitorTick);
  }

  SimResult result;
  while (completed_ < total) {
    if (pending_work_ == 0 && !repair_pending_ && !ddz_active_) {
      result.status = SimStatus::kDeadlock;
      result.message = std::to_string(total - completed_) + " parts cannot make progress";
      break;
    }
    const Event e = events_.top();
    if (e.time > config_.time_cap_minutes) {
      now_ = config_.time_cap_minutes;
      result.status = SimStatus::kTimeCap;
      result.message = "time cap reached with " + std::to_string(total - completed_) + " parts unfinished";
      break;
    }
    events_.pop();
    if (!periodic(e.kind)) --pending_work_;
    now_ = e.time;
    handle(e);
    maybe_run_ddz();
    for (int r = 0; r < config_.robots; ++r) dispatch(r);
  }

  const char* status = result.status == SimStatus::kCompleted ? "completed"
                       : result.status == SimStatus::kTimeCap ? "time-cap"
                                                              : "deadlock";
  log_.append(now_, "run-end", {{"status", status}, {"completed", completed_}});
  result.log = log_.lines();
  result.protocol_trace = std::move(protocol_trace_);
  result.consensus_trace = std::move(consensus_trace_);
  result.metrics = metrics_from_log(result.log);
  result.adopted = std::move(adopted_);
  result.final_partition = fleet_.partition;
  return result;
}

}  // namespace

SimResult run_simulation(const FloorGraph& graph, const Scenario& scenario, const SimConfig& config,
                         const ZonePartition& initial) {
  Simulation sim(graph, scenario, config, initial);
  return sim.run();
}

}  // namespace zonesim

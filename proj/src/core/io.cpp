#include "zonesim/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "zonesim/error.hpp"

namespace zonesim {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::kIo, "short write to " + path.string());
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::kIo, "sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

namespace {

std::size_t skip_string(const std::string& text, std::size_t i) {
  for (++i; i < text.size(); ++i) {
    if (text[i] == '\\') {
      ++i;
    } else if (text[i] == '"') {
      return i;
    }
  }
  return text.size();
}

int line_at(const std::string& text, std::size_t pos) {
  pos = std::min(pos, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

// Line of the index-th element of the top-level array `section`, or of the
// section key when index < 0. Falls back to line 1.
int element_line(const std::string& text, const std::string& section, int index) {
  int depth = 0;
  std::size_t value = std::string::npos;
  std::size_t key_pos = 0;
  for (std::size_t i = 0; i < text.size() && value == std::string::npos; ++i) {
    const char c = text[i];
    if (c == '"') {
      const std::size_t end = skip_string(text, i);
      if (depth == 1 && text.compare(i + 1, end - i - 1, section) == 0 && end - i - 1 == section.size()) {
        std::size_t k = end + 1;
        while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
        if (k < text.size() && text[k] == ':') {
          value = k + 1;
          key_pos = i;
        }
      }
      i = end;
    } else if (c == '{' || c == '[') {
      ++depth;
    } else if (c == '}' || c == ']') {
      --depth;
    }
  }
  if (value == std::string::npos) return 1;
  if (index < 0) return line_at(text, key_pos);
  std::size_t p = value;
  while (p < text.size() && std::isspace(static_cast<unsigned char>(text[p]))) ++p;
  if (p >= text.size() || text[p] != '[') return line_at(text, key_pos);
  depth = 0;
  int count = -1;
  bool expecting = true;
  for (std::size_t i = p + 1; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (depth == 0) {
      if (c == ']') break;
      if (c == ',') {
        expecting = true;
        continue;
      }
      if (expecting) {
        expecting = false;
        if (++count == index) return line_at(text, i);
      }
    }
    if (c == '"') {
      i = skip_string(text, i);
    } else if (c == '{' || c == '[') {
      ++depth;
    } else if (c == '}' || c == ']') {
      --depth;
    }
  }
  return line_at(text, key_pos);
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, what + ": " + e.what());
  }
}

void check_schema(const json& doc, const std::string& what) {
  if (!doc.is_object()) fail(ErrorCode::kParse, what + ": document must be a JSON object");
  if (!doc.contains("schema_version") || !doc["schema_version"].is_string()) {
    fail(ErrorCode::kParse, what + ": missing schema_version");
  }
  const std::string v = doc["schema_version"].get<std::string>();
  const std::string major = v.substr(0, v.find('.'));
  const std::string ours = std::string(kSchemaVersion).substr(0, 1);
  if (major != ours) {
    fail(ErrorCode::kParse, what + ": unsupported schema_version " + v + " (expected " + ours + ".x)");
  }
}

// Strict object reader: every key must be consumed.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(ErrorCode::kParse, where_ + " must be an object");
  }

  template <typename T>
  void opt(const std::string& key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      fail(ErrorCode::kParse, where_ + "." + key + " has the wrong type");
    }
  }

  template <typename T>
  T req(const std::string& key) {
    if (!j_.contains(key)) fail(ErrorCode::kParse, where_ + " is missing '" + key + "'");
    T out{};
    opt(key, out);
    return out;
  }

  const json* sub(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) fail(ErrorCode::kParse, where_ + " has unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

std::vector<WsId> ws_list(const json& j, const std::string& where) {
  if (!j.is_array()) fail(ErrorCode::kParse, where + " must be an array of workstation numbers");
  std::vector<WsId> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) fail(ErrorCode::kParse, where + " must contain integers");
    out.push_back(WsId{v.get<int>()});
  }
  return out;
}

std::vector<PartType> part_types(const json& j, const std::string& where) {
  if (!j.is_array()) fail(ErrorCode::kParse, where + " must be an array");
  std::vector<PartType> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    Fields f(j[i], at);
    PartType t;
    t.name = f.req<std::string>("type");
    const json* route = f.sub("route");
    if (!route) fail(ErrorCode::kParse, at + " is missing 'route'");
    t.route = ws_list(*route, at + ".route");
    t.quantity = f.req<int>("quantity");
    f.finish();
    if (t.quantity < 0) fail(ErrorCode::kParse, at + ".quantity must be non-negative");
    out.push_back(std::move(t));
  }
  return out;
}

ordered_json part_types_json(const std::vector<PartType>& types) {
  auto out = ordered_json::array();
  for (const auto& t : types) {
    ordered_json r = ordered_json::array();
    for (WsId w : t.route) r.push_back(to_int(w));
    out.push_back({{"type", t.name}, {"route", r}, {"quantity", t.quantity}});
  }
  return out;
}

std::pair<std::string, std::string> segment_ends(const FloorGraph& g, SegIdx s) {
  const auto& seg = g.segments()[s];
  return {g.points()[seg.a].id, g.points()[seg.b].id};
}

SegIdx segment_from_json(const FloorGraph& g, const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string()) {
    fail(ErrorCode::kParse, where + " must be a [point, point] pair");
  }
  const auto a = g.find_point(j[0].get<std::string>());
  const auto b = g.find_point(j[1].get<std::string>());
  if (!a || !b) fail(ErrorCode::kParse, where + " names an unknown point");
  const auto s = g.find_segment(*a, *b);
  if (!s) fail(ErrorCode::kParse, where + " is not a segment of the layout");
  return *s;
}

std::string ctx(const std::string& origin, int line) { return origin + ":" + std::to_string(line) + ": "; }

}  // namespace

LayoutSpec parse_layout(const std::string& text) {
  const json doc = parse_json(text, "layout");
  check_schema(doc, "layout");
  Fields top(doc, "layout");
  std::string schema;
  top.opt("schema_version", schema);
  LayoutSpec spec;
  top.opt("name", spec.name);
  spec.adjacency_threshold = top.req<double>("adjacency_threshold_feet");

  auto element_error = [&](const std::string& section, std::size_t i, const std::string& what) {
    fail(ErrorCode::kParse, "line " + std::to_string(element_line(text, section, static_cast<int>(i))) + ": " +
                                section + "[" + std::to_string(i) + "] " + what);
  };

  const json* points = top.sub("points");
  if (!points || !points->is_array()) fail(ErrorCode::kParse, "layout needs a 'points' array");
  for (std::size_t i = 0; i < points->size(); ++i) {
    const json& p = (*points)[i];
    if (!p.is_object() || !p.contains("id") || !p["id"].is_string() || !p.contains("x") ||
        !p["x"].is_number() || !p.contains("y") || !p["y"].is_number()) {
      element_error("points", i, "needs a string id and numeric x, y");
    }
    LayoutSpec::Point pt{p["id"].get<std::string>(), p["x"].get<double>(), p["y"].get<double>(),
                         PointKind::kJunction};
    if (p.contains("kind")) {
      const std::string kind = p["kind"].is_string() ? p["kind"].get<std::string>() : "";
      if (kind == "workstation") {
        pt.kind = PointKind::kWorkstationAnchor;
      } else if (kind != "junction") {
        element_error("points", i, "kind must be 'junction' or 'workstation'");
      }
    }
    for (auto it = p.begin(); it != p.end(); ++it) {
      if (it.key() != "id" && it.key() != "x" && it.key() != "y" && it.key() != "kind") {
        element_error("points", i, "has unknown key '" + it.key() + "'");
      }
    }
    spec.points.push_back(std::move(pt));
  }

  const json* segments = top.sub("segments");
  if (!segments || !segments->is_array()) fail(ErrorCode::kParse, "layout needs a 'segments' array");
  for (std::size_t i = 0; i < segments->size(); ++i) {
    const json& s = (*segments)[i];
    if (!s.is_array() || s.size() != 2 || !s[0].is_string() || !s[1].is_string()) {
      element_error("segments", i, "must be a [point, point] pair");
    }
    spec.segments.push_back({s[0].get<std::string>(), s[1].get<std::string>()});
  }

  const json* stations = top.sub("workstations");
  if (!stations || !stations->is_array()) fail(ErrorCode::kParse, "layout needs a 'workstations' array");
  for (std::size_t i = 0; i < stations->size(); ++i) {
    const json& w = (*stations)[i];
    if (!w.is_object() || !w.contains("id") || !w["id"].is_number_integer() || !w.contains("anchor") ||
        !w["anchor"].is_string()) {
      element_error("workstations", i, "needs an integer id and a string anchor");
    }
    LayoutSpec::Station st{w["id"].get<int>(), w["anchor"].get<std::string>(), 0.0};
    if (w.contains("processing_minutes")) {
      if (!w["processing_minutes"].is_number()) element_error("workstations", i, "processing_minutes must be a number");
      st.processing_time = w["processing_minutes"].get<double>();
    }
    for (auto it = w.begin(); it != w.end(); ++it) {
      if (it.key() != "id" && it.key() != "anchor" && it.key() != "processing_minutes") {
        element_error("workstations", i, "has unknown key '" + it.key() + "'");
      }
    }
    spec.workstations.push_back(std::move(st));
  }
  top.finish();
  return spec;
}

FloorGraph build_layout(const std::string& text, const std::string& origin) {
  LayoutSpec spec;
  try {
    spec = parse_layout(text);
  } catch (const Error& e) {
    fail(e.code(), origin + ": " + e.what());
  }
  try {
    return FloorGraph::build(spec);
  } catch (const LayoutError& e) {
    throw Error(ErrorCode::kValidation, ctx(origin, element_line(text, e.section(), e.index())) + e.what());
  }
}

FloorGraph load_layout(const fs::path& path) { return build_layout(read_file(path), path.string()); }

std::string layout_to_json(const FloorGraph& g) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["name"] = g.name();
  doc["adjacency_threshold_feet"] = g.adjacency_threshold();
  auto& pts = doc["points"] = ordered_json::array();
  for (const auto& p : g.points()) {
    pts.push_back({{"id", p.id}, {"x", p.pos.x}, {"y", p.pos.y},
                   {"kind", p.kind == PointKind::kWorkstationAnchor ? "workstation" : "junction"}});
  }
  auto& segs = doc["segments"] = ordered_json::array();
  for (std::size_t s = 0; s < g.segment_count(); ++s) {
    const auto [a, b] = segment_ends(g, static_cast<SegIdx>(s));
    segs.push_back({a, b});
  }
  auto& ws = doc["workstations"] = ordered_json::array();
  for (const auto& w : g.workstations()) {
    ws.push_back({{"id", to_int(w.id)}, {"anchor", g.points()[w.anchor].id}, {"processing_minutes", w.processing_time}});
  }
  return doc.dump(2) + "\n";
}

Scenario parse_scenario(const std::string& text) {
  const json doc = parse_json(text, "scenario");
  check_schema(doc, "scenario");
  Fields top(doc, "scenario");
  std::string schema;
  top.opt("schema_version", schema);
  Scenario s;
  top.opt("name", s.name);
  const json* types = top.sub("part_types");
  if (!types) fail(ErrorCode::kParse, "scenario needs 'part_types'");
  s.part_types = part_types(*types, "part_types");
  if (const json* training = top.sub("training")) s.training = part_types(*training, "training");
  if (const json* proc = top.sub("processing_minutes")) {
    if (!proc->is_object()) fail(ErrorCode::kParse, "processing_minutes must map workstation numbers to minutes");
    for (auto it = proc->begin(); it != proc->end(); ++it) {
      int ws = 0;
      try {
        std::size_t used = 0;
        ws = std::stoi(it.key(), &used);
        if (used != it.key().size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        fail(ErrorCode::kParse, "processing_minutes key '" + it.key() + "' is not a workstation number");
      }
      if (!it.value().is_number() || it.value().get<double>() < 0) {
        fail(ErrorCode::kParse, "processing_minutes for WS" + it.key() + " must be a non-negative number");
      }
      s.processing_minutes[ws] = it.value().get<double>();
    }
  }
  if (const json* rel = top.sub("release")) {
    Fields f(*rel, "release");
    std::string policy = "all-at-start";
    f.opt("policy", policy);
    f.opt("interval_minutes", s.release_interval);
    f.finish();
    if (policy == "staggered") {
      s.release = ReleasePolicy::kStaggered;
    } else if (policy != "all-at-start") {
      fail(ErrorCode::kParse, "release.policy must be 'all-at-start' or 'staggered'");
    }
    if (s.release_interval < 0) fail(ErrorCode::kParse, "release.interval_minutes must be non-negative");
  }
  top.finish();
  return s;
}

Scenario load_scenario(const fs::path& path) {
  try {
    return parse_scenario(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    fail(e.code(), path.string() + ": " + e.what());
  }
}

std::string scenario_to_json(const Scenario& s) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["name"] = s.name;
  doc["part_types"] = part_types_json(s.part_types);
  if (!s.training.empty()) doc["training"] = part_types_json(s.training);
  if (!s.processing_minutes.empty()) {
    auto& proc = doc["processing_minutes"] = ordered_json::object();
    for (const auto& [ws, minutes] : s.processing_minutes) proc[std::to_string(ws)] = minutes;
  }
  doc["release"] = {{"policy", s.release == ReleasePolicy::kStaggered ? "staggered" : "all-at-start"},
                    {"interval_minutes", s.release_interval}};
  return doc.dump(2) + "\n";
}

namespace {

const char* sigma_name(SigmaForm f) { return f == SigmaForm::kLiteral ? "literal" : "deviation"; }
const char* handoff_name(LeaderHandoff h) { return h == LeaderHandoff::kRandom ? "random" : "round-robin"; }
const char* stop_name(ConsensusStop s) { return s == ConsensusStop::kFixedSteps ? "fixed-steps" : "tolerance"; }

}  // namespace

SimConfig parse_config(const std::string& text) {
  const json doc = parse_json(text, "config");
  check_schema(doc, "config");
  SimConfig c;
  Fields top(doc, "config");
  std::string schema;
  top.opt("schema_version", schema);
  std::string method = method_name(c.method);
  top.opt("method", method);
  c.method = parse_method(method);
  top.opt("seed", c.seed);
  top.opt("robots", c.robots);
  top.opt("velocity_fpm", c.velocity);
  top.opt("window_minutes", c.window_minutes);
  top.opt("repair_minutes", c.repair_minutes);
  top.opt("time_cap_minutes", c.time_cap_minutes);
  top.opt("record_consensus_trace", c.record_consensus_trace);
  if (const json* h = top.sub("handling")) {
    Fields f(*h, "handling");
    f.opt("load_minutes", c.handling.load);
    f.opt("unload_minutes", c.handling.unload);
    f.finish();
  }
  if (const json* w = top.sub("scheduler")) {
    Fields f(*w, "scheduler");
    f.opt("distance_weight", c.weights.distance);
    f.opt("age_weight", c.weights.age);
    f.finish();
  }
  if (const json* d = top.sub("ddz")) {
    Fields f(*d, "ddz");
    f.opt("load_tolerance_minutes", c.ddz.load_tolerance);
    f.opt("imbalance_time_minutes", c.ddz.imbalance_time);
    f.opt("consensus_period_minutes", c.ddz.consensus_period);
    f.opt("episodes", c.ddz.episodes);
    f.opt("iterations", c.ddz.iterations);
    f.opt("comm_range_feet", c.ddz.comm_range);
    f.opt("reset_n_per_episode", c.ddz.reset_n_per_episode);
    f.opt("iteration_minutes", c.ddz_iteration_minutes);
    std::string sigma = sigma_name(c.ddz.sigma_form);
    std::string handoff = handoff_name(c.ddz.handoff);
    f.opt("sigma_form", sigma);
    f.opt("handoff", handoff);
    f.finish();
    if (sigma == "literal") {
      c.ddz.sigma_form = SigmaForm::kLiteral;
    } else if (sigma != "deviation") {
      fail(ErrorCode::kParse, "ddz.sigma_form must be 'deviation' or 'literal'");
    }
    if (handoff == "random") {
      c.ddz.handoff = LeaderHandoff::kRandom;
    } else if (handoff != "round-robin") {
      fail(ErrorCode::kParse, "ddz.handoff must be 'round-robin' or 'random'");
    }
  }
  if (const json* a = top.sub("annealing")) {
    Fields f(*a, "annealing");
    f.opt("initial_temperature", c.ddz_schedule.initial_temperature);
    f.opt("freezing_temperature", c.ddz_schedule.freezing_temperature);
    f.opt("reductions", c.ddz_schedule.reductions);
    f.opt("k", c.ddz_schedule.k);
    f.opt("greedy_limit", c.ddz_schedule.greedy_limit);
    f.finish();
  }
  if (const json* k = top.sub("consensus")) {
    Fields f(*k, "consensus");
    f.opt("tolerance", c.consensus.tolerance);
    f.opt("max_steps", c.consensus.max_steps);
    f.opt("step_minutes", c.consensus_step_minutes);
    std::string stop = stop_name(c.consensus.stop);
    f.opt("stop", stop);
    f.finish();
    if (stop == "fixed-steps") {
      c.consensus.stop = ConsensusStop::kFixedSteps;
    } else if (stop != "tolerance") {
      fail(ErrorCode::kParse, "consensus.stop must be 'tolerance' or 'fixed-steps'");
    }
  }
  if (const json* s = top.sub("sa")) {
    Fields f(*s, "sa");
    f.opt("initial_temperature", c.sa.schedule.initial_temperature);
    f.opt("freezing_temperature", c.sa.schedule.freezing_temperature);
    f.opt("reductions", c.sa.schedule.reductions);
    f.opt("k", c.sa.schedule.k);
    f.opt("moves_per_temperature", c.sa.moves_per_temperature);
    f.finish();
  }
  if (const json* g = top.sub("ga")) {
    Fields f(*g, "ga");
    f.opt("population", c.ga.population);
    f.opt("generations", c.ga.generations);
    f.opt("crossover_rate", c.ga.crossover_rate);
    f.opt("mutation_rate", c.ga.mutation_rate);
    f.opt("elitism", c.ga.elitism);
    f.opt("tournament", c.ga.tournament);
    f.finish();
  }
  top.finish();
  validate_config(c);
  return c;
}

SimConfig load_config(const fs::path& path) {
  try {
    return parse_config(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    fail(e.code(), path.string() + ": " + e.what());
  }
}

ordered_json config_to_json(const SimConfig& c) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["method"] = method_name(c.method);
  j["seed"] = c.seed;
  j["robots"] = c.robots;
  j["velocity_fpm"] = c.velocity;
  j["handling"] = {{"load_minutes", c.handling.load}, {"unload_minutes", c.handling.unload}};
  j["scheduler"] = {{"distance_weight", c.weights.distance}, {"age_weight", c.weights.age}};
  j["ddz"] = {{"load_tolerance_minutes", c.ddz.load_tolerance},
              {"imbalance_time_minutes", c.ddz.imbalance_time},
              {"consensus_period_minutes", c.ddz.consensus_period},
              {"episodes", c.ddz.episodes},
              {"iterations", c.ddz.iterations},
              {"comm_range_feet", c.ddz.comm_range},
              {"sigma_form", sigma_name(c.ddz.sigma_form)},
              {"reset_n_per_episode", c.ddz.reset_n_per_episode},
              {"handoff", handoff_name(c.ddz.handoff)},
              {"iteration_minutes", c.ddz_iteration_minutes}};
  j["annealing"] = {{"initial_temperature", c.ddz_schedule.initial_temperature},
                    {"freezing_temperature", c.ddz_schedule.freezing_temperature},
                    {"reductions", c.ddz_schedule.reductions},
                    {"k", c.ddz_schedule.k},
                    {"greedy_limit", c.ddz_schedule.greedy_limit}};
  j["consensus"] = {{"tolerance", c.consensus.tolerance},
                    {"max_steps", c.consensus.max_steps},
                    {"stop", stop_name(c.consensus.stop)},
                    {"step_minutes", c.consensus_step_minutes}};
  j["window_minutes"] = c.window_minutes;
  j["sa"] = {{"initial_temperature", c.sa.schedule.initial_temperature},
             {"freezing_temperature", c.sa.schedule.freezing_temperature},
             {"reductions", c.sa.schedule.reductions},
             {"k", c.sa.schedule.k},
             {"moves_per_temperature", c.sa.moves_per_temperature}};
  j["ga"] = {{"population", c.ga.population},   {"generations", c.ga.generations},
             {"crossover_rate", c.ga.crossover_rate}, {"mutation_rate", c.ga.mutation_rate},
             {"elitism", c.ga.elitism},         {"tournament", c.ga.tournament}};
  j["repair_minutes"] = c.repair_minutes;
  j["time_cap_minutes"] = c.time_cap_minutes;
  j["record_consensus_trace"] = c.record_consensus_trace;
  return j;
}

ZonePartition parse_partition(const FloorGraph& g, const std::string& text) {
  const json doc = parse_json(text, "partition");
  check_schema(doc, "partition");
  Fields top(doc, "partition");
  std::string schema;
  top.opt("schema_version", schema);
  ZonePartition p;
  top.opt("design_id", p.design_id);
  const json* zones = top.sub("zones");
  if (!zones || !zones->is_array()) fail(ErrorCode::kParse, "partition needs a 'zones' array");
  for (std::size_t i = 0; i < zones->size(); ++i) {
    const std::string at = "zones[" + std::to_string(i) + "]";
    Fields f((*zones)[i], at);
    Zone z;
    z.id = f.req<int>("id");
    const json* ws = f.sub("workstations");
    if (!ws) fail(ErrorCode::kParse, at + " is missing 'workstations'");
    z.workstations = ws_list(*ws, at + ".workstations");
    if (const json* segs = f.sub("segments")) {
      if (!segs->is_array()) fail(ErrorCode::kParse, at + ".segments must be an array");
      for (std::size_t k = 0; k < segs->size(); ++k) {
        z.segments.push_back(segment_from_json(g, (*segs)[k], at + ".segments[" + std::to_string(k) + "]"));
      }
    }
    f.finish();
    std::sort(z.segments.begin(), z.segments.end());
    p.zones.push_back(std::move(z));
  }
  if (const json* links = top.sub("links")) {
    if (!links->is_array()) fail(ErrorCode::kParse, "links must be an array");
    for (std::size_t i = 0; i < links->size(); ++i) {
      const std::string at = "links[" + std::to_string(i) + "]";
      Fields f((*links)[i], at);
      TransferLink l;
      l.station = WsId{f.req<int>("station")};
      l.station_zone = f.req<int>("station_zone");
      l.path_zone = f.req<int>("path_zone");
      l.path_from = WsId{f.req<int>("path_from")};
      if (const json* path = f.sub("path")) {
        if (!path->is_array()) fail(ErrorCode::kParse, at + ".path must be an array");
        for (std::size_t k = 0; k < path->size(); ++k) {
          l.path.push_back(segment_from_json(g, (*path)[k], at + ".path[" + std::to_string(k) + "]"));
        }
      }
      f.finish();
      p.links.push_back(std::move(l));
    }
  }
  top.finish();
  return p;
}

ZonePartition load_partition(const FloorGraph& g, const fs::path& path) {
  try {
    return parse_partition(g, read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    fail(e.code(), path.string() + ": " + e.what());
  }
}

std::string partition_to_json(const FloorGraph& g, const ZonePartition& p) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["design_id"] = p.design_id;
  auto& zones = doc["zones"] = ordered_json::array();
  for (const auto& z : p.zones) {
    ordered_json ws = ordered_json::array();
    for (WsId w : z.workstations) ws.push_back(to_int(w));
    ordered_json segs = ordered_json::array();
    for (SegIdx s : z.segments) {
      const auto [a, b] = segment_ends(g, s);
      segs.push_back({a, b});
    }
    zones.push_back({{"id", z.id}, {"workstations", ws}, {"segments", segs}});
  }
  auto& links = doc["links"] = ordered_json::array();
  for (const auto& l : p.links) {
    ordered_json path = ordered_json::array();
    for (SegIdx s : l.path) {
      const auto [a, b] = segment_ends(g, s);
      path.push_back({a, b});
    }
    links.push_back({{"station", to_int(l.station)},
                     {"station_zone", l.station_zone},
                     {"path_zone", l.path_zone},
                     {"path_from", to_int(l.path_from)},
                     {"path", path}});
  }
  return doc.dump(2) + "\n";
}

std::string progress_csv(const std::vector<OptimizerProgress>& progress) {
  std::ostringstream out;
  out.precision(17);
  out << "step,current,best\n";
  for (const auto& p : progress) out << p.step << ',' << p.current << ',' << p.best << '\n';
  return out.str();
}

ordered_json manifest_to_json(const RunManifest& m) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["tool_version"] = m.tool_version;
  j["method"] = m.method;
  j["seed"] = m.seed;
  j["config_hash"] = m.config_hash;
  j["config"] = m.config;
  j["inputs"]["layout"] = {{"path", m.layout.path}, {"sha256", m.layout.sha256}};
  j["inputs"]["scenario"] = {{"path", m.scenario.path}, {"sha256", m.scenario.sha256}};
  if (m.partition) {
    j["inputs"]["partition"] = {{"path", m.partition->path}, {"sha256", m.partition->sha256}};
  } else {
    j["inputs"]["partition"] = nullptr;
  }
  j["status"] = m.status;
  j["outputs"] = m.outputs;
  return j;
}

RunManifest manifest_from_json(const json& j) {
  check_schema(j, "manifest");
  RunManifest m;
  try {
    m.tool_version = j.at("tool_version").get<std::string>();
    m.method = j.at("method").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.config = j.at("config");
    const auto& in = j.at("inputs");
    m.layout = {in.at("layout").at("path").get<std::string>(), in.at("layout").at("sha256").get<std::string>()};
    m.scenario = {in.at("scenario").at("path").get<std::string>(), in.at("scenario").at("sha256").get<std::string>()};
    if (in.contains("partition") && !in.at("partition").is_null()) {
      m.partition = InputDigest{in.at("partition").at("path").get<std::string>(),
                                in.at("partition").at("sha256").get<std::string>()};
    }
    m.status = j.at("status").get<std::string>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("manifest: ") + e.what());
  }
  return m;
}

void write_run(const fs::path& dir, const FloorGraph& graph, const SimResult& result, RunManifest manifest) {
  fs::create_directories(dir);
  std::string events;
  for (const auto& l : result.log) events += l + "\n";
  std::string trace;
  for (const auto& l : result.protocol_trace) trace += l + "\n";
  write_file(dir / "events.jsonl", events);
  write_file(dir / "metrics.json", metrics_to_json(result.metrics).dump(2) + "\n");
  write_file(dir / "throughput.csv", throughput_csv(result.metrics));
  write_file(dir / "ddz_trace.jsonl", trace);
  write_file(dir / "partition_final.json", partition_to_json(graph, result.final_partition));
  manifest.outputs = {"events.jsonl", "metrics.json", "throughput.csv", "ddz_trace.jsonl", "partition_final.json"};
  if (!result.consensus_trace.empty()) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "step,robot,value,degree\n";
    for (const auto& r : result.consensus_trace) csv << r.step << ',' << r.robot << ',' << r.value << ',' << r.degree << '\n';
    write_file(dir / "consensus_trace.csv", csv.str());
    manifest.outputs.push_back("consensus_trace.csv");
  }
  write_file(dir / "manifest.json", manifest_to_json(manifest).dump(2) + "\n");
}

RunArtifacts read_run(const fs::path& dir) {
  RunArtifacts a;
  a.dir = dir;
  a.manifest = manifest_from_json(parse_json(read_file(dir / "manifest.json"), (dir / "manifest.json").string()));
  a.metrics = metrics_from_json(parse_json(read_file(dir / "metrics.json"), (dir / "metrics.json").string()));
  return a;
}

MetricsReport replay_metrics(const fs::path& event_log) {
  std::istringstream in(read_file(event_log));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return metrics_from_log(lines);
}

Report build_report(const std::vector<RunArtifacts>& runs) {
  if (runs.empty()) fail(ErrorCode::kInvalidArgument, "report needs at least one run");
  for (const auto& r : runs) {
    if (r.manifest.scenario.sha256 != runs.front().manifest.scenario.sha256) {
      fail(ErrorCode::kIncompatible, r.dir.string() + " used a different scenario than " + runs.front().dir.string());
    }
    if (r.manifest.layout.sha256 != runs.front().manifest.layout.sha256) {
      fail(ErrorCode::kIncompatible, r.dir.string() + " used a different layout than " + runs.front().dir.string());
    }
  }
  Report rep;
  std::ostringstream csv, curve, text;
  csv.precision(10);
  curve.precision(17);
  csv << "run,method,seed,time_to_complete_h,percent_in_balance,balance_comparable,avg_travel_ft,stddev_travel_ft,status\n";
  curve << "run,method,time_min,completed\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %-6s %8s %10s %12s %12s\n", "run", "method", "time(h)", "%balance",
                "avg dist(ft)", "sd dist(ft)");
  text << buf;
  for (const auto& r : runs) {
    const auto& m = r.metrics;
    const std::string name = r.dir.filename().string();
    const std::string balance = m.balance_comparable ? std::to_string(m.percent_in_balance) : "NA";
    csv << name << ',' << m.method << ',' << r.manifest.seed << ',' << m.time_to_complete_hours << ','
 << balance << ',' << (m.balance_comparable ? "true" : "false") << ','
        << m.average_distance << ',' << m.distance_stddev << ',' << m.status << '\n';
    for (const auto& p : m.throughput) curve << name << ',' << m.method << ',' << p.time << ',' << p.completed << '\n';
    char pct[32];
    if (m.balance_comparable) {
      std::snprintf(pct, sizeof pct, "%.2f", m.percent_in_balance);
    } else {
      std::snprintf(pct, sizeof pct, "NA");
    }
    std::snprintf(buf, sizeof buf, "%-24s %-6s %8.2f %10s %12.0f %12.0f\n", name.c_str(), m.method.c_str(),
                  m.time_to_complete_hours, pct, m.average_distance, m.distance_stddev);
    text << buf;
  }
  rep.table_csv = csv.str();
  rep.throughput_csv = curve.str();
  rep.text = text.str();
  return rep;
}

}  // namespace zonesim

#include "zonesim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "zonesim/error.hpp"

namespace zonesim {

MetricsReport metrics_from_log(std::span<const std::string> lines) {
  MetricsReport m;
  bool balanced = true;
  double balance_since = 0.0;
  double balanced_time = 0.0;
  double last_complete = 0.0;
  for (const auto& line : lines) {
    nlohmann::json e;
    try {
      e = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorCode::kParse, std::string("event log line is not JSON: ") + ex.what());
    }
    const std::string kind = e.at("kind").get<std::string>();
    const double t = e.at("t").get<double>();
    if (kind == "run-start") {
      m.method = e.at("method").get<std::string>();
      m.robots = e.at("robots").get<int>();
      m.parts_total = e.at("parts").get<int>();
      m.robot_distance.assign(static_cast<std::size_t>(m.robots), 0.0);
      m.balance_comparable = m.method != "ddz";
    } else if (kind == "pickup" || kind == "dropoff") {
      const int r = e.at("robot").get<int>();
      if (r < 0 || r >= m.robots) fail(ErrorCode::kParse, "event log names an unknown robot");
      m.robot_distance[static_cast<std::size_t>(r)] += e.at("dist").get<double>();
    } else if (kind == "part-complete") {
      ++m.parts_completed;
      last_complete = t;
      m.throughput.push_back({t, m.parts_completed});
    } else if (kind == "balance") {
      const bool now_balanced = e.at("balanced").get<bool>();
      if (balanced) balanced_time += t - balance_since;
      balanced = now_balanced;
      balance_since = t;
    } else if (kind == "zone-repair-applied") {
      ++m.repairs;
    } else if (kind == "repair-rejected") {
      ++m.repairs_rejected;
    } else if (kind == "run-end") {
      m.status = e.at("status").get<std::string>();
      m.end_time_minutes = t;
      if (balanced) balanced_time += t - balance_since;
    }
  }
  m.time_to_complete_hours = last_complete / 60.0;
  m.percent_in_balance = m.end_time_minutes > 0.0 ? 100.0 * balanced_time / m.end_time_minutes : 0.0;
  if (!m.robot_distance.empty()) {
    const double n = static_cast<double>(m.robot_distance.size());
    m.average_distance = std::accumulate(m.robot_distance.begin(), m.robot_distance.end(), 0.0) / n;
    double ss = 0.0;
    for (double d : m.robot_distance) ss += (d - m.average_distance) * (d - m.average_distance);
    m.distance_stddev = std::sqrt(ss / n);
  }
  return m;
}

nlohmann::ordered_json metrics_to_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["schema_version"] = "1.0";
  j["method"] = m.method;
  j["status"] = m.status;
  j["robots"] = m.robots;
  j["parts_total"] = m.parts_total;
  j["parts_completed"] = m.parts_completed;
  j["end_time_minutes"] = m.end_time_minutes;
  j["time_to_complete_hours"] = m.time_to_complete_hours;
  j["percent_in_balance"] = m.percent_in_balance;
  j["balance_comparable"] = m.balance_comparable;
  j["robot_distance_feet"] = m.robot_distance;
  j["average_distance_feet"] = m.average_distance;
  j["distance_stddev_feet"] = m.distance_stddev;
  j["repairs"] = m.repairs;
  j["repairs_rejected"] = m.repairs_rejected;
  auto& tp = j["throughput"] = nlohmann::ordered_json::array();
  for (const auto& p : m.throughput) tp.push_back({p.time, p.completed});
  return j;
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
  MetricsReport m;
  m.method = j.at("method").get<std::string>();
  m.status = j.at("status").get<std::string>();
  m.robots = j.at("robots").get<int>();
  m.parts_total = j.at("parts_total").get<int>();
  m.parts_completed = j.at("parts_completed").get<int>();
  m.end_time_minutes = j.at("end_time_minutes").get<double>();
  m.time_to_complete_hours = j.at("time_to_complete_hours").get<double>();
  m.percent_in_balance = j.at("percent_in_balance").get<double>();
  m.balance_comparable = j.at("balance_comparable").get<bool>();
  m.robot_distance = j.at("robot_distance_feet").get<std::vector<double>>();
  m.average_distance = j.at("average_distance_feet").get<double>();
  m.distance_stddev = j.at("distance_stddev_feet").get<double>();
  m.repairs = j.at("repairs").get<int>();
  m.repairs_rejected = j.at("repairs_rejected").get<int>();
  for (const auto& p : j.at("throughput")) m.throughput.push_back({p.at(0).get<double>(), p.at(1).get<int>()});
  return m;
}

std::string throughput_csv(const MetricsReport& m) {
  std::ostringstream out;
  out.precision(17);
  out << "time_min,completed\n";
  for (const auto& p : m.throughput) out << p.time << ',' << p.completed << '\n';
  return out.str();
}

}  // namespace zonesim

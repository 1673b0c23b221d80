#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace zonesim {

struct ThroughputPoint {
  double time = 0.0;  // minutes
  int completed = 0;

  friend bool operator==(const ThroughputPoint&, const ThroughputPoint&) = default;
};

struct MetricsReport {
  std::string method;
  std::string status;
  int robots = 0;
  int parts_total = 0;
  int parts_completed = 0;
  double end_time_minutes = 0.0;
  double time_to_complete_hours = 0.0;
  double percent_in_balance = 0.0;
  bool balance_comparable = true;  // false for DDZ: reported as NA
  std::vector<double> robot_distance;  // feet
  double average_distance = 0.0;
  double distance_stddev = 0.0;
  std::vector<ThroughputPoint> throughput;
  int repairs = 0;
  int repairs_rejected = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// Everything is recomputed from the event log alone.
MetricsReport metrics_from_log(std::span<const std::string> lines);

nlohmann::ordered_json metrics_to_json(const MetricsReport& m);
MetricsReport metrics_from_json(const nlohmann::json& j);

// "time_min,completed" rows.
std::string throughput_csv(const MetricsReport& m);

}  // namespace zonesim

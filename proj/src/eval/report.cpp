#include "camarm/eval/report.hpp"

#include <cstdio>
#include <sstream>

namespace camarm {

nlohmann::json to_json(const TrialMetrics& m) {
  return {{"success", m.success}, {"collided", m.collided}, {"s_vis", m.s_vis}, {"jerk", m.jerk},
          {"frame_error", m.frame_error}, {"srr", m.srr}, {"duration", m.duration}, {"failure", m.failure}};
}

nlohmann::json to_json(const Aggregate& a) {
  return {{"trials", a.trials}, {"successes", a.successes}, {"success_rate", a.success_rate}, {"s_vis", a.s_vis},
          {"jerk", a.jerk},     {"frame_error", a.frame_error}, {"srr", a.srr}};
}

nlohmann::json benchmark_report(const BenchmarkResult& r, const nlohmann::json& stamp) {
  nlohmann::json rows = nlohmann::json::array(), timing = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json trials = nlohmann::json::array();
    nlohmann::json lat = nlohmann::json::array();
    for (const auto& t : row.trials) {
      trials.push_back(to_json(t));
      lat.push_back(t.latency_ms);
    }
    rows.push_back({{"method", row.method}, {"task", to_string(row.task)}, {"aggregate", to_json(row.agg)}, {"trials", trials}});
    timing.push_back({{"method", row.method}, {"task", to_string(row.task)}, {"mean_latency_ms", row.agg.latency_ms},
                      {"latency_ms", lat}});
  }
  nlohmann::json stats = nlohmann::json::object();
  for (const auto& [k, v] : r.svis_stats) stats[k] = to_json(v);
  return {{"schema", "camarm.benchmark/1"},
          {"stamp", stamp},
          {"metrics", {{"rows", rows}, {"svis_stats", stats}}},
          {"timing", {{"rows", timing}}}};
}

std::string metrics_payload(const nlohmann::json& report) { return report.at("metrics").dump(); }

std::string format_table(const BenchmarkResult& r) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-18s %-20s %8s %7s %10s %9s %6s %9s\n", "task", "method", "success", "S_vis",
                "jerk", "frame_px", "SRR", "lat_ms");
  os << buf;
  for (const auto& row : r.rows) {
    const Aggregate& a = row.agg;
    std::snprintf(buf, sizeof buf, "%-18s %-20s %4d/%-3d %7.3f %10.2f %9.1f %6.2f %9.2f\n", to_string(row.task).c_str(),
                  row.method.c_str(), a.successes, a.trials, a.s_vis, a.jerk, a.frame_error, a.srr, a.latency_ms);
    os << buf;
  }
  return os.str();
}

}  // namespace camarm

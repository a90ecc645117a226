#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "camarm/eval/benchmark.hpp"

namespace camarm {

// {schema, stamp, metrics, timing}. "metrics" depends only on seeds and
// configs; wall-clock numbers (policy latency) go to "timing".
nlohmann::json benchmark_report(const BenchmarkResult& r, const nlohmann::json& stamp);

// Canonical dump of report["metrics"] (compact, sorted keys).
std::string metrics_payload(const nlohmann::json& report);

// Fixed-width text table, one line per (task, method).
std::string format_table(const BenchmarkResult& r);

nlohmann::json to_json(const TrialMetrics& m);
nlohmann::json to_json(const Aggregate& a);

}  // namespace camarm

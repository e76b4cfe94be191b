// Copyright 2026 The flowpredict Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "flowpredict/simulator.h"
#include "json.hpp"

namespace flowpredict::sim {

namespace {

using nlohmann::json;

json num(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double get_num(const json& j, const char* key) {
  const json& v = j.at(key);
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

std::string fmt(double v, const char* spec = "%.6f") {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

void write_report_csv(const SimReport& report, std::ostream& out) {
  out << kReportCsvHeader << '\n';
  for (const WindowMetrics& m : report.windows) {
    out << m.window_index << ',' << fmt(m.accuracy) << ',' << m.nn_packets << ','
        << m.fcfs_packets << ',' << m.oracle_packets << ',' << fmt(m.speedup) << ','
        << fmt(m.oracle_ratio) << '\n';
  }
}

std::string to_json(const SimReport& report) {
  json j;
  const SimConfig& c = report.config;
  j["config"] = {{"window_size", c.window_size},
                 {"test_size", c.test_size},
                 {"epochs", c.epochs},
                 {"capacity_frac", c.capacity_frac},
                 {"seed", c.seed},
                 {"bins", c.bins.thresholds()}};
  j["trace_size"] = report.trace_size;
  j["network_dims"] = report.network_dims;
  json rows = json::array();
  for (const WindowMetrics& m : report.windows) {
    rows.push_back({{"index", m.window_index},
                    {"accuracy", num(m.accuracy)},
                    {"nn_packets", m.nn_packets},
                    {"fcfs_packets", m.fcfs_packets},
                    {"oracle_packets", m.oracle_packets},
                    {"speedup", num(m.speedup)},
                    {"oracle_ratio", num(m.oracle_ratio)}});
  }
  j["windows"] = std::move(rows);
  const Summary& s = report.summary;
  j["summary"] = {{"mean_speedup", num(s.mean_speedup)},
                  {"min_speedup", num(s.min_speedup)},
                  {"max_speedup", num(s.max_speedup)},
                  {"mean_oracle_ratio", num(s.mean_oracle_ratio)},
                  {"final_accuracy", num(s.final_accuracy)},
                  {"mean_accuracy", num(s.mean_accuracy)}};
  return j.dump(2) + "\n";
}

SimReport from_json(const std::string& text) {
  SimReport r;
  try {
    const json j = json::parse(text);
    const json& c = j.at("config");
    r.config.window_size = c.at("window_size").get<std::size_t>();
    r.config.test_size = c.at("test_size").get<std::size_t>();
    r.config.epochs = c.at("epochs").get<std::size_t>();
    r.config.capacity_frac = c.at("capacity_frac").get<double>();
    r.config.seed = c.at("seed").get<std::uint64_t>();
    r.config.bins = encoder::BinBoundaries(c.at("bins").get<std::array<std::uint64_t, 4>>());
    r.trace_size = j.at("trace_size").get<std::size_t>();
    r.network_dims = j.at("network_dims").get<std::vector<std::size_t>>();
    for (const json& w : j.at("windows")) {
      WindowMetrics m;
      m.window_index = w.at("index").get<std::size_t>();
      m.accuracy = get_num(w, "accuracy");
      m.nn_packets = w.at("nn_packets").get<std::uint64_t>();
      m.fcfs_packets = w.at("fcfs_packets").get<std::uint64_t>();
      m.oracle_packets = w.at("oracle_packets").get<std::uint64_t>();
      m.speedup = get_num(w, "speedup");
      m.oracle_ratio = get_num(w, "oracle_ratio");
      r.windows.push_back(m);
    }
    const json& s = j.at("summary");
    r.summary.mean_speedup = get_num(s, "mean_speedup");
    r.summary.min_speedup = get_num(s, "min_speedup");
    r.summary.max_speedup = get_num(s, "max_speedup");
    r.summary.mean_oracle_ratio = get_num(s, "mean_oracle_ratio");
    r.summary.final_accuracy = get_num(s, "final_accuracy");
    r.summary.mean_accuracy = get_num(s, "mean_accuracy");
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad report JSON: ") + e.what());
  }
  return r;
}

std::string to_table(const SimReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%6s %9s %12s %12s %12s %8s %8s\n", "window", "accuracy",
                "nn_pkts", "fcfs_pkts", "oracle_pkts", "speedup", "oracle");
  out << line;
  for (const WindowMetrics& m : report.windows) {
    std::snprintf(line, sizeof line, "%6zu %9s %12llu %12llu %12llu %8s %8s\n", m.window_index,
                  fmt(m.accuracy, "%.4f").c_str(), static_cast<unsigned long long>(m.nn_packets),
                  static_cast<unsigned long long>(m.fcfs_packets),
                  static_cast<unsigned long long>(m.oracle_packets),
                  fmt(m.speedup, "%.3f").c_str(), fmt(m.oracle_ratio, "%.3f").c_str());
    out << line;
  }
  const Summary& s = report.summary;
  out << "windows:          " << report.windows.size() << "\n";
  out << "speedup mean/min/max: " << fmt(s.mean_speedup, "%.3f") << " / "
      << fmt(s.min_speedup, "%.3f") << " / " << fmt(s.max_speedup, "%.3f") << "\n";
  out << "oracle ratio mean:    " << fmt(s.mean_oracle_ratio, "%.3f") << "\n";
  out << "accuracy final/mean:  " << fmt(s.final_accuracy, "%.4f") << " / "
      << fmt(s.mean_accuracy, "%.4f") << "\n";
  return out.str();
}

}  // namespace flowpredict::sim

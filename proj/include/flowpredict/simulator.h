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

// Trace replay against a capacity-limited flow table.
//
// A window of flows competes for `capacity` table slots. Three admission
// policies are scored by the packets their admitted flows carry:
//   nn      highest predicted rank first, ties by arrival
//   fcfs    first `capacity` arrivals
//   oracle  the `capacity` largest flows by true packet count

#ifndef FLOWPREDICT_SIMULATOR_H_
#define FLOWPREDICT_SIMULATOR_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "flowpredict/encoder.h"
#include "flowpredict/ffnn.h"
#include "flowpredict/tracegen.h"

namespace flowpredict::sim {

struct WindowMetrics {
  std::size_t window_index = 0;
  double accuracy = 0.0;
  std::uint64_t nn_packets = 0;
  std::uint64_t fcfs_packets = 0;
  std::uint64_t oracle_packets = 0;
  // NaN when fcfs_packets == 0.
  double speedup = 0.0;
  double oracle_ratio = 0.0;

  bool operator==(const WindowMetrics&) const;
};

struct SimConfig {
  std::size_t window_size = 3247;
  std::size_t test_size = 1083;
  std::size_t epochs = 5;
  double capacity_frac = 0.5;
  std::uint64_t seed = 0;
  encoder::BinBoundaries bins;

  bool operator==(const SimConfig&) const = default;
};

struct Summary {
  double mean_speedup = 0.0;
  double min_speedup = 0.0;
  double max_speedup = 0.0;
  double mean_oracle_ratio = 0.0;
  double final_accuracy = 0.0;
  double mean_accuracy = 0.0;

  bool operator==(const Summary&) const;
};

struct SimReport {
  SimConfig config;
  std::size_t trace_size = 0;
  std::vector<std::size_t> network_dims;
  std::vector<WindowMetrics> windows;
  Summary summary;

  bool operator==(const SimReport&) const = default;
};

// Slots available to a window of `window_size` flows.
std::size_t capacity_for(std::size_t window_size, double capacity_frac);

// Indices of the admitted flows, best first: rank descending, then earlier
// arrival. Throws std::invalid_argument if capacity exceeds the window or the
// rank count differs from the window size.
std::vector<std::size_t> admit(std::span<const tracegen::FlowRecord> window,
                               std::span<const std::uint64_t> ranks, std::size_t capacity);

// Fills the packet and ratio fields; window_index and accuracy are left 0.
WindowMetrics window_speedup(std::span<const tracegen::FlowRecord> window,
                             std::span<const std::uint64_t> ranks, std::size_t capacity);

// Ranks by predicted class.
std::vector<std::uint64_t> predicted_ranks(const ffnn::Network& net,
                                           std::span<const tracegen::FlowRecord> window);
// Ranks by true packet count (perfect knowledge).
std::vector<std::uint64_t> true_count_ranks(std::span<const tracegen::FlowRecord> window);

std::vector<ffnn::Sample> make_samples(std::span<const tracegen::FlowRecord> records,
                                       const encoder::BinBoundaries& bins);

// Fraction of samples whose predicted class equals the target.
double accuracy(const ffnn::Network& net, std::span<const ffnn::Sample> samples);

// Holds out the first test_size records, then for each full window of the
// remainder: scores the window with the current network, evaluates held-out
// accuracy, and only then trains `epochs` epochs on the window. Throws
// std::invalid_argument when the trace is shorter than test_size +
// window_size.
SimReport run_online(std::span<const tracegen::FlowRecord> trace, ffnn::Network& net,
                     const SimConfig& cfg);

Summary summarize(std::span<const WindowMetrics> windows);

// report.csv: index,accuracy,nn_packets,fcfs_packets,oracle_packets,speedup,oracle_ratio
inline constexpr const char* kReportCsvHeader =
    "index,accuracy,nn_packets,fcfs_packets,oracle_packets,speedup,oracle_ratio";
void write_report_csv(const SimReport& report, std::ostream& out);
// NaN ratios become JSON null.
std::string to_json(const SimReport& report);
SimReport from_json(const std::string& text);
// Human-readable per-window table plus summary lines.
std::string to_table(const SimReport& report);

}  // namespace flowpredict::sim

#endif  // FLOWPREDICT_SIMULATOR_H_

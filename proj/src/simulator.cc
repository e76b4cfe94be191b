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

#include "flowpredict/simulator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace flowpredict::sim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? kNaN : static_cast<double>(num) / static_cast<double>(den);
}

// Window indices in arrival order (timestamp, then position).
std::vector<std::size_t> arrival_order(std::span<const tracegen::FlowRecord> window) {
  std::vector<std::size_t> order(window.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return window[a].first.arrival_us < window[b].first.arrival_us;
  });
  return order;
}

}  // namespace

bool WindowMetrics::operator==(const WindowMetrics& o) const {
  return window_index == o.window_index && same(accuracy, o.accuracy) &&
         nn_packets == o.nn_packets && fcfs_packets == o.fcfs_packets &&
         oracle_packets == o.oracle_packets && same(speedup, o.speedup) &&
         same(oracle_ratio, o.oracle_ratio);
}

bool Summary::operator==(const Summary& o) const {
  return same(mean_speedup, o.mean_speedup) && same(min_speedup, o.min_speedup) &&
         same(max_speedup, o.max_speedup) && same(mean_oracle_ratio, o.mean_oracle_ratio) &&
         same(final_accuracy, o.final_accuracy) && same(mean_accuracy, o.mean_accuracy);
}

std::size_t capacity_for(std::size_t window_size, double capacity_frac) {
  if (!(capacity_frac >= 0.0 && capacity_frac <= 1.0)) {
    throw std::invalid_argument("capacity fraction must be in [0,1]");
  }
  return static_cast<std::size_t>(std::floor(static_cast<double>(window_size) * capacity_frac));
}

std::vector<std::size_t> admit(std::span<const tracegen::FlowRecord> window,
                               std::span<const std::uint64_t> ranks, std::size_t capacity) {
  if (ranks.size() != window.size()) throw std::invalid_argument("one rank per flow required");
  if (capacity > window.size()) throw std::invalid_argument("capacity exceeds window size");
  std::vector<std::size_t> order = arrival_order(window);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ranks[a] > ranks[b]; });
  order.resize(capacity);
  return order;
}

WindowMetrics window_speedup(std::span<const tracegen::FlowRecord> window,
                             std::span<const std::uint64_t> ranks, std::size_t capacity) {
  if (window.empty()) throw std::invalid_argument("empty window");
  WindowMetrics m;
  for (std::size_t i : admit(window, ranks, capacity)) m.nn_packets += window[i].packet_count;

  const std::vector<std::size_t> arrivals = arrival_order(window);
  for (std::size_t k = 0; k < capacity; ++k) m.fcfs_packets += window[arrivals[k]].packet_count;

  std::vector<std::uint64_t> counts;
  counts.reserve(window.size());
  for (const auto& r : window) counts.push_back(r.packet_count);
  std::sort(counts.begin(), counts.end(), std::greater<>());
  m.oracle_packets = std::accumulate(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(capacity),
                                     std::uint64_t{0});

  m.speedup = ratio(m.nn_packets, m.fcfs_packets);
  m.oracle_ratio = ratio(m.oracle_packets, m.fcfs_packets);
  return m;
}

std::vector<std::uint64_t> predicted_ranks(const ffnn::Network& net,
                                           std::span<const tracegen::FlowRecord> window) {
  std::vector<std::uint64_t> ranks;
  ranks.reserve(window.size());
  for (const auto& r : window) {
    const encoder::FeatureVector f = encoder::featurize(r.first);
    ranks.push_back(static_cast<std::uint64_t>(ffnn::predict(net, f).value()));
  }
  return ranks;
}

std::vector<std::uint64_t> true_count_ranks(std::span<const tracegen::FlowRecord> window) {
  std::vector<std::uint64_t> ranks;
  ranks.reserve(window.size());
  for (const auto& r : window) ranks.push_back(r.packet_count);
  return ranks;
}

std::vector<ffnn::Sample> make_samples(std::span<const tracegen::FlowRecord> records,
                                       const encoder::BinBoundaries& bins) {
  std::vector<ffnn::Sample> samples;
  samples.reserve(records.size());
  for (const auto& r : records) {
    samples.push_back(
        ffnn::make_sample(encoder::featurize(r.first), encoder::label(r.packet_count, bins)));
  }
  return samples;
}

double accuracy(const ffnn::Network& net, std::span<const ffnn::Sample> samples) {
  if (samples.empty()) return kNaN;
  std::size_t correct = 0;
  for (const auto& s : samples) {
    if (ffnn::predict(net, s.input) == encoder::decode_one_hot(s.target)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

SimReport run_online(std::span<const tracegen::FlowRecord> trace, ffnn::Network& net,
                     const SimConfig& cfg) {
  if (cfg.window_size == 0) throw std::invalid_argument("window size must be >= 1");
  if (trace.size() < cfg.test_size + cfg.window_size) {
    throw std::invalid_argument("trace has " + std::to_string(trace.size()) +
                                " records; need at least test_size + window_size = " +
                                std::to_string(cfg.test_size + cfg.window_size));
  }
  const std::size_t capacity = capacity_for(cfg.window_size, cfg.capacity_frac);
  const std::vector<ffnn::Sample> held_out = make_samples(trace.first(cfg.test_size), cfg.bins);
  const auto stream = trace.subspan(cfg.test_size);
  const std::size_t n_windows = stream.size() / cfg.window_size;

  SimReport report;
  report.config = cfg;
  report.trace_size = trace.size();
  report.network_dims = net.dims();
  std::mt19937_64 epoch_seeds(cfg.seed);

  for (std::size_t w = 0; w < n_windows; ++w) {
    const auto window = stream.subspan(w * cfg.window_size, cfg.window_size);
    WindowMetrics m = window_speedup(window, predicted_ranks(net, window), capacity);
    m.window_index = w;
    m.accuracy = accuracy(net, held_out);
    report.windows.push_back(m);

    if (cfg.epochs > 0) {
      const std::vector<ffnn::Sample> samples = make_samples(window, cfg.bins);
      for (std::size_t e = 0; e < cfg.epochs; ++e) ffnn::train_epoch(net, samples, epoch_seeds());
    }
  }
  report.summary = summarize(report.windows);
  return report;
}

Summary summarize(std::span<const WindowMetrics> windows) {
  Summary s;
  if (windows.empty()) {
    s = Summary{kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
    return s;
  }
  double speed_sum = 0.0;
  double oracle_sum = 0.0;
  double acc_sum = 0.0;
  std::size_t speed_n = 0;
  s.min_speedup = std::numeric_limits<double>::infinity();
  s.max_speedup = -std::numeric_limits<double>::infinity();
  for (const WindowMetrics& m : windows) {
    acc_sum += m.accuracy;
    if (std::isnan(m.speedup)) continue;
    speed_sum += m.speedup;
    oracle_sum += m.oracle_ratio;
    s.min_speedup = std::min(s.min_speedup, m.speedup);
    s.max_speedup = std::max(s.max_speedup, m.speedup);
    ++speed_n;
  }
  if (speed_n == 0) {
    s.mean_speedup = s.min_speedup = s.max_speedup = s.mean_oracle_ratio = kNaN;
  } else {
    s.mean_speedup = speed_sum / static_cast<double>(speed_n);
    s.mean_oracle_ratio = oracle_sum / static_cast<double>(speed_n);
  }
  s.mean_accuracy = acc_sum / static_cast<double>(windows.size());
  s.final_accuracy = windows.back().accuracy;
  return s;
}

}  // namespace flowpredict::sim

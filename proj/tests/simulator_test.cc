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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "admission_oracle.h"

namespace flowpredict::sim {
namespace {

std::vector<tracegen::FlowRecord> sized(std::initializer_list<std::uint64_t> counts) {
  std::vector<tracegen::FlowRecord> w;
  std::int64_t t = 0;
  for (std::uint64_t c : counts) {
    tracegen::FlowRecord r;
    r.packet_count = c;
    r.byte_count = 40 * c;
    r.first.arrival_us = t++;
    w.push_back(r);
  }
  return w;
}

ffnn::Network small_net(std::uint64_t seed) {
  ffnn::NetworkConfig cfg;
  cfg.dims = {16, 12, 5};
  return ffnn::Network::init(cfg, seed);
}

TEST(Admit, EqualRanksIsFcfs) {
  const auto w = sized({5, 1, 9, 3, 7, 2});
  const std::vector<std::uint64_t> ranks(6, 3);
  EXPECT_EQ(admit(w, ranks, 3), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Admit, DistinctRanksTakeTop) {
  const auto w = sized({5, 1, 9, 3, 7});
  const std::vector<std::uint64_t> ranks = {2, 5, 1, 4, 3};
  EXPECT_EQ(admit(w, ranks, 3), (std::vector<std::size_t>{1, 3, 4}));
}

TEST(Admit, MatchesStableSortOnSmallWindows) {
  std::mt19937_64 rng(17);
  for (int n = 0; n < 500; ++n) {
    auto w = testing::random_window(rng, 10);
    std::vector<std::uint64_t> ranks(10);
    for (auto& r : ranks) r = 1 + rng() % 5;
    const auto got = admit(w, ranks, 5);
    ASSERT_EQ(got.size(), 5u);
    EXPECT_EQ(got, testing::brute_admit(ranks, 5));
  }
}

TEST(Admit, UsesArrivalTimeNotPosition) {
  auto w = sized({1, 1, 1});
  w[0].first.arrival_us = 30;
  const std::vector<std::uint64_t> ranks = {1, 1, 1};
  EXPECT_EQ(admit(w, ranks, 2), (std::vector<std::size_t>{1, 2}));
}

TEST(Admit, Errors) {
  const auto w = sized({1, 2});
  const std::vector<std::uint64_t> ranks = {1, 2};
  EXPECT_THROW(admit(w, ranks, 3), std::invalid_argument);
  const std::vector<std::uint64_t> one = {1};
  EXPECT_THROW(admit(w, one, 1), std::invalid_argument);
}

TEST(Speedup, HandComputedMicroCase) {
  const auto w = sized({1000, 1, 1, 1000});
  const auto m = window_speedup(w, true_count_ranks(w), 2);
  EXPECT_EQ(m.nn_packets, 2000u);
  EXPECT_EQ(m.fcfs_packets, 1001u);
  EXPECT_EQ(m.oracle_packets, 2000u);
  EXPECT_DOUBLE_EQ(m.speedup, 2000.0 / 1001.0);
  EXPECT_EQ(m.speedup, m.oracle_ratio);
}

TEST(Speedup, IdenticalSizesGiveOne) {
  const auto w = sized({7, 7, 7, 7, 7, 7, 7});
  const std::vector<std::uint64_t> ranks = {1, 5, 2, 4, 3, 3, 1};
  const auto m = window_speedup(w, ranks, capacity_for(w.size(), 0.5));
  EXPECT_EQ(m.speedup, 1.0);
  EXPECT_EQ(m.oracle_ratio, 1.0);
}

TEST(Speedup, ZeroFcfsIsNan) {
  const auto w = sized({4});
  const auto m = window_speedup(w, true_count_ranks(w), 0);
  EXPECT_EQ(m.fcfs_packets, 0u);
  EXPECT_TRUE(std::isnan(m.speedup));
  EXPECT_TRUE(std::isnan(m.oracle_ratio));
  EXPECT_THROW(window_speedup({}, {}, 0), std::invalid_argument);
}

TEST(Speedup, PerfectPredictorAndDominance) {
  const auto r = testing::check_admission(300, 5);
  EXPECT_EQ(r.windows, 300u);
  EXPECT_EQ(r.failures, 0u) << r.first_failure;
}

TEST(Capacity, Floor) {
  EXPECT_EQ(capacity_for(3247, 0.5), 1623u);
  EXPECT_EQ(capacity_for(10, 0.5), 5u);
  EXPECT_EQ(capacity_for(10, 1.0), 10u);
  EXPECT_THROW(capacity_for(10, 1.5), std::invalid_argument);
}

TEST(RunOnline, ZeroEpochsLeavesNetUnchanged) {
  tracegen::TraceConfig tc;
  tc.n_flows = 5000;
  tc.seed = 3;
  const auto trace = tracegen::generate(tc);
  ffnn::Network net = small_net(4);
  const ffnn::Network before = net;
  SimConfig cfg;
  cfg.window_size = 1000;
  cfg.test_size = 500;
  cfg.epochs = 0;
  const SimReport rep = run_online(trace, net, cfg);
  EXPECT_EQ(net, before);
  ASSERT_EQ(rep.windows.size(), 4u);
  for (const auto& m : rep.windows) EXPECT_EQ(m.accuracy, rep.windows[0].accuracy);
  EXPECT_EQ(rep.trace_size, 5000u);
  EXPECT_EQ(rep.network_dims, net.dims());
}

TEST(RunOnline, DeterministicAndPredictsBeforeTraining) {
  tracegen::TraceConfig tc;
  tc.n_flows = 4000;
  tc.seed = 8;
  const auto trace = tracegen::generate(tc);
  SimConfig cfg;
  cfg.window_size = 1000;
  cfg.test_size = 500;
  cfg.epochs = 2;
  cfg.seed = 6;
  ffnn::Network a = small_net(1);
  ffnn::Network b = small_net(1);
  const ffnn::Network initial = a;
  const SimReport ra = run_online(trace, a, cfg);
  const SimReport rb = run_online(trace, b, cfg);
  EXPECT_EQ(to_json(ra), to_json(rb));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, initial);

  // The first window is scored by the untouched network.
  const auto held = make_samples(std::span(trace).first(500), cfg.bins);
  EXPECT_EQ(ra.windows[0].accuracy, accuracy(initial, held));
  const auto w0 = std::span(trace).subspan(500, 1000);
  const auto m0 = window_speedup(w0, predicted_ranks(initial, w0), 500);
  EXPECT_EQ(ra.windows[0].nn_packets, m0.nn_packets);
  for (const auto& m : ra.windows) {
    EXPECT_LE(m.nn_packets, m.oracle_packets);
    EXPECT_LE(m.fcfs_packets, m.oracle_packets);
    EXPECT_LE(m.speedup, m.oracle_ratio);
  }
}

// A network whose outputs are all equal answers class 1 everywhere, so its
// accuracy is the class-1 share of the hold-out.
TEST(RunOnline, SymmetricNetScoresClassOneShare) {
  tracegen::TraceConfig tc;
  tc.n_flows = 3000;
  tc.seed = 12;
  const auto trace = tracegen::generate(tc);
  ffnn::Network net = small_net(2);
  for (auto& l : net.layers()) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
  }
  SimConfig cfg;
  cfg.window_size = 1000;
  cfg.test_size = 1083;
  cfg.epochs = 1;
  const SimReport rep = run_online(trace, net, cfg);
  const auto h = tracegen::class_histogram(std::span(trace).first(1083), cfg.bins);
  EXPECT_DOUBLE_EQ(rep.windows[0].accuracy, double(h[0]) / 1083.0);
  EXPECT_DOUBLE_EQ(rep.windows[0].speedup, 1.0);
}

TEST(RunOnline, TooFewRecords) {
  tracegen::TraceConfig tc;
  tc.n_flows = 1000;
  const auto trace = tracegen::generate(tc);
  ffnn::Network net = small_net(1);
  EXPECT_THROW(run_online(trace, net, SimConfig{}), std::invalid_argument);
}

WindowMetrics row(std::size_t i, double acc, std::uint64_t nn, std::uint64_t fc,
                  std::uint64_t orc) {
  WindowMetrics m;
  m.window_index = i;
  m.accuracy = acc;
  m.nn_packets = nn;
  m.fcfs_packets = fc;
  m.oracle_packets = orc;
  m.speedup = fc ? double(nn) / double(fc) : std::nan("");
  m.oracle_ratio = fc ? double(orc) / double(fc) : std::nan("");
  return m;
}

TEST(Summary, MeansOfRows) {
  const std::vector<WindowMetrics> rows = {row(0, 0.5, 20, 10, 30), row(1, 0.7, 15, 10, 20),
                                           row(2, 0.9, 10, 10, 40)};
  const Summary s = summarize(rows);
  EXPECT_DOUBLE_EQ(s.mean_speedup, (2.0 + 1.5 + 1.0) / 3);
  EXPECT_EQ(s.min_speedup, 1.0);
  EXPECT_EQ(s.max_speedup, 2.0);
  EXPECT_DOUBLE_EQ(s.mean_oracle_ratio, 3.0);
  EXPECT_DOUBLE_EQ(s.mean_accuracy, 0.7);
  EXPECT_EQ(s.final_accuracy, 0.9);
}

TEST(Summary, SkipsUndefinedSpeedups) {
  const std::vector<WindowMetrics> rows = {row(0, 0.5, 20, 10, 30), row(1, 0.1, 0, 0, 0)};
  const Summary s = summarize(rows);
  EXPECT_EQ(s.mean_speedup, 2.0);
  EXPECT_DOUBLE_EQ(s.mean_accuracy, 0.3);
}

TEST(Render, JsonRoundTripAndCsv) {
  SimReport rep;
  rep.config.seed = 4;
  rep.config.bins = encoder::BinBoundaries({1, 3, 9, 27});
  rep.trace_size = 77;
  rep.network_dims = {16, 5};
  rep.windows = {row(0, 0.25, 20, 10, 30), row(1, 0.5, 0, 0, 0)};
  rep.summary = summarize(rep.windows);
  const std::string json = to_json(rep);
  EXPECT_NE(json.find("null"), std::string::npos);
  const SimReport back = from_json(json);
  EXPECT_EQ(back, rep);
  EXPECT_EQ(to_json(back), json);

  std::ostringstream csv;
  write_report_csv(rep, csv);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, kReportCsvHeader);
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 2u);

  const std::string table = to_table(rep);
  EXPECT_NE(table.find("mean"), std::string::npos);
}

TEST(Render, OneWindowOneRow) {
  SimReport rep;
  rep.windows = {row(0, 1.0, 5, 5, 5)};
  rep.summary = summarize(rep.windows);
  std::ostringstream csv;
  write_report_csv(rep, csv);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_THROW(from_json("{\"windows\": 3}"), std::exception);
}

}  // namespace
}  // namespace flowpredict::sim

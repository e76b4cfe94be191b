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

// Synthetic flow traces and the CSV trace format.
//
// Each flow's size class is drawn from a class mix. With probability
// `signal_strength` the flow's (dst_port, proto) comes from a small signature
// set owned by that class; otherwise both are uniform noise. Every other header
// field is independent of the class.

#ifndef FLOWPREDICT_TRACEGEN_H_
#define FLOWPREDICT_TRACEGEN_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowpredict/encoder.h"
#include "flowpredict/ofwire.h"

namespace flowpredict::tracegen {

struct FlowRecord {
  ofwire::FirstPacket first;
  std::uint64_t packet_count = 1;
  std::uint64_t byte_count = 20;
  std::uint64_t duration_ms = 0;

  bool operator==(const FlowRecord&) const = default;
};

// packet_count >= 1, byte_count >= max(first_len, 20 * packet_count),
// first_len >= 20.
bool valid(const FlowRecord& r);

struct PortSignature {
  std::uint16_t dst_port;
  std::uint8_t proto;
  bool operator==(const PortSignature&) const = default;
};

struct SizeRange {
  std::uint64_t min_packets;
  std::uint64_t max_packets;
  bool operator==(const SizeRange&) const = default;
};

struct TraceConfig {
  std::uint64_t n_flows = 100000;
  std::uint64_t seed = 0;
  // Mostly one-shot flows, a few percent elephants.
  std::array<double, encoder::kNumClasses> class_mix = {0.640, 0.300, 0.020, 0.012, 0.028};
  double signal_strength = 0.95;
  std::array<SizeRange, encoder::kNumClasses> sizes = {
      SizeRange{1, 2}, SizeRange{3, 10}, SizeRange{11, 100}, SizeRange{101, 1000},
      SizeRange{1001, 10000}};
  std::array<std::vector<PortSignature>, encoder::kNumClasses> signatures = {
      std::vector<PortSignature>{{53, 17}, {123, 17}, {161, 17}},
      std::vector<PortSignature>{{80, 6}, {25, 6}, {110, 6}},
      std::vector<PortSignature>{{443, 6}, {993, 6}},
      std::vector<PortSignature>{{22, 6}, {3389, 6}},
      std::vector<PortSignature>{{873, 6}, {5001, 6}}};
  // Sources are drawn from src_prefix/src_prefix_len, destinations likewise.
  std::uint32_t src_prefix = 0x0a000000;  // 10.0.0.0
  int src_prefix_len = 16;
  std::uint32_t dst_prefix = 0xc0a80000;  // 192.168.0.0
  int dst_prefix_len = 16;
  // Poisson arrivals.
  double arrivals_per_second = 1000.0;

  // Throws std::invalid_argument describing the first problem found.
  void validate() const;
};

// size ranges that match `bins` (class k spans (t_{k-1}, t_k]); the last class
// tops out at 10 * t4.
std::array<SizeRange, encoder::kNumClasses> sizes_for_bins(const encoder::BinBoundaries& bins);

std::vector<FlowRecord> generate(const TraceConfig& cfg);

// Counts per class; index k holds class k+1.
std::array<std::uint64_t, encoder::kNumClasses> class_histogram(std::span<const FlowRecord> trace,
                                                                const encoder::BinBoundaries& bins);

inline constexpr const char* kCsvHeader =
    "ts_us,src_ip,dst_ip,src_port,dst_port,proto,tos,ttl,first_len,pkt_count,byte_count,dur_ms";

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_csv(std::span<const FlowRecord> trace, std::ostream& out);
// Throws TraceFormatError with the offending line number.
std::vector<FlowRecord> read_csv(std::istream& in);

void write_csv_file(std::span<const FlowRecord> trace, const std::string& path);
std::vector<FlowRecord> read_csv_file(const std::string& path);

}  // namespace flowpredict::tracegen

#endif  // FLOWPREDICT_TRACEGEN_H_

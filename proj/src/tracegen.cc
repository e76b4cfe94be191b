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

#include "flowpredict/tracegen.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

namespace flowpredict::tracegen {

namespace {

constexpr std::array<std::uint8_t, 5> kTosChoices = {0, 0, 0, 0x10, 0xb8};
constexpr std::array<std::uint8_t, 3> kInitialTtl = {64, 128, 255};

std::uint32_t host_mask(int prefix_len) {
  return prefix_len >= 32 ? 0u : (0xffffffffu >> prefix_len);
}

}  // namespace

bool valid(const FlowRecord& r) {
  return r.packet_count >= 1 && r.first.first_len >= 20 && r.byte_count >= r.first.first_len &&
         r.byte_count >= 20 * r.packet_count;
}

void TraceConfig::validate() const {
  if (n_flows == 0) throw std::invalid_argument("n_flows must be >= 1");
  double sum = 0.0;
  for (double p : class_mix) {
    if (!(p >= 0.0)) throw std::invalid_argument("class_mix entries must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("class_mix must sum to 1");
  if (!(signal_strength >= 0.0 && signal_strength <= 1.0)) {
    throw std::invalid_argument("signal_strength must be in [0,1]");
  }
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k].min_packets < 1 || sizes[k].max_packets < sizes[k].min_packets) {
      throw std::invalid_argument("bad size range for class " + std::to_string(k + 1));
    }
    if (signatures[k].empty() && class_mix[k] > 0.0 && signal_strength > 0.0) {
      throw std::invalid_argument("class " + std::to_string(k + 1) + " has no port signature");
    }
    for (const PortSignature& s : signatures[k]) {
      if (s.proto != ofwire::kIpProtoTcp && s.proto != ofwire::kIpProtoUdp) {
        throw std::invalid_argument("signature protocols must be TCP or UDP");
      }
    }
  }
  if (src_prefix_len < 0 || src_prefix_len > 32 || dst_prefix_len < 0 || dst_prefix_len > 32) {
    throw std::invalid_argument("address prefix length must be in [0,32]");
  }
  if (!(arrivals_per_second > 0.0)) throw std::invalid_argument("arrival rate must be > 0");
}

std::array<SizeRange, encoder::kNumClasses> sizes_for_bins(const encoder::BinBoundaries& bins) {
  const auto& t = bins.thresholds();
  return {SizeRange{1, t[0]}, SizeRange{t[0] + 1, t[1]}, SizeRange{t[1] + 1, t[2]},
          SizeRange{t[2] + 1, t[3]}, SizeRange{t[3] + 1, t[3] * 10}};
}

std::vector<FlowRecord> generate(const TraceConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> gap_s(cfg.arrivals_per_second);
  std::discrete_distribution<int> class_dist(cfg.class_mix.begin(), cfg.class_mix.end());
  auto uniform_int = [&rng](std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
  };

  const std::uint32_t src_hosts = host_mask(cfg.src_prefix_len);
  const std::uint32_t dst_hosts = host_mask(cfg.dst_prefix_len);

  std::vector<FlowRecord> trace;
  trace.reserve(cfg.n_flows);
  double clock_s = 0.0;
  for (std::uint64_t n = 0; n < cfg.n_flows; ++n) {
    clock_s += gap_s(rng);
    const int cls = class_dist(rng);

    FlowRecord r;
    ofwire::FirstPacket& p = r.first;
    p.arrival_us = std::llround(clock_s * 1e6);
    if (unit(rng) < cfg.signal_strength) {
      const auto& sigs = cfg.signatures[cls];
      const PortSignature& s = sigs[uniform_int(0, sigs.size() - 1)];
      p.dst_port = s.dst_port;
      p.proto = s.proto;
    } else {
      p.dst_port = static_cast<std::uint16_t>(uniform_int(1, 65535));
      p.proto = uniform_int(0, 1) ? ofwire::kIpProtoTcp : ofwire::kIpProtoUdp;
    }
    p.src_port = static_cast<std::uint16_t>(uniform_int(1024, 65535));
    p.src_ip = (cfg.src_prefix & ~src_hosts) | (static_cast<std::uint32_t>(uniform_int(0, src_hosts)));
    p.dst_ip = (cfg.dst_prefix & ~dst_hosts) | (static_cast<std::uint32_t>(uniform_int(0, dst_hosts)));
    p.tos = kTosChoices[uniform_int(0, kTosChoices.size() - 1)];
    p.ttl = static_cast<std::uint8_t>(kInitialTtl[uniform_int(0, kInitialTtl.size() - 1)] -
                                      uniform_int(0, 20));
    p.first_len = static_cast<std::uint16_t>(uniform_int(40, 1500));

    // Log-uniform packet count within the class range.
    const SizeRange range = cfg.sizes[cls];
    const double lo = std::log(static_cast<double>(range.min_packets));
    const double hi = std::log(static_cast<double>(range.max_packets) + 1.0);
    const double draw = std::exp(lo + (hi - lo) * unit(rng));
    r.packet_count = std::clamp<std::uint64_t>(static_cast<std::uint64_t>(draw), range.min_packets,
                                               range.max_packets);

    const std::uint64_t mean_len = uniform_int(40, 1500);
    r.byte_count = p.first_len + (r.packet_count - 1) * mean_len;
    const std::uint64_t spacing_ms = uniform_int(1, 50);
    r.duration_ms = (r.packet_count - 1) * spacing_ms;
    trace.push_back(r);
  }
  return trace;
}

std::array<std::uint64_t, encoder::kNumClasses> class_histogram(std::span<const FlowRecord> trace,
                                                                const encoder::BinBoundaries& bins) {
  std::array<std::uint64_t, encoder::kNumClasses> counts{};
  for (const FlowRecord& r : trace) ++counts[encoder::label(r.packet_count, bins).index()];
  return counts;
}

void write_csv(std::span<const FlowRecord> trace, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const FlowRecord& r : trace) {
    const ofwire::FirstPacket& p = r.first;
    out << p.arrival_us << ',' << ofwire::ipv4_to_string(p.src_ip) << ','
        << ofwire::ipv4_to_string(p.dst_ip) << ',' << p.src_port << ',' << p.dst_port << ','
        << unsigned{p.proto} << ',' << unsigned{p.tos} << ',' << unsigned{p.ttl} << ','
        << p.first_len << ',' << r.packet_count << ',' << r.byte_count << ',' << r.duration_ms
        << '\n';
  }
}

namespace {

template <typename T>
T parse_field(const std::string& text, std::size_t line, const char* name) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || text.empty() || v > std::numeric_limits<T>::max()) {
    throw TraceFormatError("line " + std::to_string(line) + ": bad " + name + " '" + text + "'");
  }
  return static_cast<T>(v);
}

}  // namespace

std::vector<FlowRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw TraceFormatError("empty trace file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw TraceFormatError("line 1: unexpected header '" + line + "'");

  std::vector<FlowRecord> trace;
  std::size_t lineno = 1;
  std::vector<std::string> fields;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fields.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 12) {
      throw TraceFormatError("line " + std::to_string(lineno) + ": expected 12 fields, got " +
                             std::to_string(fields.size()));
    }
    FlowRecord r;
    ofwire::FirstPacket& p = r.first;
    p.arrival_us = parse_field<std::int64_t>(fields[0], lineno, "ts_us");
    try {
      p.src_ip = ofwire::parse_ipv4(fields[1]);
      p.dst_ip = ofwire::parse_ipv4(fields[2]);
    } catch (const std::invalid_argument& e) {
      throw TraceFormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
    p.src_port = parse_field<std::uint16_t>(fields[3], lineno, "src_port");
    p.dst_port = parse_field<std::uint16_t>(fields[4], lineno, "dst_port");
    p.proto = parse_field<std::uint8_t>(fields[5], lineno, "proto");
    p.tos = parse_field<std::uint8_t>(fields[6], lineno, "tos");
    p.ttl = parse_field<std::uint8_t>(fields[7], lineno, "ttl");
    p.first_len = parse_field<std::uint16_t>(fields[8], lineno, "first_len");
    r.packet_count = parse_field<std::uint64_t>(fields[9], lineno, "pkt_count");
    r.byte_count = parse_field<std::uint64_t>(fields[10], lineno, "byte_count");
    r.duration_ms = parse_field<std::uint64_t>(fields[11], lineno, "dur_ms");
    if (p.proto != ofwire::kIpProtoTcp && p.proto != ofwire::kIpProtoUdp &&
        (p.src_port != 0 || p.dst_port != 0)) {
      throw TraceFormatError("line " + std::to_string(lineno) + ": ports set on non-TCP/UDP flow");
    }
    if (!valid(r)) {
      throw TraceFormatError("line " + std::to_string(lineno) + ": record violates invariants");
    }
    trace.push_back(r);
  }
  return trace;
}

void write_csv_file(std::span<const FlowRecord> trace, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(trace, out);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<FlowRecord> read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceFormatError("cannot open '" + path + "'");
  return read_csv(in);
}

}  // namespace flowpredict::tracegen

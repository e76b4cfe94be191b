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

#include "flowpredict/encoder.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace flowpredict::encoder {

namespace {

constexpr double kByte = 255.0;
constexpr double kMaxLen = 1500.0;

double byte_at(std::uint32_t v, int shift) { return static_cast<double>((v >> shift) & 0xff) / kByte; }

}  // namespace

ClassLabel::ClassLabel(int value) : value_(value) {
  if (value < 1 || value > static_cast<int>(kNumClasses)) {
    throw EncodeError("class label " + std::to_string(value) + " outside [1,5]");
  }
}

BinBoundaries::BinBoundaries() : t_{2, 10, 100, 1000} {}

BinBoundaries::BinBoundaries(const std::array<std::uint64_t, 4>& thresholds) : t_(thresholds) {
  if (t_[0] < 1) throw EncodeError("first bin threshold must be >= 1");
  for (std::size_t i = 1; i < t_.size(); ++i) {
    if (t_[i] <= t_[i - 1]) throw EncodeError("bin thresholds must be strictly ascending");
  }
}

BinBoundaries BinBoundaries::parse(const std::string& text) {
  std::array<std::uint64_t, 4> t{};
  std::istringstream in(text);
  std::string item;
  std::size_t n = 0;
  while (std::getline(in, item, ',')) {
    if (n == t.size()) throw EncodeError("expected exactly 4 bin thresholds");
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      throw EncodeError("bad bin threshold '" + item + "'");
    }
    if (used != item.size() || item.empty() || item[0] == '-') {
      throw EncodeError("bad bin threshold '" + item + "'");
    }
    t[n++] = v;
  }
  if (n != t.size()) throw EncodeError("expected exactly 4 bin thresholds");
  return BinBoundaries(t);
}

std::string BinBoundaries::to_string() const {
  return std::to_string(t_[0]) + "," + std::to_string(t_[1]) + "," + std::to_string(t_[2]) +
         "," + std::to_string(t_[3]);
}

FeatureVector featurize(const ofwire::FirstPacket& pkt) {
  FeatureVector f{};
  for (int i = 0; i < 4; ++i) {
    f[i] = byte_at(pkt.src_ip, 24 - 8 * i);
    f[4 + i] = byte_at(pkt.dst_ip, 24 - 8 * i);
  }
  f[8] = byte_at(pkt.src_port, 8);
  f[9] = byte_at(pkt.src_port, 0);
  f[10] = byte_at(pkt.dst_port, 8);
  f[11] = byte_at(pkt.dst_port, 0);
  f[12] = pkt.proto / kByte;
  f[13] = pkt.tos / kByte;
  f[14] = std::min<double>(pkt.first_len, kMaxLen) / kMaxLen;
  f[15] = pkt.ttl / kByte;
  return f;
}

ClassLabel label(std::uint64_t packet_count, const BinBoundaries& bins) {
  if (packet_count < 1) throw EncodeError("packet count must be >= 1");
  const auto& t = bins.thresholds();
  int c = 1;
  for (std::uint64_t edge : t) {
    if (packet_count <= edge) return ClassLabel(c);
    ++c;
  }
  return ClassLabel(c);
}

OneHot one_hot(ClassLabel c) {
  OneHot v{};
  v[c.index()] = 1.0;
  return v;
}

ClassLabel decode_one_hot(std::span<const double> outputs) {
  if (outputs.size() != kNumClasses) {
    throw EncodeError("expected 5 outputs, got " + std::to_string(outputs.size()));
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (!std::isfinite(outputs[i])) throw EncodeError("non-finite network output");
    if (outputs[i] > outputs[best]) best = i;
  }
  return ClassLabel(static_cast<int>(best) + 1);
}

}  // namespace flowpredict::encoder

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

// First-packet features, packet-count classes and one-hot coding.

#ifndef FLOWPREDICT_ENCODER_H_
#define FLOWPREDICT_ENCODER_H_

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "flowpredict/ofwire.h"

namespace flowpredict::encoder {

inline constexpr std::size_t kNumFeatures = 16;
inline constexpr std::size_t kNumClasses = 5;

// Layout, each component scaled into [0,1]:
//   [0..3]   source IPv4 octets / 255
//   [4..7]   destination IPv4 octets / 255
//   [8..9]   source port high, low byte / 255
//   [10..11] destination port high, low byte / 255
//   [12] proto / 255   [13] tos / 255
//   [14] min(first_len, 1500) / 1500   [15] ttl / 255
using FeatureVector = std::array<double, kNumFeatures>;
using OneHot = std::array<double, kNumClasses>;

class EncodeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Importance class 1 (lowest) .. 5 (highest).
class ClassLabel {
 public:
  // Throws EncodeError outside [1,5].
  explicit ClassLabel(int value);

  int value() const { return value_; }
  std::size_t index() const { return static_cast<std::size_t>(value_ - 1); }

  auto operator<=>(const ClassLabel&) const = default;

 private:
  int value_;
};

// Inclusive upper bounds of classes 1..4; anything above the last is class 5.
class BinBoundaries {
 public:
  // (2, 10, 100, 1000)
  BinBoundaries();
  // Throws EncodeError unless 1 <= t1 < t2 < t3 < t4.
  explicit BinBoundaries(const std::array<std::uint64_t, 4>& thresholds);

  // Parses "t1,t2,t3,t4".
  static BinBoundaries parse(const std::string& text);

  const std::array<std::uint64_t, 4>& thresholds() const { return t_; }
  std::string to_string() const;

  bool operator==(const BinBoundaries&) const = default;

 private:
  std::array<std::uint64_t, 4> t_;
};

FeatureVector featurize(const ofwire::FirstPacket& pkt);

// Throws EncodeError for packet_count < 1.
ClassLabel label(std::uint64_t packet_count, const BinBoundaries& bins = {});

OneHot one_hot(ClassLabel c);

// argmax + 1, ties toward the lowest index. Throws EncodeError on a non-finite
// component or a size other than 5.
ClassLabel decode_one_hot(std::span<const double> outputs);

}  // namespace flowpredict::encoder

#endif  // FLOWPREDICT_ENCODER_H_

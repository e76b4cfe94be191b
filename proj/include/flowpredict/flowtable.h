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

// Single flow table with priority matching, counters, idle/hard timeouts and
// importance-ordered eviction when full.
//
// Time is always passed in by the caller; the table never reads a clock.
// Not internally synchronized.

#ifndef FLOWPREDICT_FLOWTABLE_H_
#define FLOWPREDICT_FLOWTABLE_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "flowpredict/ofwire.h"

namespace flowpredict::flowtable {

// Monotonic simulation time since an arbitrary epoch.
using Timestamp = std::chrono::microseconds;

inline constexpr std::uint16_t kMinImportance = 1;
inline constexpr std::uint16_t kMaxImportance = 5;

struct FlowEntry {
  ofwire::MatchFields match;
  std::uint16_t priority = 0;
  std::uint64_t cookie = 0;
  std::uint16_t importance = kMinImportance;
  std::uint16_t idle_timeout_s = 0;  // 0 disables
  std::uint16_t hard_timeout_s = 0;  // 0 disables
  bool send_flow_rem = false;
  std::uint32_t output_port = 0;
  std::uint64_t packet_count = 0;
  std::uint64_t byte_count = 0;
  Timestamp installed_at{0};
  Timestamp last_matched_at{0};

  bool operator==(const FlowEntry&) const = default;
};

enum class RemovalReason { kIdleTimeout, kHardTimeout, kEvicted, kDeleted };

const char* to_string(RemovalReason reason);
ofwire::FlowRemovedReason to_wire(RemovalReason reason);

struct RemovalEvent {
  FlowEntry entry;
  RemovalReason reason = RemovalReason::kDeleted;
  std::uint32_t duration_s = 0;
  std::uint32_t duration_ns = 0;

  bool operator==(const RemovalEvent&) const = default;
};

enum class TableErrc { kDuplicateCookie, kUnknownCookie, kInvalidEntry };

class TableError : public std::runtime_error {
 public:
  TableError(TableErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  TableErrc code() const noexcept { return code_; }

 private:
  TableErrc code_;
};

struct Matched {
  std::uint64_t cookie = 0;
  bool operator==(const Matched&) const = default;
};

// Result of match_packet(); nullopt is a table miss.
using MatchResult = std::optional<Matched>;

// True iff every present field of `match` equals the packet's value.
bool matches(const ofwire::MatchFields& match, const ofwire::FirstPacket& pkt,
             std::uint32_t in_port);

class FlowTable {
 public:
  // Throws std::invalid_argument for capacity 0.
  explicit FlowTable(std::size_t capacity);

  // Installs `entry` at time `now`: installed_at and last_matched_at are set
  // to `now` and counters reset. When the table is full, exactly one victim
  // (lowest importance, oldest installation) is removed first and returned.
  std::optional<RemovalEvent> insert(FlowEntry entry, Timestamp now);

  // Highest-priority matching entry; equal priorities go to the earlier
  // insertion. Updates the winner's counters.
  MatchResult match_packet(const ofwire::FirstPacket& pkt, std::uint32_t in_port,
                           Timestamp now);

  // Expires entries whose hard or idle timeout has elapsed. Events come out in
  // insertion order; a hard timeout wins when both have elapsed.
  std::vector<RemovalEvent> tick(Timestamp now);

  RemovalEvent remove(std::uint64_t cookie, Timestamp now);

  const FlowEntry* find(std::uint64_t cookie) const;
  std::size_t size() const { return by_cookie_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return size() >= capacity_; }

  // Live entries in match order (priority desc, insertion asc).
  std::vector<const FlowEntry*> entries() const;

 private:
  struct Slot {
    FlowEntry entry;
    std::uint64_t seq = 0;
  };
  // (priority desc, seq asc)
  struct MatchKey {
    std::uint16_t priority;
    std::uint64_t seq;
    bool operator<(const MatchKey& o) const {
      if (priority != o.priority) return priority > o.priority;
      return seq < o.seq;
    }
  };
  // (importance asc, installed_at asc, seq asc)
  struct EvictKey {
    std::uint16_t importance;
    Timestamp installed_at;
    std::uint64_t seq;
    auto operator<=>(const EvictKey&) const = default;
  };

  RemovalEvent take(std::uint64_t cookie, RemovalReason reason, Timestamp now);

  std::size_t capacity_;
  std::uint64_t next_seq_ = 0;
  std::unordered_map<std::uint64_t, Slot> by_cookie_;
  std::map<MatchKey, std::uint64_t> match_order_;
  std::set<std::pair<EvictKey, std::uint64_t>> evict_order_;
  std::map<std::uint64_t, std::uint64_t> by_seq_;  // seq -> cookie
};

}  // namespace flowpredict::flowtable

#endif  // FLOWPREDICT_FLOWTABLE_H_

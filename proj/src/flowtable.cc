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

#include "flowpredict/flowtable.h"

#include <string>

namespace flowpredict::flowtable {

namespace {

using std::chrono::seconds;

bool elapsed(Timestamp now, Timestamp since, std::uint16_t timeout_s) {
  return timeout_s > 0 && now - since >= seconds(timeout_s);
}

}  // namespace

const char* to_string(RemovalReason reason) {
  switch (reason) {
    case RemovalReason::kIdleTimeout: return "idle_timeout";
    case RemovalReason::kHardTimeout: return "hard_timeout";
    case RemovalReason::kEvicted: return "evicted";
    case RemovalReason::kDeleted: return "deleted";
  }
  return "?";
}

ofwire::FlowRemovedReason to_wire(RemovalReason reason) {
  switch (reason) {
    case RemovalReason::kIdleTimeout: return ofwire::FlowRemovedReason::kIdleTimeout;
    case RemovalReason::kHardTimeout: return ofwire::FlowRemovedReason::kHardTimeout;
    case RemovalReason::kEvicted: return ofwire::FlowRemovedReason::kEviction;
    case RemovalReason::kDeleted: return ofwire::FlowRemovedReason::kDelete;
  }
  return ofwire::FlowRemovedReason::kDelete;
}

bool matches(const ofwire::MatchFields& m, const ofwire::FirstPacket& pkt,
             std::uint32_t in_port) {
  if (m.in_port && *m.in_port != in_port) return false;
  // A FirstPacket is always IPv4.
  if (m.eth_type && *m.eth_type != ofwire::kEthTypeIpv4) return false;
  if (m.ipv4_src && *m.ipv4_src != pkt.src_ip) return false;
  if (m.ipv4_dst && *m.ipv4_dst != pkt.dst_ip) return false;
  if (m.ip_proto && *m.ip_proto != pkt.proto) return false;
  if (m.l4_src && *m.l4_src != pkt.src_port) return false;
  if (m.l4_dst && *m.l4_dst != pkt.dst_port) return false;
  return true;
}

FlowTable::FlowTable(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("flow table capacity must be >= 1");
}

std::optional<RemovalEvent> FlowTable::insert(FlowEntry entry, Timestamp now) {
  if (by_cookie_.contains(entry.cookie)) {
    throw TableError(TableErrc::kDuplicateCookie,
                     "cookie " + std::to_string(entry.cookie) + " already installed");
  }
  if (entry.importance < kMinImportance || entry.importance > kMaxImportance) {
    throw TableError(TableErrc::kInvalidEntry,
                     "importance " + std::to_string(entry.importance) + " outside [1,5]");
  }

  std::optional<RemovalEvent> victim;
  if (full()) {
    const std::uint64_t cookie = evict_order_.begin()->second;
    victim = take(cookie, RemovalReason::kEvicted, now);
  }

  entry.installed_at = now;
  entry.last_matched_at = now;
  entry.packet_count = 0;
  entry.byte_count = 0;
  const std::uint64_t seq = next_seq_++;
  match_order_.emplace(MatchKey{entry.priority, seq}, entry.cookie);
  evict_order_.emplace(EvictKey{entry.importance, now, seq}, entry.cookie);
  by_seq_.emplace(seq, entry.cookie);
  const std::uint64_t cookie = entry.cookie;
  by_cookie_.emplace(cookie, Slot{std::move(entry), seq});
  return victim;
}

MatchResult FlowTable::match_packet(const ofwire::FirstPacket& pkt, std::uint32_t in_port,
                                    Timestamp now) {
  for (const auto& [key, cookie] : match_order_) {
    Slot& slot = by_cookie_.at(cookie);
    if (!matches(slot.entry.match, pkt, in_port)) continue;
    slot.entry.packet_count += 1;
    slot.entry.byte_count += pkt.first_len;
    slot.entry.last_matched_at = now;
    return Matched{cookie};
  }
  return std::nullopt;
}

std::vector<RemovalEvent> FlowTable::tick(Timestamp now) {
  std::vector<std::pair<std::uint64_t, RemovalReason>> expired;
  for (const auto& [seq, cookie] : by_seq_) {
    const FlowEntry& e = by_cookie_.at(cookie).entry;
    if (elapsed(now, e.installed_at, e.hard_timeout_s)) {
      expired.emplace_back(cookie, RemovalReason::kHardTimeout);
    } else if (elapsed(now, e.last_matched_at, e.idle_timeout_s)) {
      expired.emplace_back(cookie, RemovalReason::kIdleTimeout);
    }
  }
  std::vector<RemovalEvent> events;
  events.reserve(expired.size());
  for (const auto& [cookie, reason] : expired) events.push_back(take(cookie, reason, now));
  return events;
}

RemovalEvent FlowTable::remove(std::uint64_t cookie, Timestamp now) {
  if (!by_cookie_.contains(cookie)) {
    throw TableError(TableErrc::kUnknownCookie,
                     "cookie " + std::to_string(cookie) + " not installed");
  }
  return take(cookie, RemovalReason::kDeleted, now);
}

const FlowEntry* FlowTable::find(std::uint64_t cookie) const {
  auto it = by_cookie_.find(cookie);
  return it == by_cookie_.end() ? nullptr : &it->second.entry;
}

std::vector<const FlowEntry*> FlowTable::entries() const {
  std::vector<const FlowEntry*> out;
  out.reserve(match_order_.size());
  for (const auto& [key, cookie] : match_order_) out.push_back(&by_cookie_.at(cookie).entry);
  return out;
}

RemovalEvent FlowTable::take(std::uint64_t cookie, RemovalReason reason, Timestamp now) {
  auto node = by_cookie_.extract(cookie);
  Slot& slot = node.mapped();
  match_order_.erase(MatchKey{slot.entry.priority, slot.seq});
  evict_order_.erase({EvictKey{slot.entry.importance, slot.entry.installed_at, slot.seq}, cookie});
  by_seq_.erase(slot.seq);

  RemovalEvent ev;
  ev.reason = reason;
  const auto lifetime = now - slot.entry.installed_at;
  const auto whole = std::chrono::duration_cast<seconds>(lifetime);
  ev.duration_s = static_cast<std::uint32_t>(whole.count());
  ev.duration_ns = static_cast<std::uint32_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(lifetime - whole).count());
  ev.entry = std::move(slot.entry);
  return ev;
}

}  // namespace flowpredict::flowtable

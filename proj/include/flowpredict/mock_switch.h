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

// Trace-driven switch emulator. It replays FlowRecords on a simulated clock:
// each record becomes a PACKET_IN, the controller's FLOW_MOD is installed in a
// local FlowTable, and the entry is reported back in FLOW_REMOVED with the
// record's true counters once its duration has elapsed (or when it is
// evicted).

#ifndef FLOWPREDICT_MOCK_SWITCH_H_
#define FLOWPREDICT_MOCK_SWITCH_H_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowpredict/controller.h"
#include "flowpredict/ofwire.h"
#include "flowpredict/tracegen.h"

namespace flowpredict::controller {

class ChannelClosed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Switch-side view of an OpenFlow connection.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(const ofwire::OfMessage& msg) = 0;
  // Next message from the controller. Throws ChannelClosed.
  virtual ofwire::OfMessage receive() = 0;
};

// Throws std::system_error if the controller is unreachable.
std::unique_ptr<Channel> connect_tcp(const std::string& host, std::uint16_t port);

// Feeds a ControllerCore directly. Every message still goes through
// encode/decode so the bytes match a TCP run.
class LoopbackChannel : public Channel {
 public:
  explicit LoopbackChannel(ControllerCore& core);
  void send(const ofwire::OfMessage& msg) override;
  ofwire::OfMessage receive() override;

 private:
  ControllerCore& core_;
  std::deque<ofwire::OfMessage> inbox_;
};

struct MockSwitchConfig {
  std::size_t table_capacity = 4096;
  std::uint32_t in_port = 1;
};

struct MockReport {
  bool completed = false;
  std::string error;  // set when the run aborted
  std::uint64_t packet_ins_sent = 0;
  std::uint64_t flow_mods_received = 0;
  std::uint64_t flows_installed = 0;
  std::uint64_t install_failures = 0;
  std::uint64_t flow_removed_sent = 0;
  std::uint64_t expirations = 0;
  std::uint64_t evictions = 0;
  std::uint64_t errors_received = 0;
  // Importance of each eviction victim, in eviction order.
  std::vector<std::uint16_t> evicted_importance;
};

// One line per message: "<dir> <TYPE> xid=<n> <hex>", dir "s>c" or "c>s".
using Transcript = std::vector<std::string>;

// Replays `trace` (assumed in arrival order) against the controller behind
// `channel`. Never throws for channel failures; they end the run with
// completed == false.
MockReport run_mock_switch(Channel& channel, std::span<const tracegen::FlowRecord> trace,
                           const MockSwitchConfig& cfg = {}, Transcript* transcript = nullptr);

// FNV-1a 64 over the transcript lines (newline-terminated).
std::uint64_t transcript_digest(const Transcript& transcript);

}  // namespace flowpredict::controller

#endif  // FLOWPREDICT_MOCK_SWITCH_H_

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

// Reactive OpenFlow controller that classifies new flows on PACKET_IN,
// installs them with the predicted importance, and learns from the packet
// counts reported in FLOW_REMOVED.
//
// ControllerCore holds all protocol state and does no I/O. Controller runs it
// behind a single-threaded poll() loop, so every connection's events are
// applied in one serialized order.

#ifndef FLOWPREDICT_CONTROLLER_H_
#define FLOWPREDICT_CONTROLLER_H_

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "flowpredict/encoder.h"
#include "flowpredict/ffnn.h"
#include "flowpredict/flowtable.h"
#include "flowpredict/ofwire.h"

namespace flowpredict::controller {

using flowtable::Timestamp;

struct ControllerConfig {
  std::string listen_host = "127.0.0.1";
  std::uint16_t listen_port = ofwire::kDefaultTcpPort;  // 0 picks an ephemeral port
  std::uint16_t idle_timeout_s = 10;
  std::uint16_t hard_timeout_s = 30;
  std::uint16_t flow_priority = 10000;
  encoder::BinBoundaries bins;
  // Train one epoch on the queued samples after this many removals.
  std::size_t train_trigger = 256;
  // Written on shutdown when non-empty.
  std::string model_path;
  std::vector<std::uint32_t> output_ports = {1, 2};
  std::uint64_t seed = 0;

  // Throws std::invalid_argument.
  void validate() const;
};

struct PendingFlow {
  std::uint64_t cookie = 0;
  ofwire::FirstPacket packet;
  encoder::FeatureVector features{};
  encoder::ClassLabel predicted{1};
  Timestamp installed_at{0};
};

struct ControllerStats {
  std::uint64_t packet_ins = 0;
  std::uint64_t flow_mods = 0;
  std::uint64_t flows_created = 0;
  std::uint64_t flow_removed = 0;
  std::uint64_t unknown_cookies = 0;
  std::uint64_t malformed_frames = 0;
  std::uint64_t samples_total = 0;
  std::uint64_t train_flushes = 0;
  std::uint64_t errors_sent = 0;
  std::uint64_t errors_received = 0;

  bool operator==(const ControllerStats&) const = default;
};

// The learning side of the controller, kept behind a narrow interface
// (predict / submit / flush) so it could live in another process.
class Trainer {
 public:
  Trainer(ffnn::Network net, std::uint64_t seed);

  encoder::ClassLabel predict(const encoder::FeatureVector& features) const;
  void submit(ffnn::Sample sample);
  // One epoch over the queue, then clears it. nullopt when the queue is empty;
  // otherwise the epoch's mean loss.
  std::optional<double> flush();

  std::size_t queued() const { return queue_.size(); }
  const std::vector<ffnn::Sample>& queue() const { return queue_; }
  const ffnn::Network& network() const { return net_; }

 private:
  ffnn::Network net_;
  std::vector<ffnn::Sample> queue_;
  std::mt19937_64 seeds_;
};

// One JSON object per line.
class EventLog {
 public:
  explicit EventLog(std::ostream* out = nullptr) : out_(out) {}
  void write(const std::string& json_line);
  bool enabled() const { return out_ != nullptr; }

 private:
  std::ostream* out_;
};

class ControllerCore {
 public:
  ControllerCore(ControllerConfig cfg, ffnn::Network net, EventLog log = EventLog{});

  // Messages to send when a switch connects.
  std::vector<ofwire::OfMessage> on_connect();
  // Replies to one decoded message from the switch.
  std::vector<ofwire::OfMessage> handle(const ofwire::OfMessage& msg, Timestamp now);
  // Reply to a message that failed to decode. `raw` holds the message bytes
  // (the first 64 are echoed back in the ERROR data).
  ofwire::OfMessage protocol_error(const ofwire::WireError& error, ofwire::ByteView raw);
  // Trains on any leftover samples and writes the checkpoint if configured.
  void shutdown();

  const ControllerStats& stats() const { return stats_; }
  const Trainer& trainer() const { return trainer_; }
  const std::map<std::uint64_t, PendingFlow>& pending() const { return pending_; }
  const ControllerConfig& config() const { return cfg_; }

  // Deterministic egress port for a 5-tuple.
  std::uint32_t output_port_for(const ofwire::FirstPacket& pkt) const;

 private:
  std::vector<ofwire::OfMessage> on_packet_in(std::uint32_t xid, const ofwire::PacketIn& p,
                                              Timestamp now);
  void on_flow_removed(const ofwire::FlowRemoved& r);
  void flush_training();

  ControllerConfig cfg_;
  Trainer trainer_;
  EventLog log_;
  ControllerStats stats_;
  std::map<std::uint64_t, PendingFlow> pending_;
  std::uint64_t next_cookie_ = 1;
  std::uint32_t next_xid_ = 1;
  std::uint64_t removals_since_flush_ = 0;
};

// TCP front end for ControllerCore.
class Controller {
 public:
  Controller(ControllerConfig cfg, ffnn::Network net, EventLog log = EventLog{});
  ~Controller();
  Controller(const Controller&) = delete;
  Controller& operator=(const Controller&) = delete;

  // Binds and listens; returns the bound port. Throws std::system_error.
  std::uint16_t bind();
  // Serves until `stop` becomes true (or, with `once`, until the first switch
  // to connect has disconnected), then calls ControllerCore::shutdown().
  void run(const std::atomic<bool>& stop, bool once = false);

  const ControllerCore& core() const { return core_; }

 private:
  struct Impl;
  ControllerCore core_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace flowpredict::controller

#endif  // FLOWPREDICT_CONTROLLER_H_

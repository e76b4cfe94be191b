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

#include "flowpredict/mock_switch.h"

#include <array>
#include <functional>
#include <queue>
#include <system_error>
#include <unordered_map>
#include <utility>

#include "flowpredict/flowtable.h"
#include "net_io.h"

namespace flowpredict::controller {

namespace {

using ofwire::OfMessage;

class TcpChannel : public Channel {
 public:
  explicit TcpChannel(net::UniqueFd fd) : fd_(std::move(fd)) {}

  void send(const OfMessage& msg) override {
    try {
      net::send_all(fd_.get(), ofwire::encode_message(msg));
    } catch (const std::system_error& e) {
      throw ChannelClosed(e.what());
    }
  }

  OfMessage receive() override {
    std::array<std::uint8_t, 64 * 1024> chunk{};
    for (;;) {
      const std::optional<std::size_t> len = ofwire::peek_message_length(buf_);
      if (len && buf_.size() >= *len) {
        ofwire::Decoded d = ofwire::decode_message(buf_);
        buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(d.consumed));
        return std::move(d.message);
      }
      std::size_t n = 0;
      try {
        n = net::recv_some(fd_.get(), chunk);
      } catch (const std::system_error& e) {
        throw ChannelClosed(e.what());
      }
      if (n == 0) throw ChannelClosed("controller closed the connection");
      buf_.insert(buf_.end(), chunk.begin(), chunk.begin() + static_cast<std::ptrdiff_t>(n));
    }
  }

 private:
  net::UniqueFd fd_;
  ofwire::Bytes buf_;
};

OfMessage wire_copy(const OfMessage& msg) {
  return ofwire::decode_message(ofwire::encode_message(msg)).message;
}

std::string transcript_line(const char* dir, const OfMessage& msg) {
  return std::string(dir) + " " + ofwire::to_string(msg.type()) +
         " xid=" + std::to_string(msg.xid) + " " + ofwire::to_hex(ofwire::encode_message(msg));
}

using flowtable::Timestamp;

class MockSwitch {
 public:
  MockSwitch(Channel& ch, std::span<const tracegen::FlowRecord> trace, const MockSwitchConfig& cfg,
             Transcript* transcript)
      : ch_(ch), trace_(trace), cfg_(cfg), transcript_(transcript), table_(cfg.table_capacity) {}

  MockReport run() {
    try {
      handshake();
      for (std::size_t i = 0; i < trace_.size(); ++i) {
        const Timestamp now{trace_[i].first.arrival_us};
        expire_until(now);
        packet_in(i);
        barrier(i);
      }
      expire_until(Timestamp::max());
      barrier(kNoRecord);
      report_.completed = true;
    } catch (const ChannelClosed& e) {
      report_.error = e.what();
    } catch (const ofwire::WireError& e) {
      report_.error = std::string("undecodable message from controller: ") + e.what();
    }
    return report_;
  }

 private:
  static constexpr std::size_t kNoRecord = static_cast<std::size_t>(-1);

  struct Scheduled {
    std::int64_t end_us;
    std::uint64_t cookie;
    bool operator>(const Scheduled& o) const {
      return end_us != o.end_us ? end_us > o.end_us : cookie > o.cookie;
    }
  };

  void send(const OfMessage& msg) {
    if (transcript_) transcript_->push_back(transcript_line("s>c", msg));
    ch_.send(msg);
  }

  OfMessage receive() {
    OfMessage msg = ch_.receive();
    if (transcript_) transcript_->push_back(transcript_line("c>s", msg));
    return msg;
  }

  void handshake() {
    send(OfMessage{next_xid_++, ofwire::Hello{}});
    for (;;) {
      const OfMessage m = receive();
      if (m.type() == ofwire::MsgType::kHello) return;
      dispatch(m, kNoRecord);
    }
  }

  void packet_in(std::size_t i) {
    const ofwire::FirstPacket& pkt = trace_[i].first;
    ofwire::PacketIn p;
    p.buffer_id = ofwire::kNoBuffer;
    p.total_len = static_cast<std::uint16_t>(std::min<std::uint32_t>(14u + pkt.first_len, 0xffff));
    p.reason = ofwire::PacketInReason::kApplyAction;
    p.table_id = 0;
    p.match.in_port = cfg_.in_port;
    p.frame = ofwire::build_frame(pkt);
    send(OfMessage{next_xid_++, std::move(p)});
    ++report_.packet_ins_sent;
  }

  // ECHO round trip: the reply proves every earlier message was handled.
  void barrier(std::size_t record) {
    const std::uint32_t xid = next_xid_++;
    send(OfMessage{xid, ofwire::EchoRequest{}});
    for (;;) {
      const OfMessage m = receive();
      if (m.type() == ofwire::MsgType::kEchoReply && m.xid == xid) return;
      dispatch(m, record);
    }
  }

  void dispatch(const OfMessage& m, std::size_t record) {
    if (const auto* mod = std::get_if<ofwire::FlowMod>(&m.body)) {
      ++report_.flow_mods_received;
      install(*mod, record);
    } else if (const auto* req = std::get_if<ofwire::EchoRequest>(&m.body)) {
      send(OfMessage{m.xid, ofwire::EchoReply{req->payload}});
    } else if (std::holds_alternative<ofwire::Error>(m.body)) {
      ++report_.errors_received;
    }
  }

  void install(const ofwire::FlowMod& mod, std::size_t record) {
    if (record == kNoRecord) {
      ++report_.install_failures;
      return;
    }
    const Timestamp now{trace_[record].first.arrival_us};
    flowtable::FlowEntry e;
    e.match = mod.match;
    e.priority = mod.priority;
    e.cookie = mod.cookie;
    e.importance = mod.importance;
    e.idle_timeout_s = mod.idle_timeout_s;
    e.hard_timeout_s = mod.hard_timeout_s;
    e.send_flow_rem = (mod.flags & ofwire::kFlagSendFlowRem) != 0;
    e.output_port = mod.output_port;
    std::optional<flowtable::RemovalEvent> victim;
    try {
      victim = table_.insert(e, now);
    } catch (const flowtable::TableError&) {
      ++report_.install_failures;
      return;
    }
    ++report_.flows_installed;
    record_of_[mod.cookie] = record;
    const auto& r = trace_[record];
    schedule_.push({r.first.arrival_us + static_cast<std::int64_t>(r.duration_ms) * 1000,
                    mod.cookie});
    if (victim) {
      ++report_.evictions;
      report_.evicted_importance.push_back(victim->entry.importance);
      flow_removed(*victim, ofwire::FlowRemovedReason::kEviction);
    }
  }

  void expire_until(Timestamp now) {
    while (!schedule_.empty() && Timestamp{schedule_.top().end_us} <= now) {
      const Scheduled s = schedule_.top();
      schedule_.pop();
      if (table_.find(s.cookie) == nullptr) continue;  // already evicted
      ++report_.expirations;
      flow_removed(table_.remove(s.cookie, Timestamp{s.end_us}),
                   ofwire::FlowRemovedReason::kIdleTimeout);
    }
  }

  void flow_removed(const flowtable::RemovalEvent& ev, ofwire::FlowRemovedReason reason) {
    const auto it = record_of_.find(ev.entry.cookie);
    const tracegen::FlowRecord& r = trace_[it->second];
    record_of_.erase(it);
    if (!ev.entry.send_flow_rem) return;
    ofwire::FlowRemoved m;
    m.cookie = ev.entry.cookie;
    m.priority = ev.entry.priority;
    m.reason = reason;
    m.table_id = 0;
    m.duration_s = ev.duration_s;
    m.duration_ns = ev.duration_ns;
    m.idle_timeout_s = ev.entry.idle_timeout_s;
    m.hard_timeout_s = ev.entry.hard_timeout_s;
    m.packet_count = r.packet_count;
    m.byte_count = r.byte_count;
    m.match = ev.entry.match;
    send(OfMessage{next_xid_++, std::move(m)});
    ++report_.flow_removed_sent;
  }

  Channel& ch_;
  std::span<const tracegen::FlowRecord> trace_;
  MockSwitchConfig cfg_;
  Transcript* transcript_;
  flowtable::FlowTable table_;
  std::priority_queue<Scheduled, std::vector<Scheduled>, std::greater<>> schedule_;
  std::unordered_map<std::uint64_t, std::size_t> record_of_;
  std::uint32_t next_xid_ = 1;
  MockReport report_;
};

}  // namespace

std::unique_ptr<Channel> connect_tcp(const std::string& host, std::uint16_t port) {
  return std::make_unique<TcpChannel>(net::connect_tcp(host, port));
}

LoopbackChannel::LoopbackChannel(ControllerCore& core) : core_(core) {
  for (const OfMessage& m : core_.on_connect()) inbox_.push_back(wire_copy(m));
}

void LoopbackChannel::send(const OfMessage& msg) {
  const ofwire::Bytes bytes = ofwire::encode_message(msg);
  std::vector<OfMessage> replies;
  try {
    replies = core_.handle(ofwire::decode_message(bytes).message, Timestamp{0});
  } catch (const ofwire::WireError& e) {
    replies = {core_.protocol_error(e, bytes)};
  }
  for (const OfMessage& m : replies) inbox_.push_back(wire_copy(m));
}

OfMessage LoopbackChannel::receive() {
  if (inbox_.empty()) throw ChannelClosed("no message pending on loopback channel");
  OfMessage m = std::move(inbox_.front());
  inbox_.pop_front();
  return m;
}

MockReport run_mock_switch(Channel& channel, std::span<const tracegen::FlowRecord> trace,
                           const MockSwitchConfig& cfg, Transcript* transcript) {
  return MockSwitch(channel, trace, cfg, transcript).run();
}

std::uint64_t transcript_digest(const Transcript& transcript) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const std::string& line : transcript) {
    for (unsigned char c : line) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= '\n';
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace flowpredict::controller

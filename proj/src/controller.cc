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

#include "flowpredict/controller.h"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace flowpredict::controller {

namespace {

using nlohmann::json;
using ofwire::OfMessage;

constexpr std::size_t kErrorDataMax = 64;

// FNV-1a over the 5-tuple.
std::uint64_t tuple_hash(const ofwire::FirstPacket& p) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v, int bytes) {
    for (int i = bytes - 1; i >= 0; --i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(p.src_ip, 4);
  mix(p.dst_ip, 4);
  mix(p.src_port, 2);
  mix(p.dst_port, 2);
  mix(p.proto, 1);
  return h;
}

json tuple_json(const ofwire::FirstPacket& p) {
  return {{"src", ofwire::ipv4_to_string(p.src_ip)},
          {"dst", ofwire::ipv4_to_string(p.dst_ip)},
          {"sport", p.src_port},
          {"dport", p.dst_port},
          {"proto", p.proto}};
}

OfMessage error_message(std::uint32_t xid, std::uint16_t type, std::uint16_t code,
                        ofwire::ByteView raw) {
  ofwire::Error e;
  e.type = type;
  e.code = code;
  const std::size_t n = std::min(raw.size(), kErrorDataMax);
  e.data.assign(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(n));
  return OfMessage{xid, std::move(e)};
}

}  // namespace

void ControllerConfig::validate() const {
  if (train_trigger < 1) throw std::invalid_argument("train_trigger must be >= 1");
  if (output_ports.empty()) throw std::invalid_argument("output port map is empty");
  for (std::uint32_t p : output_ports) {
    if (p == 0 || p > 0xffffff00) throw std::invalid_argument("output port out of range");
  }
}

Trainer::Trainer(ffnn::Network net, std::uint64_t seed) : net_(std::move(net)), seeds_(seed) {}

encoder::ClassLabel Trainer::predict(const encoder::FeatureVector& features) const {
  return ffnn::predict(net_, features);
}

void Trainer::submit(ffnn::Sample sample) { queue_.push_back(std::move(sample)); }

std::optional<double> Trainer::flush() {
  if (queue_.empty()) return std::nullopt;
  const double l = ffnn::train_epoch(net_, queue_, seeds_());
  queue_.clear();
  return l;
}

void EventLog::write(const std::string& json_line) {
  if (out_ == nullptr) return;
  *out_ << json_line << '\n';
  out_->flush();
}

ControllerCore::ControllerCore(ControllerConfig cfg, ffnn::Network net, EventLog log)
    : cfg_(std::move(cfg)), trainer_(std::move(net), cfg_.seed), log_(log) {
  cfg_.validate();
  if (trainer_.network().input_size() != encoder::kNumFeatures ||
      trainer_.network().output_size() != encoder::kNumClasses) {
    throw std::invalid_argument("network must map 16 features to 5 classes");
  }
}

std::uint32_t ControllerCore::output_port_for(const ofwire::FirstPacket& pkt) const {
  return cfg_.output_ports[tuple_hash(pkt) % cfg_.output_ports.size()];
}

std::vector<OfMessage> ControllerCore::on_connect() {
  log_.write(json{{"event", "hello_sent"}}.dump());
  return {OfMessage{next_xid_++, ofwire::Hello{}}};
}

std::vector<OfMessage> ControllerCore::handle(const OfMessage& msg, Timestamp now) {
  std::vector<OfMessage> out;
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, ofwire::Hello>) {
          log_.write(json{{"event", "hello"}, {"xid", msg.xid}}.dump());
        } else if constexpr (std::is_same_v<T, ofwire::EchoRequest>) {
          out.push_back(OfMessage{msg.xid, ofwire::EchoReply{body.payload}});
        } else if constexpr (std::is_same_v<T, ofwire::EchoReply>) {
          // Nothing outstanding on our side.
        } else if constexpr (std::is_same_v<T, ofwire::Error>) {
          ++stats_.errors_received;
          log_.write(json{{"event", "error_received"},
                          {"xid", msg.xid},
                          {"type", body.type},
                          {"code", body.code}}
                         .dump());
        } else if constexpr (std::is_same_v<T, ofwire::PacketIn>) {
          out = on_packet_in(msg.xid, body, now);
        } else if constexpr (std::is_same_v<T, ofwire::FlowRemoved>) {
          on_flow_removed(body);
        } else {
          // Controller-to-switch message arriving from the switch.
          const ofwire::Bytes raw = ofwire::encode_message(msg);
          out.push_back(error_message(msg.xid, ofwire::kErrBadRequest,
                                      ofwire::kBadRequestBadType, raw));
          ++stats_.errors_sent;
          log_.write(json{{"event", "error_sent"},
                          {"xid", msg.xid},
                          {"reason", "unexpected message type"},
                          {"msg_type", ofwire::to_string(msg.type())}}
                         .dump());
        }
      },
      msg.body);
  return out;
}

std::vector<OfMessage> ControllerCore::on_packet_in(std::uint32_t xid, const ofwire::PacketIn& p,
                                                    Timestamp now) {
  ++stats_.packet_ins;
  ofwire::FirstPacket pkt;
  try {
    pkt = ofwire::parse_frame(p.frame);
  } catch (const ofwire::WireError& e) {
    ++stats_.malformed_frames;
    log_.write(
        json{{"event", "malformed_frame"}, {"xid", xid}, {"error", ofwire::to_string(e.code())}}
            .dump());
    return {};
  }

  PendingFlow flow;
  flow.cookie = next_cookie_++;
  flow.packet = pkt;
  flow.features = encoder::featurize(pkt);
  flow.predicted = trainer_.predict(flow.features);
  flow.installed_at = now;

  ofwire::FlowMod mod;
  mod.cookie = flow.cookie;
  mod.idle_timeout_s = cfg_.idle_timeout_s;
  mod.hard_timeout_s = cfg_.hard_timeout_s;
  mod.priority = cfg_.flow_priority;
  mod.flags = ofwire::kFlagSendFlowRem;
  mod.importance = static_cast<std::uint16_t>(flow.predicted.value());
  mod.match = ofwire::five_tuple_match(pkt);
  mod.output_port = output_port_for(pkt);

  json line{{"event", "packet_in"}, {"xid", xid}, {"flow", tuple_json(pkt)}};
  log_.write(line.dump());
  log_.write(json{{"event", "flow_mod"},
                  {"xid", xid},
                  {"cookie", mod.cookie},
                  {"importance", mod.importance},
                  {"out_port", mod.output_port}}
                 .dump());

  ++stats_.flows_created;
  ++stats_.flow_mods;
  pending_.emplace(flow.cookie, flow);
  return {OfMessage{xid, std::move(mod)}};
}

void ControllerCore::on_flow_removed(const ofwire::FlowRemoved& r) {
  ++stats_.flow_removed;
  const auto it = pending_.find(r.cookie);
  if (it == pending_.end()) {
    ++stats_.unknown_cookies;
    log_.write(json{{"event", "unknown_cookie"}, {"cookie", r.cookie}}.dump());
    return;
  }
  const PendingFlow flow = it->second;
  pending_.erase(it);
  if (r.packet_count == 0) {
    // label() needs at least one packet; nothing to learn from.
    log_.write(json{{"event", "flow_removed"},
                    {"cookie", r.cookie},
                    {"packet_count", 0},
                    {"skipped", "zero packet count"}}
                   .dump());
    return;
  }
  const encoder::ClassLabel truth = encoder::label(r.packet_count, cfg_.bins);
  trainer_.submit(ffnn::make_sample(flow.features, truth));
  ++stats_.samples_total;
  log_.write(json{{"event", "flow_removed"},
                  {"cookie", r.cookie},
                  {"reason", static_cast<int>(r.reason)},
                  {"packet_count", r.packet_count},
                  {"byte_count", r.byte_count},
                  {"predicted", flow.predicted.value()},
                  {"label", truth.value()}}
                 .dump());
  if (++removals_since_flush_ >= cfg_.train_trigger) flush_training();
}

void ControllerCore::flush_training() {
  removals_since_flush_ = 0;
  const std::size_t n = trainer_.queued();
  const std::optional<double> l = trainer_.flush();
  if (!l) return;
  ++stats_.train_flushes;
  log_.write(json{{"event", "train_flush"}, {"samples", n}, {"loss", *l}}.dump());
}

OfMessage ControllerCore::protocol_error(const ofwire::WireError& error, ofwire::ByteView raw) {
  std::uint32_t xid = 0;
  if (raw.size() >= ofwire::kHeaderLen) {
    xid = (std::uint32_t{raw[4]} << 24) | (std::uint32_t{raw[5]} << 16) |
          (std::uint32_t{raw[6]} << 8) | std::uint32_t{raw[7]};
  }
  std::uint16_t type = ofwire::kErrBadRequest;
  std::uint16_t code = ofwire::kBadRequestBadType;
  switch (error.code()) {
    case ofwire::WireErrc::kBadVersion:
      if (raw.size() >= 2 && raw[1] == static_cast<std::uint8_t>(ofwire::MsgType::kHello)) {
        type = ofwire::kErrHelloFailed;
        code = ofwire::kHelloFailedIncompatible;
      } else {
        code = ofwire::kBadRequestBadVersion;
      }
      break;
    case ofwire::WireErrc::kTruncated:
      code = ofwire::kBadRequestBadLen;
      break;
    case ofwire::WireErrc::kMalformedOxm:
      type = ofwire::kErrBadMatch;
      code = ofwire::kBadMatchBadField;
      break;
    case ofwire::WireErrc::kUnknownType:
    case ofwire::WireErrc::kUnsupported:
    case ofwire::WireErrc::kNonIpv4:
    case ofwire::WireErrc::kTruncatedFrame:
      break;
  }
  ++stats_.errors_sent;
  log_.write(json{{"event", "error_sent"},
                  {"xid", xid},
                  {"reason", ofwire::to_string(error.code())},
                  {"type", type},
                  {"code", code}}
                 .dump());
  return error_message(xid, type, code, raw);
}

void ControllerCore::shutdown() {
  flush_training();
  if (!cfg_.model_path.empty()) {
    ffnn::save_file(trainer_.network(), cfg_.model_path);
    log_.write(json{{"event", "checkpoint"}, {"path", cfg_.model_path}}.dump());
  }
  log_.write(json{{"event", "shutdown"},
                  {"packet_ins", stats_.packet_ins},
                  {"flow_mods", stats_.flow_mods},
                  {"flow_removed", stats_.flow_removed},
                  {"samples", stats_.samples_total},
                  {"pending", pending_.size()}}
                 .dump());
}

}  // namespace flowpredict::controller

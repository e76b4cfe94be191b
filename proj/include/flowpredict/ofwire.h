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

// OpenFlow 1.4 message subset and first-packet frame parsing.
//
// Only the messages needed by a reactive controller are supported: HELLO,
// ERROR, ECHO_REQUEST, ECHO_REPLY, PACKET_IN, FLOW_REMOVED and FLOW_MOD(ADD).
// All multibyte fields are big-endian on the wire.

#ifndef FLOWPREDICT_OFWIRE_H_
#define FLOWPREDICT_OFWIRE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace flowpredict::ofwire {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::uint8_t kVersion = 0x05;
inline constexpr std::size_t kHeaderLen = 8;
inline constexpr std::uint16_t kDefaultTcpPort = 6653;

inline constexpr std::uint32_t kNoBuffer = 0xffffffff;
inline constexpr std::uint32_t kPortController = 0xfffffffd;
inline constexpr std::uint32_t kPortAny = 0xffffffff;
inline constexpr std::uint32_t kGroupAny = 0xffffffff;
inline constexpr std::uint16_t kControllerMaxLenNoBuffer = 0xffff;

inline constexpr std::uint16_t kEthTypeIpv4 = 0x0800;
inline constexpr std::uint8_t kIpProtoTcp = 6;
inline constexpr std::uint8_t kIpProtoUdp = 17;

enum class MsgType : std::uint8_t {
  kHello = 0,
  kError = 1,
  kEchoRequest = 2,
  kEchoReply = 3,
  kPacketIn = 10,
  kFlowRemoved = 11,
  kFlowMod = 14,
};

enum class PacketInReason : std::uint8_t {
  kTableMiss = 0,
  kApplyAction = 1,
  kInvalidTtl = 2,
  kActionSet = 3,
  kGroup = 4,
  kPacketOut = 5,
};

enum class FlowRemovedReason : std::uint8_t {
  kIdleTimeout = 0,
  kHardTimeout = 1,
  kDelete = 2,
  kGroupDelete = 3,
  kMeterDelete = 4,
  kEviction = 5,
};

enum class FlowModCommand : std::uint8_t {
  kAdd = 0,
};

// ofp_flow_mod_flags
inline constexpr std::uint16_t kFlagSendFlowRem = 1 << 0;
inline constexpr std::uint16_t kFlagCheckOverlap = 1 << 1;
inline constexpr std::uint16_t kFlagResetCounts = 1 << 2;
inline constexpr std::uint16_t kFlagNoPktCounts = 1 << 3;
inline constexpr std::uint16_t kFlagNoBytCounts = 1 << 4;

// ofp_error_type / codes used by the controller.
inline constexpr std::uint16_t kErrHelloFailed = 0;
inline constexpr std::uint16_t kErrBadRequest = 1;
inline constexpr std::uint16_t kErrBadMatch = 4;
inline constexpr std::uint16_t kHelloFailedIncompatible = 0;
inline constexpr std::uint16_t kBadRequestBadVersion = 0;
inline constexpr std::uint16_t kBadRequestBadType = 1;
inline constexpr std::uint16_t kBadRequestBadLen = 6;
inline constexpr std::uint16_t kBadRequestBadPacket = 12;
inline constexpr std::uint16_t kBadMatchBadField = 6;

enum class WireErrc {
  kBadVersion,
  kUnknownType,
  kTruncated,
  kMalformedOxm,
  // Body layout well-formed as bytes but outside the supported subset
  // (buffered PACKET_IN, non-ADD FLOW_MOD, unexpected instruction list).
  kUnsupported,
  kNonIpv4,
  kTruncatedFrame,
};

const char* to_string(WireErrc code);

class WireError : public std::runtime_error {
 public:
  WireError(WireErrc code, const std::string& what);
  WireErrc code() const noexcept { return code_; }

 private:
  WireErrc code_;
};

// Exact-value OXM match. Absent fields are wildcards. Only the IPv4 5-tuple
// and the ingress port are representable.
struct MatchFields {
  std::optional<std::uint32_t> in_port;
  std::optional<std::uint16_t> eth_type;
  std::optional<std::uint32_t> ipv4_src;
  std::optional<std::uint32_t> ipv4_dst;
  std::optional<std::uint8_t> ip_proto;
  std::optional<std::uint16_t> l4_src;
  std::optional<std::uint16_t> l4_dst;

  bool operator==(const MatchFields&) const = default;

  // OXM prerequisites: IPv4 fields need eth_type 0x0800, L4 ports need
  // ip_proto 6 or 17.
  bool valid() const;
};

struct Hello {
  bool operator==(const Hello&) const = default;
};

struct EchoRequest {
  Bytes payload;
  bool operator==(const EchoRequest&) const = default;
};

struct EchoReply {
  Bytes payload;
  bool operator==(const EchoReply&) const = default;
};

struct Error {
  std::uint16_t type = 0;
  std::uint16_t code = 0;
  Bytes data;
  bool operator==(const Error&) const = default;
};

struct PacketIn {
  std::uint32_t buffer_id = kNoBuffer;
  std::uint16_t total_len = 0;
  PacketInReason reason = PacketInReason::kApplyAction;
  std::uint8_t table_id = 0;
  std::uint64_t cookie = 0;
  MatchFields match;
  Bytes frame;
  bool operator==(const PacketIn&) const = default;
};

// FLOW_MOD with a single APPLY_ACTIONS{OUTPUT(output_port)} instruction.
struct FlowMod {
  std::uint64_t cookie = 0;
  std::uint8_t table_id = 0;
  FlowModCommand command = FlowModCommand::kAdd;
  std::uint16_t idle_timeout_s = 0;
  std::uint16_t hard_timeout_s = 0;
  std::uint16_t priority = 0;
  std::uint32_t buffer_id = kNoBuffer;
  std::uint16_t flags = 0;
  std::uint16_t importance = 0;
  MatchFields match;
  std::uint32_t output_port = 0;
  bool operator==(const FlowMod&) const = default;
};

struct FlowRemoved {
  std::uint64_t cookie = 0;
  std::uint16_t priority = 0;
  FlowRemovedReason reason = FlowRemovedReason::kIdleTimeout;
  std::uint8_t table_id = 0;
  std::uint32_t duration_s = 0;
  std::uint32_t duration_ns = 0;
  std::uint16_t idle_timeout_s = 0;
  std::uint16_t hard_timeout_s = 0;
  std::uint64_t packet_count = 0;
  std::uint64_t byte_count = 0;
  MatchFields match;
  bool operator==(const FlowRemoved&) const = default;
};

using Body = std::variant<Hello, EchoRequest, EchoReply, Error, PacketIn,
                          FlowMod, FlowRemoved>;

struct OfMessage {
  std::uint32_t xid = 0;
  Body body;
  bool operator==(const OfMessage&) const = default;

  MsgType type() const;
};

const char* to_string(MsgType type);

// Throws std::invalid_argument if `msg` violates a subset invariant
// (NO_BUFFER only, ADD only, invalid match prerequisites, oversize body).
void validate(const OfMessage& msg);

// Serializes one message. Validates first; see validate().
Bytes encode_message(const OfMessage& msg);

struct Decoded {
  OfMessage message;
  std::size_t consumed = 0;
};

// Parses exactly one message from the front of `bytes`. Trailing bytes beyond
// header.length are left unconsumed.
Decoded decode_message(ByteView bytes);

// Stream framing helper: the total length of the message at the front of
// `bytes`, or nullopt if fewer than 8 bytes are available. Throws
// WireError(kTruncated) when the length field is below the header size.
std::optional<std::size_t> peek_message_length(ByteView bytes);

// Serialized OXM match block (ofp_match including padding).
Bytes encode_match(const MatchFields& match);

// Header fields visible on a flow's first packet.
struct FirstPacket {
  std::uint32_t src_ip = 0;
  std::uint32_t dst_ip = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t proto = 0;
  std::uint8_t tos = 0;
  std::uint8_t ttl = 0;
  std::uint16_t first_len = 20;
  // Microseconds since trace start.
  std::int64_t arrival_us = 0;

  bool operator==(const FirstPacket&) const = default;
};

// Parses an Ethernet II / IPv4 frame. Ports are 0 unless proto is TCP or UDP.
// arrival_us is left at 0. Never reads past the end of `frame`.
FirstPacket parse_frame(ByteView frame);

// Synthesizes the header bytes of a first packet: Ethernet II, IPv4 (with
// checksum; total length set to first_len) and a TCP or UDP header. The frame
// carries headers only and is zero-padded to the 60-byte Ethernet minimum.
Bytes build_frame(const FirstPacket& pkt);

// Exact 5-tuple match for an IPv4 first packet.
MatchFields five_tuple_match(const FirstPacket& pkt);

std::string ipv4_to_string(std::uint32_t addr);
// Throws std::invalid_argument on anything but a dotted quad.
std::uint32_t parse_ipv4(const std::string& text);

std::string to_hex(ByteView bytes);

}  // namespace flowpredict::ofwire

#endif  // FLOWPREDICT_OFWIRE_H_

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

#include "flowpredict/ofwire.h"

#include <array>
#include <cstdio>
#include <sstream>

#include "byte_io.h"

namespace flowpredict::ofwire {

namespace {

// ofp_match type
constexpr std::uint16_t kMatchTypeOxm = 1;
constexpr std::uint16_t kOxmClassOpenflowBasic = 0x8000;

// oxm_ofb_match_fields
constexpr std::uint8_t kOxmInPort = 0;
constexpr std::uint8_t kOxmEthType = 5;
constexpr std::uint8_t kOxmIpProto = 10;
constexpr std::uint8_t kOxmIpv4Src = 11;
constexpr std::uint8_t kOxmIpv4Dst = 12;
constexpr std::uint8_t kOxmTcpSrc = 13;
constexpr std::uint8_t kOxmTcpDst = 14;
constexpr std::uint8_t kOxmUdpSrc = 15;
constexpr std::uint8_t kOxmUdpDst = 16;

// Instruction / action constants.
constexpr std::uint16_t kInstructionApplyActions = 4;
constexpr std::uint16_t kActionOutput = 0;
constexpr std::uint16_t kActionOutputLen = 16;
constexpr std::uint16_t kApplyActionsLen = 8 + kActionOutputLen;

// Fixed body sizes (excluding ofp_header and match).
constexpr std::size_t kPacketInFixed = 16;     // buffer_id .. cookie
constexpr std::size_t kFlowModFixed = 40;      // cookie .. importance
constexpr std::size_t kFlowRemovedFixed = 40;  // cookie .. byte_count
constexpr std::size_t kErrorFixed = 4;
constexpr std::size_t kMinMatchLen = 8;

constexpr std::size_t kMaxMessageLen = 0xffff;

std::size_t pad8(std::size_t n) { return (n + 7) / 8 * 8; }

void put_oxm_header(ByteWriter& w, std::uint8_t field, std::uint8_t len) {
  w.u16(kOxmClassOpenflowBasic);
  w.u8(static_cast<std::uint8_t>(field << 1));
  w.u8(len);
}

void write_match(ByteWriter& w, const MatchFields& m) {
  const std::size_t start = w.size();
  w.u16(kMatchTypeOxm);
  w.u16(0);  // patched below
  if (m.in_port) {
    put_oxm_header(w, kOxmInPort, 4);
    w.u32(*m.in_port);
  }
  if (m.eth_type) {
    put_oxm_header(w, kOxmEthType, 2);
    w.u16(*m.eth_type);
  }
  if (m.ip_proto) {
    put_oxm_header(w, kOxmIpProto, 1);
    w.u8(*m.ip_proto);
  }
  if (m.ipv4_src) {
    put_oxm_header(w, kOxmIpv4Src, 4);
    w.u32(*m.ipv4_src);
  }
  if (m.ipv4_dst) {
    put_oxm_header(w, kOxmIpv4Dst, 4);
    w.u32(*m.ipv4_dst);
  }
  const bool tcp = m.ip_proto && *m.ip_proto == kIpProtoTcp;
  if (m.l4_src) {
    put_oxm_header(w, tcp ? kOxmTcpSrc : kOxmUdpSrc, 2);
    w.u16(*m.l4_src);
  }
  if (m.l4_dst) {
    put_oxm_header(w, tcp ? kOxmTcpDst : kOxmUdpDst, 2);
    w.u16(*m.l4_dst);
  }
  const std::size_t len = w.size() - start;
  w.patch_u16(start + 2, static_cast<std::uint16_t>(len));
  w.zeros(pad8(len) - len);
}

[[noreturn]] void fail(WireErrc code, const std::string& what) {
  throw WireError(code, what);
}

MatchFields read_match(ByteReader& r) {
  if (r.remaining() < kMinMatchLen) {
    fail(WireErrc::kTruncated, "match header truncated");
  }
  const std::uint16_t type = r.u16();
  const std::uint16_t len = r.u16();
  if (type != kMatchTypeOxm) fail(WireErrc::kMalformedOxm, "match type is not OXM");
  if (len < 4) fail(WireErrc::kMalformedOxm, "match length below 4");
  if (pad8(len) - 4 > r.remaining()) {
    fail(WireErrc::kMalformedOxm, "match length exceeds message body");
  }
  ByteReader fields = r.sub(len - 4);
  r.skip(pad8(len) - len);

  MatchFields m;
  std::uint32_t seen = 0;
  bool tcp_fields = false;
  bool udp_fields = false;
  while (!fields.empty()) {
    if (fields.remaining() < 4) fail(WireErrc::kMalformedOxm, "OXM header truncated");
    const std::uint16_t oxm_class = fields.u16();
    const std::uint8_t field_mask = fields.u8();
    const std::uint8_t payload_len = fields.u8();
    if (oxm_class != kOxmClassOpenflowBasic) {
      fail(WireErrc::kMalformedOxm, "unsupported OXM class");
    }
    if (field_mask & 1) fail(WireErrc::kMalformedOxm, "masked OXM fields are unsupported");
    const std::uint8_t field = field_mask >> 1;
    if (payload_len > fields.remaining()) {
      fail(WireErrc::kMalformedOxm, "OXM payload truncated");
    }
    if (seen & (1u << field)) fail(WireErrc::kMalformedOxm, "duplicate OXM field");
    auto expect_len = [&](std::uint8_t want) {
      if (payload_len != want) fail(WireErrc::kMalformedOxm, "bad OXM payload length");
    };
    switch (field) {
      case kOxmInPort:
        expect_len(4);
        m.in_port = fields.u32();
        break;
      case kOxmEthType:
        expect_len(2);
        m.eth_type = fields.u16();
        break;
      case kOxmIpProto:
        expect_len(1);
        m.ip_proto = fields.u8();
        break;
      case kOxmIpv4Src:
        expect_len(4);
        m.ipv4_src = fields.u32();
        break;
      case kOxmIpv4Dst:
        expect_len(4);
        m.ipv4_dst = fields.u32();
        break;
      case kOxmTcpSrc:
      case kOxmUdpSrc:
        expect_len(2);
        if (m.l4_src) fail(WireErrc::kMalformedOxm, "duplicate L4 source port");
        m.l4_src = fields.u16();
        (field == kOxmTcpSrc ? tcp_fields : udp_fields) = true;
        break;
      case kOxmTcpDst:
      case kOxmUdpDst:
        expect_len(2);
        if (m.l4_dst) fail(WireErrc::kMalformedOxm, "duplicate L4 destination port");
        m.l4_dst = fields.u16();
        (field == kOxmTcpDst ? tcp_fields : udp_fields) = true;
        break;
      default:
        fail(WireErrc::kMalformedOxm, "unsupported OXM field " + std::to_string(field));
    }
    seen |= 1u << field;
  }
  if (!m.valid()) fail(WireErrc::kMalformedOxm, "OXM prerequisites not met");
  if (tcp_fields && udp_fields) fail(WireErrc::kMalformedOxm, "mixed TCP and UDP fields");
  if (tcp_fields && *m.ip_proto != kIpProtoTcp) {
    fail(WireErrc::kMalformedOxm, "TCP port without ip_proto 6");
  }
  if (udp_fields && *m.ip_proto != kIpProtoUdp) {
    fail(WireErrc::kMalformedOxm, "UDP port without ip_proto 17");
  }
  return m;
}

void write_body(ByteWriter& w, const Hello&) { (void)w; }

void write_body(ByteWriter& w, const EchoRequest& m) { w.bytes(m.payload); }

void write_body(ByteWriter& w, const EchoReply& m) { w.bytes(m.payload); }

void write_body(ByteWriter& w, const Error& m) {
  w.u16(m.type);
  w.u16(m.code);
  w.bytes(m.data);
}

void write_body(ByteWriter& w, const PacketIn& m) {
  w.u32(m.buffer_id);
  w.u16(m.total_len);
  w.u8(static_cast<std::uint8_t>(m.reason));
  w.u8(m.table_id);
  w.u64(m.cookie);
  write_match(w, m.match);
  w.zeros(2);
  w.bytes(m.frame);
}

void write_body(ByteWriter& w, const FlowMod& m) {
  w.u64(m.cookie);
  w.u64(0);  // cookie_mask
  w.u8(m.table_id);
  w.u8(static_cast<std::uint8_t>(m.command));
  w.u16(m.idle_timeout_s);
  w.u16(m.hard_timeout_s);
  w.u16(m.priority);
  w.u32(m.buffer_id);
  w.u32(kPortAny);   // out_port, ignored for ADD
  w.u32(kGroupAny);  // out_group, ignored for ADD
  w.u16(m.flags);
  w.u16(m.importance);
  write_match(w, m.match);
  w.u16(kInstructionApplyActions);
  w.u16(kApplyActionsLen);
  w.zeros(4);
  w.u16(kActionOutput);
  w.u16(kActionOutputLen);
  w.u32(m.output_port);
  w.u16(kControllerMaxLenNoBuffer);
  w.zeros(6);
}

void write_body(ByteWriter& w, const FlowRemoved& m) {
  w.u64(m.cookie);
  w.u16(m.priority);
  w.u8(static_cast<std::uint8_t>(m.reason));
  w.u8(m.table_id);
  w.u32(m.duration_s);
  w.u32(m.duration_ns);
  w.u16(m.idle_timeout_s);
  w.u16(m.hard_timeout_s);
  w.u64(m.packet_count);
  w.u64(m.byte_count);
  write_match(w, m.match);
}

Body read_hello(ByteReader& r) {
  // Hello elements (version bitmaps) are accepted and ignored.
  r.skip(r.remaining());
  return Hello{};
}

Body read_error(ByteReader& r) {
  if (r.remaining() < kErrorFixed) fail(WireErrc::kTruncated, "ERROR body truncated");
  Error e;
  e.type = r.u16();
  e.code = r.u16();
  e.data = r.rest();
  return e;
}

Body read_packet_in(ByteReader& r) {
  if (r.remaining() < kPacketInFixed + kMinMatchLen + 2) {
    fail(WireErrc::kTruncated, "PACKET_IN body truncated");
  }
  PacketIn p;
  p.buffer_id = r.u32();
  p.total_len = r.u16();
  p.reason = static_cast<PacketInReason>(r.u8());
  p.table_id = r.u8();
  p.cookie = r.u64();
  p.match = read_match(r);
  if (r.remaining() < 2) fail(WireErrc::kTruncated, "PACKET_IN pad truncated");
  r.skip(2);
  p.frame = r.rest();
  if (p.buffer_id != kNoBuffer) fail(WireErrc::kUnsupported, "buffered PACKET_IN");
  return p;
}

Body read_flow_mod(ByteReader& r) {
  if (r.remaining() < kFlowModFixed + kMinMatchLen) {
    fail(WireErrc::kTruncated, "FLOW_MOD body truncated");
  }
  FlowMod f;
  f.cookie = r.u64();
  r.skip(8);  // cookie_mask
  f.table_id = r.u8();
  const std::uint8_t command = r.u8();
  f.idle_timeout_s = r.u16();
  f.hard_timeout_s = r.u16();
  f.priority = r.u16();
  f.buffer_id = r.u32();
  r.skip(8);  // out_port, out_group
  f.flags = r.u16();
  f.importance = r.u16();
  f.match = read_match(r);
  if (command != static_cast<std::uint8_t>(FlowModCommand::kAdd)) {
    fail(WireErrc::kUnsupported, "only FLOW_MOD ADD is supported");
  }
  f.command = FlowModCommand::kAdd;
  if (f.buffer_id != kNoBuffer) fail(WireErrc::kUnsupported, "buffered FLOW_MOD");

  if (r.remaining() < kApplyActionsLen) fail(WireErrc::kTruncated, "instruction truncated");
  const std::uint16_t itype = r.u16();
  const std::uint16_t ilen = r.u16();
  r.skip(4);
  const std::uint16_t atype = r.u16();
  const std::uint16_t alen = r.u16();
  if (itype != kInstructionApplyActions || ilen != kApplyActionsLen ||
      atype != kActionOutput || alen != kActionOutputLen) {
    fail(WireErrc::kUnsupported, "instruction list must be APPLY_ACTIONS{OUTPUT}");
  }
  f.output_port = r.u32();
  r.skip(8);  // max_len, pad
  if (!r.empty()) fail(WireErrc::kUnsupported, "extra FLOW_MOD instructions");
  return f;
}

Body read_flow_removed(ByteReader& r) {
  if (r.remaining() < kFlowRemovedFixed + kMinMatchLen) {
    fail(WireErrc::kTruncated, "FLOW_REMOVED body truncated");
  }
  FlowRemoved f;
  f.cookie = r.u64();
  f.priority = r.u16();
  f.reason = static_cast<FlowRemovedReason>(r.u8());
  f.table_id = r.u8();
  f.duration_s = r.u32();
  f.duration_ns = r.u32();
  f.idle_timeout_s = r.u16();
  f.hard_timeout_s = r.u16();
  f.packet_count = r.u64();
  f.byte_count = r.u64();
  f.match = read_match(r);
  if (!r.empty()) fail(WireErrc::kUnsupported, "trailing bytes after FLOW_REMOVED match");
  return f;
}

}  // namespace

static Body read_body(std::uint8_t type, ByteReader& r);

const char* to_string(WireErrc code) {
  switch (code) {
    case WireErrc::kBadVersion: return "BadVersion";
    case WireErrc::kUnknownType: return "UnknownType";
    case WireErrc::kTruncated: return "Truncated";
    case WireErrc::kMalformedOxm: return "MalformedOxm";
    case WireErrc::kUnsupported: return "Unsupported";
    case WireErrc::kNonIpv4: return "NonIpv4";
    case WireErrc::kTruncatedFrame: return "TruncatedFrame";
  }
  return "?";
}

WireError::WireError(WireErrc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

bool MatchFields::valid() const {
  const bool ipv4 = eth_type && *eth_type == kEthTypeIpv4;
  if ((ipv4_src || ipv4_dst || ip_proto) && !ipv4) return false;
  const bool l4 = ip_proto && (*ip_proto == kIpProtoTcp || *ip_proto == kIpProtoUdp);
  if ((l4_src || l4_dst) && !l4) return false;
  return true;
}

MsgType OfMessage::type() const {
  // Order mirrors the Body alternatives.
  static constexpr std::array<MsgType, 7> kByIndex = {
      MsgType::kHello,    MsgType::kEchoRequest, MsgType::kEchoReply,
      MsgType::kError,    MsgType::kPacketIn,    MsgType::kFlowMod,
      MsgType::kFlowRemoved};
  static_assert(std::variant_size_v<Body> == kByIndex.size());
  return kByIndex[body.index()];
}

const char* to_string(MsgType type) {
  switch (type) {
    case MsgType::kHello: return "HELLO";
    case MsgType::kError: return "ERROR";
    case MsgType::kEchoRequest: return "ECHO_REQUEST";
    case MsgType::kEchoReply: return "ECHO_REPLY";
    case MsgType::kPacketIn: return "PACKET_IN";
    case MsgType::kFlowRemoved: return "FLOW_REMOVED";
    case MsgType::kFlowMod: return "FLOW_MOD";
  }
  return "?";
}

void validate(const OfMessage& msg) {
  struct Visitor {
    void operator()(const Hello&) const {}
    void operator()(const EchoRequest&) const {}
    void operator()(const EchoReply&) const {}
    void operator()(const Error&) const {}
    void operator()(const PacketIn& p) const {
      if (p.buffer_id != kNoBuffer) {
        throw std::invalid_argument("PACKET_IN must use OFP_NO_BUFFER");
      }
      if (!p.match.valid()) throw std::invalid_argument("PACKET_IN match prerequisites");
    }
    void operator()(const FlowMod& f) const {
      if (f.command != FlowModCommand::kAdd) throw std::invalid_argument("FLOW_MOD must be ADD");
      if (f.buffer_id != kNoBuffer) {
        throw std::invalid_argument("FLOW_MOD must use OFP_NO_BUFFER");
      }
      if (!f.match.valid()) throw std::invalid_argument("FLOW_MOD match prerequisites");
    }
    void operator()(const FlowRemoved& f) const {
      if (!f.match.valid()) throw std::invalid_argument("FLOW_REMOVED match prerequisites");
    }
  };
  std::visit(Visitor{}, msg.body);
}

Bytes encode_message(const OfMessage& msg) {
  validate(msg);
  ByteWriter w;
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(msg.type()));
  w.u16(0);  // length, patched below
  w.u32(msg.xid);
  std::visit([&w](const auto& body) { write_body(w, body); }, msg.body);
  if (w.size() > kMaxMessageLen) {
    throw std::invalid_argument("message exceeds 65535 bytes");
  }
  w.patch_u16(2, static_cast<std::uint16_t>(w.size()));
  return w.take();
}

std::optional<std::size_t> peek_message_length(ByteView bytes) {
  if (bytes.size() < kHeaderLen) return std::nullopt;
  const std::size_t len = (std::size_t{bytes[2]} << 8) | bytes[3];
  if (len < kHeaderLen) fail(WireErrc::kTruncated, "length field below header size");
  return len;
}

Decoded decode_message(ByteView bytes) {
  if (bytes.size() < kHeaderLen) fail(WireErrc::kTruncated, "fewer than 8 bytes");
  ByteReader header(bytes.first(kHeaderLen));
  const std::uint8_t version = header.u8();
  const std::uint8_t type = header.u8();
  const std::uint16_t length = header.u16();
  const std::uint32_t xid = header.u32();
  if (version != kVersion) {
    fail(WireErrc::kBadVersion, "version " + std::to_string(version));
  }
  if (length < kHeaderLen) fail(WireErrc::kTruncated, "length field below header size");
  if (length > bytes.size()) fail(WireErrc::kTruncated, "length field exceeds buffer");

  ByteReader r(bytes.subspan(kHeaderLen, length - kHeaderLen));
  Decoded out;
  out.message.xid = xid;
  out.consumed = length;
  try {
    out.message.body = read_body(type, r);
  } catch (const std::out_of_range&) {
    fail(WireErrc::kTruncated, "body shorter than its fields");
  }
  return out;
}

static Body read_body(std::uint8_t type, ByteReader& r) {
  switch (static_cast<MsgType>(type)) {
    case MsgType::kHello:
      return read_hello(r);
    case MsgType::kError:
      return read_error(r);
    case MsgType::kEchoRequest:
      return EchoRequest{r.rest()};
    case MsgType::kEchoReply:
      return EchoReply{r.rest()};
    case MsgType::kPacketIn:
      return read_packet_in(r);
    case MsgType::kFlowRemoved:
      return read_flow_removed(r);
    case MsgType::kFlowMod:
      return read_flow_mod(r);
    default:
      fail(WireErrc::kUnknownType, "type " + std::to_string(type));
  }
}

Bytes encode_match(const MatchFields& match) {
  ByteWriter w;
  write_match(w, match);
  return w.take();
}

MatchFields five_tuple_match(const FirstPacket& pkt) {
  MatchFields m;
  m.eth_type = kEthTypeIpv4;
  m.ipv4_src = pkt.src_ip;
  m.ipv4_dst = pkt.dst_ip;
  m.ip_proto = pkt.proto;
  if (pkt.proto == kIpProtoTcp || pkt.proto == kIpProtoUdp) {
    m.l4_src = pkt.src_port;
    m.l4_dst = pkt.dst_port;
  }
  return m;
}

std::string ipv4_to_string(std::uint32_t addr) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", (addr >> 24) & 0xff, (addr >> 16) & 0xff,
                (addr >> 8) & 0xff, addr & 0xff);
  return buf;
}

std::uint32_t parse_ipv4(const std::string& text) {
  std::uint32_t addr = 0;
  int octets = 0;
  std::size_t pos = 0;
  while (octets < 4) {
    if (pos >= text.size() || text[pos] < '0' || text[pos] > '9') break;
    unsigned value = 0;
    std::size_t digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9' && digits < 4) {
      value = value * 10 + static_cast<unsigned>(text[pos] - '0');
      ++pos;
      ++digits;
    }
    if (value > 255 || digits > 3) break;
    addr = (addr << 8) | value;
    ++octets;
    if (octets < 4) {
      if (pos >= text.size() || text[pos] != '.') break;
      ++pos;
    }
  }
  if (octets != 4 || pos != text.size()) {
    throw std::invalid_argument("not a dotted-quad IPv4 address: '" + text + "'");
  }
  return addr;
}

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

}  // namespace flowpredict::ofwire

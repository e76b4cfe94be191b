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

#include <gtest/gtest.h>

#include <random>

#include "wire_fixtures.h"

namespace flowpredict::ofwire {
namespace {

using testing::captured_packet_in_bytes;
using testing::captured_packet_in_frame;
using testing::random_message;

WireErrc decode_error(const Bytes& b) {
  try {
    decode_message(b);
  } catch (const WireError& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode succeeded";
  return WireErrc::kUnsupported;
}

TEST(Header, HelloEncodesToEightBytes) {
  const Bytes b = encode_message(OfMessage{0, Hello{}});
  EXPECT_EQ(b, (Bytes{0x05, 0x00, 0x00, 0x08, 0x00, 0x00, 0x00, 0x00}));
}

TEST(Header, HelloDecodes) {
  const Decoded d = decode_message(Bytes{0x05, 0x00, 0x00, 0x08, 0x00, 0x00, 0x00, 0x01});
  EXPECT_EQ(d.message.xid, 1u);
  EXPECT_TRUE(std::holds_alternative<Hello>(d.message.body));
  EXPECT_EQ(d.consumed, 8u);
}

TEST(Header, LengthBelowHeaderIsTruncated) {
  EXPECT_EQ(decode_error({0x05, 0x0a, 0x00, 0x04, 0, 0, 0, 0}), WireErrc::kTruncated);
}

TEST(Header, LengthBeyondBufferIsTruncated) {
  EXPECT_EQ(decode_error({0x05, 0x00, 0x00, 0x10, 0, 0, 0, 0}), WireErrc::kTruncated);
}

TEST(Header, ShortBufferIsTruncated) {
  EXPECT_EQ(decode_error({0x05, 0x00, 0x00}), WireErrc::kTruncated);
}

TEST(Header, WrongVersion) {
  EXPECT_EQ(decode_error({0x04, 0x00, 0x00, 0x08, 0, 0, 0, 0}), WireErrc::kBadVersion);
}

TEST(Header, UnknownType) {
  // FEATURES_REQUEST is outside the subset.
  EXPECT_EQ(decode_error({0x05, 0x05, 0x00, 0x08, 0, 0, 0, 0}), WireErrc::kUnknownType);
}

TEST(Header, TrailingBytesLeftUnconsumed) {
  Bytes b = encode_message(OfMessage{9, EchoRequest{{1, 2, 3}}});
  const std::size_t n = b.size();
  b.push_back(0xaa);
  const Decoded d = decode_message(b);
  EXPECT_EQ(d.consumed, n);
  EXPECT_EQ(std::get<EchoRequest>(d.message.body).payload, (Bytes{1, 2, 3}));
}

TEST(Header, PeekLength) {
  EXPECT_FALSE(peek_message_length(Bytes{0x05, 0x00}).has_value());
  EXPECT_EQ(peek_message_length(Bytes{0x05, 0x0a, 0x00, 0x66, 0, 0, 0, 0}), 102u);
  EXPECT_THROW(peek_message_length(Bytes{0x05, 0x0a, 0x00, 0x04, 0, 0, 0, 0}), WireError);
}

TEST(PacketIn, CapturedListingDecodes) {
  const Bytes wire = captured_packet_in_bytes();
  ASSERT_EQ(wire.size(), 102u);
  const Decoded d = decode_message(wire);
  EXPECT_EQ(d.consumed, 102u);
  EXPECT_EQ(d.message.xid, 0u);
  EXPECT_EQ(d.message.type(), MsgType::kPacketIn);
  const auto& p = std::get<PacketIn>(d.message.body);
  EXPECT_EQ(p.buffer_id, kNoBuffer);
  EXPECT_EQ(p.total_len, 60);
  EXPECT_EQ(p.reason, PacketInReason::kApplyAction);
  EXPECT_EQ(p.table_id, 0);
  EXPECT_EQ(p.cookie, 0u);
  EXPECT_EQ(p.match.in_port, 1u);
  EXPECT_EQ(p.frame, captured_packet_in_frame());
}

TEST(PacketIn, CapturedListingEncodesExactly) {
  PacketIn p;
  p.total_len = 60;
  p.reason = PacketInReason::kApplyAction;
  p.match.in_port = 1;
  p.frame = captured_packet_in_frame();
  EXPECT_EQ(encode_message(OfMessage{0, p}), captured_packet_in_bytes());
}

TEST(PacketIn, CapturedFrameParses) {
  const FirstPacket f = parse_frame(captured_packet_in_frame());
  EXPECT_EQ(ipv4_to_string(f.src_ip), "192.168.2.97");
  EXPECT_EQ(ipv4_to_string(f.dst_ip), "192.168.1.97");
  EXPECT_EQ(f.proto, 253);
  EXPECT_EQ(f.first_len, 46);
  EXPECT_EQ(f.src_port, 0);
  EXPECT_EQ(f.dst_port, 0);
}

TEST(PacketIn, BufferedIsUnsupported) {
  Bytes wire = captured_packet_in_bytes();
  wire[8] = 0x00;  // buffer_id = 0x00ffffff
  EXPECT_EQ(decode_error(wire), WireErrc::kUnsupported);
  PacketIn p;
  p.buffer_id = 7;
  EXPECT_THROW(encode_message(OfMessage{0, p}), std::invalid_argument);
}

TEST(FlowMod, FiveTupleLayout) {
  FirstPacket pkt;
  pkt.src_ip = parse_ipv4("10.0.0.1");
  pkt.dst_ip = parse_ipv4("192.168.1.2");
  pkt.src_port = 0x1234;
  pkt.dst_port = 80;
  pkt.proto = kIpProtoTcp;
  FlowMod m;
  m.cookie = 0x0102030405060708ULL;
  m.idle_timeout_s = 10;
  m.hard_timeout_s = 30;
  m.priority = 10000;
  m.flags = kFlagSendFlowRem;
  m.importance = 3;
  m.match = five_tuple_match(pkt);
  m.output_port = 2;
  const Bytes expect = {
      // header: FLOW_MOD, length 120, xid 5
      0x05, 0x0e, 0x00, 0x78, 0x00, 0x00, 0x00, 0x05,
      // cookie, cookie_mask
      0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08, 0, 0, 0, 0, 0, 0, 0, 0,
      // table 0, ADD, idle 10, hard 30, priority 10000
      0x00, 0x00, 0x00, 0x0a, 0x00, 0x1e, 0x27, 0x10,
      // buffer_id, out_port, out_group: all 0xffffffff
      0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff,
      // flags SEND_FLOW_REM, importance 3
      0x00, 0x01, 0x00, 0x03,
      // ofp_match: OXM type, length 4 + 39
      0x00, 0x01, 0x00, 0x2b,
      0x80, 0x00, 0x0a, 0x02, 0x08, 0x00,              // eth_type
      0x80, 0x00, 0x14, 0x01, 0x06,                    // ip_proto
      0x80, 0x00, 0x16, 0x04, 0x0a, 0x00, 0x00, 0x01,  // ipv4_src
      0x80, 0x00, 0x18, 0x04, 0xc0, 0xa8, 0x01, 0x02,  // ipv4_dst
      0x80, 0x00, 0x1a, 0x02, 0x12, 0x34,              // tcp_src
      0x80, 0x00, 0x1c, 0x02, 0x00, 0x50,              // tcp_dst
      0x00, 0x00, 0x00, 0x00, 0x00,                    // pad to 48
      // APPLY_ACTIONS, length 24
      0x00, 0x04, 0x00, 0x18, 0x00, 0x00, 0x00, 0x00,
      // OUTPUT port 2, max_len NO_BUFFER
      0x00, 0x00, 0x00, 0x10, 0x00, 0x00, 0x00, 0x02, 0xff, 0xff, 0, 0, 0, 0, 0, 0};
  EXPECT_EQ(encode_message(OfMessage{5, m}), expect);
  EXPECT_EQ(decode_message(expect).message, (OfMessage{5, m}));
}

TEST(FlowMod, NonAddCommandUnsupported) {
  FlowMod m;
  m.output_port = 1;
  Bytes wire = encode_message(OfMessage{1, m});
  wire[25] = 3;  // DELETE
  EXPECT_EQ(decode_error(wire), WireErrc::kUnsupported);
}

TEST(FlowRemoved, CountsRoundTrip) {
  FlowRemoved r;
  r.cookie = 42;
  r.packet_count = 7;
  r.byte_count = 7 * 60;
  r.reason = FlowRemovedReason::kIdleTimeout;
  r.match.in_port = 3;
  const OfMessage m{11, r};
  const Bytes wire = encode_message(m);
  EXPECT_EQ(wire.size(), 48u + 16u);
  const auto& back = std::get<FlowRemoved>(decode_message(wire).message.body);
  EXPECT_EQ(back.packet_count, 7u);
  EXPECT_EQ(back, r);
}

TEST(Echo, EmptyReplyRoundTripsByteExact) {
  const Bytes wire = encode_message(OfMessage{3, EchoReply{}});
  EXPECT_EQ(wire, (Bytes{0x05, 0x03, 0x00, 0x08, 0x00, 0x00, 0x00, 0x03}));
  EXPECT_EQ(encode_message(decode_message(wire).message), wire);
}

TEST(Match, Prerequisites) {
  MatchFields m;
  m.ipv4_src = 1;
  EXPECT_FALSE(m.valid());
  m.eth_type = kEthTypeIpv4;
  EXPECT_TRUE(m.valid());
  m.l4_dst = 53;
  EXPECT_FALSE(m.valid());
  m.ip_proto = kIpProtoUdp;
  EXPECT_TRUE(m.valid());
  m.ip_proto = 253;
  EXPECT_FALSE(m.valid());
}

TEST(Match, EncodingIsAligned) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const MatchFields m = testing::random_match(rng);
    EXPECT_EQ(encode_match(m).size() % 8, 0u);
  }
}

TEST(Match, MaskedOxmRejected) {
  PacketIn p;
  p.match.in_port = 1;
  p.frame = captured_packet_in_frame();
  Bytes wire = encode_message(OfMessage{0, p});
  wire[24 + 6] |= 0x01;  // has_mask bit of the in_port OXM
  EXPECT_EQ(decode_error(wire), WireErrc::kMalformedOxm);
}

TEST(Match, MissingPrerequisiteRejected) {
  MatchFields m;
  m.eth_type = kEthTypeIpv4;
  m.ipv4_dst = 5;
  FlowRemoved r;
  r.match = m;
  Bytes wire = encode_message(OfMessage{0, r});
  // The eth_type OXM starts at byte 52; make it IPv6 so ipv4_dst loses its
  // prerequisite.
  ASSERT_EQ(wire[54], 0x0a);
  wire[56] = 0x86;
  wire[57] = 0xdd;
  EXPECT_EQ(decode_error(wire), WireErrc::kMalformedOxm);
}

TEST(Match, UnknownFieldRejected) {
  MatchFields m;
  m.in_port = 4;
  FlowRemoved r;
  r.match = m;
  Bytes wire = encode_message(OfMessage{0, r});
  wire[54] = 0x02;  // in_phy_port
  EXPECT_EQ(decode_error(wire), WireErrc::kMalformedOxm);
}

TEST(RoundTrip, RandomizedMessages) {
  std::mt19937_64 rng(20260101);
  for (int i = 0; i < 2000; ++i) {
    const OfMessage m = random_message(rng);
    const Bytes wire = encode_message(m);
    ASSERT_EQ(wire[0], kVersion);
    ASSERT_EQ((std::size_t{wire[2]} << 8) | wire[3], wire.size());
    const Decoded d = decode_message(wire);
    ASSERT_EQ(d.consumed, wire.size());
    ASSERT_EQ(d.message, m) << "draw " << i << " type " << to_string(m.type());
    ASSERT_EQ(encode_message(d.message), wire);
  }
}

TEST(RoundTrip, TruncationsNeverCrash) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 300; ++i) {
    const Bytes wire = encode_message(random_message(rng));
    for (std::size_t n = 0; n < wire.size(); ++n) {
      Bytes cut(wire.begin(), wire.begin() + static_cast<std::ptrdiff_t>(n));
      EXPECT_THROW(decode_message(cut), WireError);
      // A consistent header over a short body must not be misread either.
      if (n >= kHeaderLen) {
        cut[2] = static_cast<std::uint8_t>(n >> 8);
        cut[3] = static_cast<std::uint8_t>(n);
        try {
          decode_message(cut);
        } catch (const WireError&) {
        }
      }
    }
  }
}

TEST(Frame, NonTcpUdpProtocolHasZeroPorts) {
  FirstPacket pkt;
  pkt.src_ip = parse_ipv4("192.168.2.46");
  pkt.dst_ip = parse_ipv4("192.168.1.46");
  pkt.proto = 253;
  pkt.ttl = 64;
  pkt.first_len = 20;
  const FirstPacket back = parse_frame(build_frame(pkt));
  EXPECT_EQ(back.proto, 253);
  EXPECT_EQ(back.src_port, 0);
  EXPECT_EQ(back.dst_port, 0);
  EXPECT_EQ(ipv4_to_string(back.src_ip), "192.168.2.46");
  EXPECT_EQ(ipv4_to_string(back.dst_ip), "192.168.1.46");
}

TEST(Frame, UdpSourcePort) {
  FirstPacket pkt;
  pkt.src_ip = 1;
  pkt.dst_ip = 2;
  pkt.src_port = 53;
  pkt.dst_port = 40000;
  pkt.proto = kIpProtoUdp;
  pkt.first_len = 60;
  const FirstPacket back = parse_frame(build_frame(pkt));
  EXPECT_EQ(back.src_port, 53);
  EXPECT_EQ(back, pkt);
}

TEST(Frame, ArpIsNonIpv4) {
  Bytes f = captured_packet_in_frame();
  f[12] = 0x08;
  f[13] = 0x06;
  try {
    parse_frame(f);
    FAIL();
  } catch (const WireError& e) {
    EXPECT_EQ(e.code(), WireErrc::kNonIpv4);
  }
}

TEST(Frame, BuiltFrameChecksumVerifies) {
  FirstPacket pkt;
  pkt.src_ip = parse_ipv4("10.1.2.3");
  pkt.dst_ip = parse_ipv4("10.3.2.1");
  pkt.proto = kIpProtoTcp;
  pkt.ttl = 63;
  pkt.tos = 0x10;
  pkt.first_len = 1500;
  const Bytes f = build_frame(pkt);
  ASSERT_GE(f.size(), 60u);
  EXPECT_EQ(testing::ipv4_checksum(ByteView(f).subspan(14, 20)), 0);
}

TEST(Frame, TruncationsNeverOverread) {
  FirstPacket pkt;
  pkt.src_ip = 1;
  pkt.dst_ip = 2;
  pkt.src_port = 1000;
  pkt.dst_port = 443;
  pkt.proto = kIpProtoTcp;
  pkt.first_len = 40;
  const Bytes f = build_frame(pkt);
  // Ethernet + IPv4 + the 4 port bytes is the minimum.
  for (std::size_t n = 0; n < 14 + 20 + 4; ++n) {
    const Bytes cut(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(n));
    try {
      parse_frame(cut);
      FAIL() << "length " << n;
    } catch (const WireError& e) {
      EXPECT_EQ(e.code(), WireErrc::kTruncatedFrame) << "length " << n;
    }
  }
  EXPECT_EQ(parse_frame(ByteView(f).first(38)), pkt);
}

TEST(Ipv4, ParseAndPrint) {
  EXPECT_EQ(parse_ipv4("192.168.2.46"), 0xc0a8022eu);
  EXPECT_EQ(ipv4_to_string(0xc0a8022eu), "192.168.2.46");
  EXPECT_THROW(parse_ipv4("1.2.3"), std::invalid_argument);
  EXPECT_THROW(parse_ipv4("1.2.3.256"), std::invalid_argument);
  EXPECT_THROW(parse_ipv4("a.b.c.d"), std::invalid_argument);
}

}  // namespace
}  // namespace flowpredict::ofwire

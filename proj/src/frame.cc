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

// Ethernet II / IPv4 / TCP / UDP first-packet headers.

#include <array>

#include "byte_io.h"
#include "flowpredict/ofwire.h"

namespace flowpredict::ofwire {

namespace {

constexpr std::size_t kEthHeaderLen = 14;
constexpr std::size_t kIpv4MinHeaderLen = 20;
constexpr std::size_t kUdpHeaderLen = 8;
constexpr std::size_t kMinEthFrame = 60;

// Locally administered MACs; the switch side does not care.
constexpr std::array<std::uint8_t, 6> kDstMac = {0x52, 0x54, 0x00, 0xdc, 0x52, 0x01};
constexpr std::array<std::uint8_t, 6> kSrcMac = {0x52, 0x54, 0x00, 0xdc, 0x53, 0x01};

std::uint16_t ipv4_checksum(std::span<const std::uint8_t> header) {
  std::uint32_t sum = 0;
  for (std::size_t i = 0; i + 1 < header.size(); i += 2) {
    sum += static_cast<std::uint32_t>(header[i] << 8 | header[i + 1]);
  }
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum);
}

}  // namespace

FirstPacket parse_frame(ByteView frame) {
  if (frame.size() < kEthHeaderLen) {
    throw WireError(WireErrc::kTruncatedFrame, "Ethernet header truncated");
  }
  ByteReader eth(frame);
  eth.skip(12);
  const std::uint16_t eth_type = eth.u16();
  if (eth_type != kEthTypeIpv4) {
    throw WireError(WireErrc::kNonIpv4, "ethertype " + std::to_string(eth_type));
  }

  const ByteView ip = frame.subspan(kEthHeaderLen);
  if (ip.size() < kIpv4MinHeaderLen) {
    throw WireError(WireErrc::kTruncatedFrame, "IPv4 header truncated");
  }
  ByteReader r(ip);
  const std::uint8_t ver_ihl = r.u8();
  if ((ver_ihl >> 4) != 4) throw WireError(WireErrc::kNonIpv4, "IP version is not 4");
  const std::size_t ihl = static_cast<std::size_t>(ver_ihl & 0x0f) * 4;
  if (ihl < kIpv4MinHeaderLen) {
    throw WireError(WireErrc::kTruncatedFrame, "IPv4 IHL below 5");
  }
  if (ihl > ip.size()) throw WireError(WireErrc::kTruncatedFrame, "IPv4 options truncated");

  FirstPacket pkt;
  pkt.tos = r.u8();
  pkt.first_len = r.u16();
  if (pkt.first_len < kIpv4MinHeaderLen) {
    throw WireError(WireErrc::kTruncatedFrame, "IPv4 total length below 20");
  }
  r.skip(4);  // identification, flags/fragment offset
  pkt.ttl = r.u8();
  pkt.proto = r.u8();
  r.skip(2);  // checksum
  pkt.src_ip = r.u32();
  pkt.dst_ip = r.u32();

  if (pkt.proto == kIpProtoTcp || pkt.proto == kIpProtoUdp) {
    const ByteView l4 = ip.subspan(ihl);
    if (l4.size() < 4) throw WireError(WireErrc::kTruncatedFrame, "L4 ports truncated");
    ByteReader ports(l4);
    pkt.src_port = ports.u16();
    pkt.dst_port = ports.u16();
  }
  return pkt;
}

Bytes build_frame(const FirstPacket& pkt) {
  ByteWriter w;
  w.bytes(kDstMac);
  w.bytes(kSrcMac);
  w.u16(kEthTypeIpv4);

  const std::size_t ip_start = w.size();
  w.u8(0x45);
  w.u8(pkt.tos);
  w.u16(pkt.first_len);
  w.u16(0);       // identification
  w.u16(0x4000);  // don't fragment
  w.u8(pkt.ttl);
  w.u8(pkt.proto);
  w.u16(0);  // checksum, patched below
  w.u32(pkt.src_ip);
  w.u32(pkt.dst_ip);

  if (pkt.proto == kIpProtoTcp) {
    w.u16(pkt.src_port);
    w.u16(pkt.dst_port);
    w.u32(0);       // seq
    w.u32(0);       // ack
    w.u16(0x5002);  // data offset 5, SYN
    w.u16(0xffff);  // window
    w.u32(0);       // checksum, urgent pointer
  } else if (pkt.proto == kIpProtoUdp) {
    w.u16(pkt.src_port);
    w.u16(pkt.dst_port);
    const std::size_t udp_len = pkt.first_len >= kIpv4MinHeaderLen + kUdpHeaderLen
                                    ? pkt.first_len - kIpv4MinHeaderLen
                                    : kUdpHeaderLen;
    w.u16(static_cast<std::uint16_t>(udp_len));
    w.u16(0);  // checksum optional over IPv4
  }

  if (w.size() < kMinEthFrame) w.zeros(kMinEthFrame - w.size());
  Bytes frame = w.take();
  const auto sum = ipv4_checksum(std::span(frame).subspan(ip_start, kIpv4MinHeaderLen));
  frame[ip_start + 10] = static_cast<std::uint8_t>(sum >> 8);
  frame[ip_start + 11] = static_cast<std::uint8_t>(sum);
  return frame;
}

}  // namespace flowpredict::ofwire

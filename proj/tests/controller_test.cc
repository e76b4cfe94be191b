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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "e2e_scenario.h"
#include "flowpredict/mock_switch.h"

namespace flowpredict::controller {
namespace {

using ofwire::OfMessage;

ofwire::FirstPacket dns_packet() {
  ofwire::FirstPacket p;
  p.src_ip = ofwire::parse_ipv4("10.0.3.7");
  p.dst_ip = ofwire::parse_ipv4("192.168.1.46");
  p.proto = ofwire::kIpProtoUdp;
  p.src_port = 51000;
  p.dst_port = 53;
  p.ttl = 64;
  p.first_len = 61;
  return p;
}

OfMessage packet_in(std::uint32_t xid, const ofwire::FirstPacket& pkt) {
  ofwire::PacketIn p;
  p.total_len = static_cast<std::uint16_t>(14 + pkt.first_len);
  p.match.in_port = 1;
  p.frame = ofwire::build_frame(pkt);
  return OfMessage{xid, p};
}

OfMessage flow_removed(std::uint32_t xid, std::uint64_t cookie, std::uint64_t packets) {
  ofwire::FlowRemoved r;
  r.cookie = cookie;
  r.packet_count = packets;
  r.byte_count = packets * 80;
  return OfMessage{xid, r};
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class CoreTest : public ::testing::Test {
 protected:
  ControllerConfig cfg = testing::scenario_config();
  std::ostringstream log_text;
  std::optional<ControllerCore> core;

  void start() { core.emplace(cfg, testing::scenario_net(), EventLog(&log_text)); }
};

TEST_F(CoreTest, HelloOnConnect) {
  start();
  const auto out = core->on_connect();
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].type(), ofwire::MsgType::kHello);
  EXPECT_EQ(out[0].xid, 1u);
  EXPECT_TRUE(core->handle(OfMessage{1, ofwire::Hello{}}, Timestamp{0}).empty());
}

TEST_F(CoreTest, DnsPacketInInstallsExactFlow) {
  start();
  const ofwire::FirstPacket pkt = dns_packet();
  const auto out = core->handle(packet_in(42, pkt), Timestamp{5});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].xid, 42u);
  const auto* mod = std::get_if<ofwire::FlowMod>(&out[0].body);
  ASSERT_NE(mod, nullptr);
  EXPECT_EQ(mod->match, ofwire::five_tuple_match(pkt));
  EXPECT_NE(mod->flags & ofwire::kFlagSendFlowRem, 0);
  EXPECT_EQ(mod->command, ofwire::FlowModCommand::kAdd);
  EXPECT_EQ(mod->idle_timeout_s, 10);
  EXPECT_EQ(mod->hard_timeout_s, 30);
  EXPECT_EQ(mod->priority, 10000);
  EXPECT_EQ(mod->cookie, 1u);
  const auto predicted = core->trainer().predict(encoder::featurize(pkt));
  EXPECT_EQ(mod->importance, predicted.value());
  EXPECT_EQ(mod->output_port, core->output_port_for(pkt));
  EXPECT_TRUE(mod->output_port == 1 || mod->output_port == 2);

  ASSERT_EQ(core->pending().size(), 1u);
  const PendingFlow& f = core->pending().at(1);
  EXPECT_EQ(f.packet, pkt);
  EXPECT_EQ(f.installed_at, Timestamp{5});
  EXPECT_EQ(core->stats().packet_ins, 1u);
  EXPECT_EQ(core->stats().flow_mods, 1u);
  EXPECT_NE(log_text.str().find("\"event\":\"flow_mod\""), std::string::npos);

  // Every reply survives the codec.
  const ofwire::Bytes b = ofwire::encode_message(out[0]);
  EXPECT_EQ(ofwire::decode_message(b).message, out[0]);
}

TEST_F(CoreTest, CookiesAreFresh) {
  start();
  std::set<std::uint64_t> cookies;
  for (std::uint32_t i = 0; i < 50; ++i) {
    ofwire::FirstPacket p = dns_packet();
    p.src_port = static_cast<std::uint16_t>(1000 + i % 5);  // repeats on purpose
    const auto out = core->handle(packet_in(i, p), Timestamp{0});
    cookies.insert(std::get<ofwire::FlowMod>(out[0].body).cookie);
  }
  EXPECT_EQ(cookies.size(), 50u);
  EXPECT_EQ(core->pending().size(), 50u);
}

TEST_F(CoreTest, FlowRemovedQueuesLabeledSample) {
  start();
  const ofwire::FirstPacket pkt = dns_packet();
  core->handle(packet_in(3, pkt), Timestamp{0});
  EXPECT_TRUE(core->handle(flow_removed(4, 1, 7), Timestamp{0}).empty());
  EXPECT_TRUE(core->pending().empty());
  ASSERT_EQ(core->trainer().queued(), 1u);
  const ffnn::Sample& s = core->trainer().queue()[0];
  const auto want = encoder::one_hot(encoder::label(7));
  EXPECT_EQ(s.target, std::vector<double>(want.begin(), want.end()));
  const auto f = encoder::featurize(pkt);
  EXPECT_EQ(s.input, std::vector<double>(f.begin(), f.end()));
  EXPECT_EQ(core->stats().samples_total, 1u);
  EXPECT_EQ(core->stats().flow_removed, 1u);
}

TEST_F(CoreTest, UnknownCookieChangesNothing) {
  start();
  core->handle(packet_in(3, dns_packet()), Timestamp{0});
  const auto pending_before = core->pending().size();
  const std::size_t lines_before = line_count(log_text.str());
  EXPECT_TRUE(core->handle(flow_removed(4, 999, 7), Timestamp{0}).empty());
  EXPECT_EQ(core->pending().size(), pending_before);
  EXPECT_EQ(core->trainer().queued(), 0u);
  EXPECT_EQ(core->stats().unknown_cookies, 1u);
  EXPECT_EQ(core->stats().samples_total, 0u);
  EXPECT_EQ(line_count(log_text.str()), lines_before + 1);
  EXPECT_NE(log_text.str().find("unknown_cookie"), std::string::npos);
}

TEST_F(CoreTest, ZeroPacketRemovalGivesNoSample) {
  start();
  core->handle(packet_in(3, dns_packet()), Timestamp{0});
  core->handle(flow_removed(4, 1, 0), Timestamp{0});
  EXPECT_TRUE(core->pending().empty());
  EXPECT_EQ(core->trainer().queued(), 0u);
  EXPECT_EQ(core->stats().samples_total, 0u);
}

TEST_F(CoreTest, TrainsEveryTriggerRemovals) {
  cfg.train_trigger = 3;
  start();
  const ffnn::Network before = core->trainer().network();
  for (std::uint32_t i = 0; i < 7; ++i) {
    ofwire::FirstPacket p = dns_packet();
    p.src_port = static_cast<std::uint16_t>(2000 + i);
    core->handle(packet_in(i, p), Timestamp{0});
  }
  for (std::uint64_t c = 1; c <= 7; ++c) core->handle(flow_removed(0, c, c * 3), Timestamp{0});
  EXPECT_EQ(core->stats().train_flushes, 2u);
  EXPECT_EQ(core->trainer().queued(), 1u);
  EXPECT_NE(core->trainer().network(), before);
  EXPECT_NE(log_text.str().find("\"event\":\"train_flush\""), std::string::npos);
}

TEST_F(CoreTest, ShutdownFlushesAndCheckpoints) {
  const std::string path =
      (std::filesystem::temp_directory_path() / "flowpredict_ckpt_test.bin").string();
  std::filesystem::remove(path);
  cfg.model_path = path;
  start();
  core->handle(packet_in(1, dns_packet()), Timestamp{0});
  core->handle(flow_removed(2, 1, 2), Timestamp{0});
  ASSERT_EQ(core->trainer().queued(), 1u);
  core->shutdown();
  EXPECT_EQ(core->trainer().queued(), 0u);
  EXPECT_EQ(core->stats().train_flushes, 1u);
  EXPECT_EQ(ffnn::load_file(path), core->trainer().network());
  EXPECT_NE(log_text.str().find("\"event\":\"checkpoint\""), std::string::npos);
  std::filesystem::remove(path);
}

TEST_F(CoreTest, EchoAnswered) {
  start();
  const ofwire::Bytes payload = {1, 2, 3};
  const auto out = core->handle(OfMessage{77, ofwire::EchoRequest{payload}}, Timestamp{0});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].xid, 77u);
  EXPECT_EQ(std::get<ofwire::EchoReply>(out[0].body).payload, payload);
}

TEST_F(CoreTest, MalformedFrameSkipped) {
  start();
  OfMessage m = packet_in(9, dns_packet());
  auto& p = std::get<ofwire::PacketIn>(m.body);
  p.frame[12] = 0x08;
  p.frame[13] = 0x06;  // ARP
  EXPECT_TRUE(core->handle(m, Timestamp{0}).empty());
  p.frame.resize(20);
  EXPECT_TRUE(core->handle(m, Timestamp{0}).empty());
  EXPECT_EQ(core->stats().malformed_frames, 2u);
  EXPECT_EQ(core->stats().flow_mods, 0u);
  EXPECT_TRUE(core->pending().empty());
}

TEST_F(CoreTest, WrongDirectionMessageRejected) {
  start();
  ofwire::FlowMod mod;
  mod.cookie = 5;
  const auto out = core->handle(OfMessage{11, mod}, Timestamp{0});
  ASSERT_EQ(out.size(), 1u);
  const auto& e = std::get<ofwire::Error>(out[0].body);
  EXPECT_EQ(out[0].xid, 11u);
  EXPECT_EQ(e.type, ofwire::kErrBadRequest);
  EXPECT_EQ(e.code, ofwire::kBadRequestBadType);
  EXPECT_EQ(core->stats().errors_sent, 1u);
}

TEST_F(CoreTest, ErrorReceivedCounted) {
  start();
  EXPECT_TRUE(core->handle(OfMessage{3, ofwire::Error{1, 2, {}}}, Timestamp{0}).empty());
  EXPECT_EQ(core->stats().errors_received, 1u);
}

struct ErrorCase {
  ofwire::Bytes raw;
  std::uint16_t type;
  std::uint16_t code;
};

TEST_F(CoreTest, ProtocolErrorMapping) {
  start();
  const ofwire::Bytes hello_v1 = {0x01, 0x00, 0x00, 0x08, 0x00, 0x00, 0x00, 0x21};
  const ofwire::Bytes echo_v3 = {0x03, 0x02, 0x00, 0x08, 0x00, 0x00, 0x00, 0x22};
  const ofwire::Bytes short_len = {0x05, 0x00, 0x00, 0x04, 0x00, 0x00, 0x00, 0x23};
  const ofwire::Bytes type5 = {0x05, 0x05, 0x00, 0x08, 0x00, 0x00, 0x00, 0x24};
  ofwire::Bytes bad_oxm = ofwire::encode_message(packet_in(0x25, dns_packet()));
  bad_oxm[30] = 0x7e;  // OXM field id 63
  ofwire::Bytes truncated_body = ofwire::encode_message(flow_removed(0x26, 1, 1));
  truncated_body.resize(40);
  truncated_body[2] = 0;
  truncated_body[3] = 40;
  const std::vector<ErrorCase> cases = {
      {hello_v1, ofwire::kErrHelloFailed, ofwire::kHelloFailedIncompatible},
      {echo_v3, ofwire::kErrBadRequest, ofwire::kBadRequestBadVersion},
      {short_len, ofwire::kErrBadRequest, ofwire::kBadRequestBadLen},
      {type5, ofwire::kErrBadRequest, ofwire::kBadRequestBadType},
      {bad_oxm, ofwire::kErrBadMatch, ofwire::kBadMatchBadField},
      {truncated_body, ofwire::kErrBadRequest, ofwire::kBadRequestBadLen},
  };
  for (const ErrorCase& c : cases) {
    try {
      ofwire::decode_message(c.raw);
      ADD_FAILURE() << "decoded " << ofwire::to_hex(c.raw);
    } catch (const ofwire::WireError& e) {
      const OfMessage reply = core->protocol_error(e, c.raw);
      const auto& err = std::get<ofwire::Error>(reply.body);
      EXPECT_EQ(err.type, c.type) << ofwire::to_hex(c.raw);
      EXPECT_EQ(err.code, c.code) << ofwire::to_hex(c.raw);
      EXPECT_EQ(reply.xid, (std::uint32_t{c.raw[6]} << 8) | c.raw[7]);
      const std::size_t echoed = std::min<std::size_t>(64, c.raw.size());
      EXPECT_EQ(err.data, ofwire::Bytes(c.raw.begin(), c.raw.begin() + echoed));
    }
  }
  EXPECT_EQ(core->stats().errors_sent, cases.size());
}

TEST(Config, Validate) {
  ControllerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.train_trigger = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ControllerConfig{};
  c.output_ports.clear();
  EXPECT_THROW(c.validate(), std::invalid_argument);
  ffnn::NetworkConfig nc;
  nc.dims = {16, 4};
  EXPECT_THROW(ControllerCore(ControllerConfig{}, ffnn::Network::init(nc, 1)),
               std::invalid_argument);
}

TEST(OutputPort, DeterministicAndSpread) {
  ControllerConfig c;
  c.output_ports = {3, 4, 9};
  ControllerCore core(c, testing::scenario_net());
  std::set<std::uint32_t> seen;
  for (std::uint16_t sp = 0; sp < 200; ++sp) {
    ofwire::FirstPacket p = dns_packet();
    p.src_port = sp;
    const std::uint32_t port = core.output_port_for(p);
    EXPECT_EQ(port, core.output_port_for(p));
    seen.insert(port);
  }
  EXPECT_EQ(seen, (std::set<std::uint32_t>{3, 4, 9}));
}

TEST(MockSwitch, LoopbackConservation) {
  const auto trace = testing::scenario_trace(1000);
  const auto r = testing::run_loopback(trace);
  EXPECT_TRUE(r.report.completed) << r.report.error;
  EXPECT_EQ(r.report.packet_ins_sent, 1000u);
  EXPECT_EQ(r.stats.packet_ins, 1000u);
  EXPECT_EQ(r.stats.flow_mods, 1000u);
  EXPECT_EQ(r.stats.flows_created, 1000u);
  EXPECT_EQ(r.report.flow_mods_received, 1000u);
  EXPECT_EQ(r.report.flows_installed, 1000u);
  EXPECT_EQ(r.report.evictions, 0u);
  EXPECT_EQ(r.report.flow_removed_sent, 1000u);
  EXPECT_EQ(r.stats.flow_removed, 1000u);
  EXPECT_EQ(r.stats.samples_total, 1000u);
  EXPECT_EQ(r.stats.unknown_cookies, 0u);
  EXPECT_EQ(r.stats.errors_sent, 0u);
  EXPECT_EQ(r.pending, 0u);
  EXPECT_EQ(r.stats.train_flushes, 1000u / 256);
  EXPECT_EQ(r.queued, 1000u % 256);
}

TEST(MockSwitch, SmallTableEvictsLowestImportance) {
  const auto trace = testing::scenario_trace(2000);
  ControllerCore core(testing::scenario_config(), testing::scenario_net());
  LoopbackChannel inner(core);
  testing::EvictionAudit audit(inner);
  MockSwitchConfig sw;
  sw.table_capacity = 16;
  const MockReport rep = run_mock_switch(audit, trace, sw);
  EXPECT_TRUE(rep.completed) << rep.error;
  EXPECT_GT(rep.evictions, 0u);
  EXPECT_EQ(audit.evictions(), rep.evictions);
  EXPECT_EQ(audit.violations(), 0u);
  EXPECT_EQ(rep.expirations + rep.evictions, 2000u);
  // Evictions still report counters, so nothing is lost for training.
  EXPECT_EQ(core.stats().samples_total, 2000u);
  EXPECT_TRUE(core.pending().empty());
}

TEST(MockSwitch, DisconnectGivesPartialReport) {
  ControllerCore core(testing::scenario_config(), testing::scenario_net());
  LoopbackChannel ch(core);
  ch.receive();  // steal the HELLO so the handshake never completes
  const auto trace = testing::scenario_trace(10);
  const MockReport rep = run_mock_switch(ch, trace);
  EXPECT_FALSE(rep.completed);
  EXPECT_FALSE(rep.error.empty());
}

TEST(MockSwitch, TranscriptDeterministic) {
  const auto trace = testing::scenario_trace(300);
  const auto a = testing::run_loopback(trace);
  const auto b = testing::run_loopback(trace);
  EXPECT_EQ(a.transcript, b.transcript);
  EXPECT_EQ(a.transcript.front().rfind("s>c HELLO xid=1 ", 0), 0u);
}

std::string joined(const Transcript& t) {
  std::string s;
  for (const auto& line : t) s += line + "\n";
  return s;
}

// Set FLOWPREDICT_UPDATE_GOLDEN=1 to rewrite the files after an intended
// protocol or model change.
TEST(Golden, LoopbackTranscript) {
  const auto small = testing::run_loopback(testing::scenario_trace(50));
  const auto big = testing::run_loopback(testing::scenario_trace(1000));
  const std::string text = joined(small.transcript);
  const std::string digest = testing::hex64(transcript_digest(big.transcript)) + "\n";
  const std::string text_path = testing::golden_path("loopback_50.transcript");
  const std::string digest_path = testing::golden_path("loopback_1000.digest");
  if (testing::update_golden()) {
    std::ofstream(text_path, std::ios::binary) << text;
    std::ofstream(digest_path, std::ios::binary) << digest;
    GTEST_SKIP() << "golden files rewritten";
  }
  const auto want_text = testing::read_text(text_path);
  const auto want_digest = testing::read_text(digest_path);
  ASSERT_TRUE(want_text && want_digest) << "missing golden files";
  EXPECT_EQ(text, *want_text);
  EXPECT_EQ(digest, *want_digest);
}

TEST(Tcp, MatchesLoopback) {
  const auto trace = testing::scenario_trace(1000);
  const auto tcp = testing::run_tcp(trace);
  const auto loop = testing::run_loopback(trace);
  EXPECT_TRUE(tcp.report.completed) << tcp.report.error;
  EXPECT_EQ(tcp.transcript, loop.transcript);
  EXPECT_EQ(tcp.stats.samples_total, 1000u);
  EXPECT_EQ(tcp.pending, 0u);
  // run() trains the leftovers on shutdown.
  EXPECT_EQ(tcp.queued, 0u);
  EXPECT_EQ(tcp.stats.train_flushes, loop.stats.train_flushes + 1);
}

TEST(Tcp, GarbageStreamGetsErrorAndHangup) {
  Controller ctl(testing::scenario_config(), testing::scenario_net());
  const std::uint16_t port = ctl.bind();
  EXPECT_NE(port, 0);
  std::atomic<bool> stop{false};
  std::thread server([&] { ctl.run(stop, true); });
  {
    auto ch = connect_tcp("127.0.0.1", port);
    EXPECT_EQ(ch->receive().type(), ofwire::MsgType::kHello);
    ch->send(OfMessage{1, ofwire::Hello{}});
    ofwire::FlowMod mod;
    ch->send(OfMessage{2, mod});
    const OfMessage e = ch->receive();
    EXPECT_EQ(e.type(), ofwire::MsgType::kError);
    EXPECT_EQ(e.xid, 2u);
  }
  server.join();
  EXPECT_EQ(ctl.core().stats().errors_sent, 1u);
}

}  // namespace
}  // namespace flowpredict::controller

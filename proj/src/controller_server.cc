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

#include <poll.h>

#include <array>
#include <chrono>
#include <list>
#include <system_error>

#include "flowpredict/controller.h"
#include "json.hpp"
#include "net_io.h"

namespace flowpredict::controller {

namespace {

constexpr int kPollTimeoutMs = 50;
constexpr std::size_t kReadChunk = 64 * 1024;

struct Connection {
  net::UniqueFd fd;
  ofwire::Bytes inbuf;
  bool open = true;
};

}  // namespace

struct Controller::Impl {
  net::UniqueFd listener;
  std::list<Connection> conns;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  EventLog log;

  Timestamp now() const {
    return std::chrono::duration_cast<Timestamp>(std::chrono::steady_clock::now() - start);
  }
};

Controller::Controller(ControllerConfig cfg, ffnn::Network net, EventLog log)
    : core_(std::move(cfg), std::move(net), log), impl_(std::make_unique<Impl>()) {
  impl_->log = log;
}

Controller::~Controller() = default;

std::uint16_t Controller::bind() {
  const ControllerConfig& cfg = core_.config();
  impl_->listener = net::listen_tcp(cfg.listen_host, cfg.listen_port);
  const std::uint16_t port = net::local_port(impl_->listener.get());
  impl_->log.write(
      nlohmann::json{{"event", "listening"}, {"host", cfg.listen_host}, {"port", port}}.dump());
  return port;
}

void Controller::run(const std::atomic<bool>& stop, bool once) {
  if (!impl_->listener.valid()) bind();
  Impl& s = *impl_;

  auto send = [](Connection& c, const std::vector<ofwire::OfMessage>& msgs) {
    try {
      for (const auto& m : msgs) net::send_all(c.fd.get(), ofwire::encode_message(m));
    } catch (const std::system_error&) {
      c.open = false;
    }
  };

  // Frames and dispatches every complete message in the buffer.
  auto drain = [&](Connection& c) {
    std::size_t off = 0;
    while (c.open) {
      const ofwire::ByteView rest(c.inbuf.data() + off, c.inbuf.size() - off);
      std::optional<std::size_t> len;
      try {
        len = ofwire::peek_message_length(rest);
      } catch (const ofwire::WireError& e) {
        // Unframeable stream: report and hang up.
        send(c, {core_.protocol_error(e, rest)});
        c.open = false;
        break;
      }
      if (!len || rest.size() < *len) break;
      const ofwire::ByteView raw = rest.first(*len);
      std::vector<ofwire::OfMessage> replies;
      try {
        replies = core_.handle(ofwire::decode_message(raw).message, s.now());
      } catch (const ofwire::WireError& e) {
        replies = {core_.protocol_error(e, raw)};
      }
      send(c, replies);
      off += *len;
    }
    c.inbuf.erase(c.inbuf.begin(), c.inbuf.begin() + static_cast<std::ptrdiff_t>(off));
  };

  std::vector<pollfd> fds;
  std::array<std::uint8_t, kReadChunk> chunk{};
  bool served = false;
  while (!stop.load() && !(once && served && s.conns.empty())) {
    fds.clear();
    fds.push_back({s.listener.get(), POLLIN, 0});
    for (const Connection& c : s.conns) fds.push_back({c.fd.get(), POLLIN, 0});
    const int ready = ::poll(fds.data(), fds.size(), kPollTimeoutMs);
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw std::system_error(errno, std::generic_category(), "poll");
    }
    if (ready == 0) continue;

    std::size_t i = 1;
    for (Connection& c : s.conns) {
      const short ev = fds[i++].revents;
      if ((ev & (POLLIN | POLLHUP | POLLERR)) == 0) continue;
      std::size_t n = 0;
      try {
        n = net::recv_some(c.fd.get(), chunk);
      } catch (const std::system_error&) {
        n = 0;
      }
      if (n == 0) {
        c.open = false;
        continue;
      }
      c.inbuf.insert(c.inbuf.end(), chunk.begin(), chunk.begin() + static_cast<std::ptrdiff_t>(n));
      drain(c);
    }
    for (auto it = s.conns.begin(); it != s.conns.end();) {
      if (it->open) {
        ++it;
      } else {
        s.log.write(nlohmann::json{{"event", "disconnect"}}.dump());
        it = s.conns.erase(it);
      }
    }

    if (fds[0].revents & POLLIN) {
      Connection c;
      try {
        c.fd = net::accept_tcp(s.listener.get());
      } catch (const std::system_error&) {
        continue;
      }
      s.log.write(nlohmann::json{{"event", "connect"}}.dump());
      send(c, core_.on_connect());
      s.conns.push_back(std::move(c));
      served = true;
    }
  }
  s.conns.clear();
  core_.shutdown();
}

}  // namespace flowpredict::controller

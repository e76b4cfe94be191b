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

// Thin POSIX TCP helpers. Errors throw std::system_error.

#ifndef FLOWPREDICT_SRC_NET_IO_H_
#define FLOWPREDICT_SRC_NET_IO_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>

namespace flowpredict::net {

class UniqueFd {
 public:
  UniqueFd() = default;
  explicit UniqueFd(int fd) : fd_(fd) {}
  ~UniqueFd() { reset(); }
  UniqueFd(UniqueFd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  UniqueFd& operator=(UniqueFd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  UniqueFd(const UniqueFd&) = delete;
  UniqueFd& operator=(const UniqueFd&) = delete;

  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void reset();

 private:
  int fd_ = -1;
};

UniqueFd listen_tcp(const std::string& host, std::uint16_t port);
std::uint16_t local_port(int fd);
UniqueFd accept_tcp(int listen_fd);
UniqueFd connect_tcp(const std::string& host, std::uint16_t port);

void send_all(int fd, std::span<const std::uint8_t> bytes);
// Returns 0 on orderly shutdown.
std::size_t recv_some(int fd, std::span<std::uint8_t> buf);

}  // namespace flowpredict::net

#endif  // FLOWPREDICT_SRC_NET_IO_H_

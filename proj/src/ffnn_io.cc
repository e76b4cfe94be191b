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

// Model file layout (all integers little-endian, doubles as IEEE-754 bits):
//
//   "FPNN" | u32 version=1 | u8 loss | f64 dropout | u32 layer_count
//   per layer: u64 in | u64 out | u8 activation
//              f64[in*out] weights | f64[out] bias
//              f64[in*out] E[g^2] | f64[in*out] E[dx^2]
//              f64[out] E[g^2] | f64[out] E[dx^2]

#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>

#include "flowpredict/ffnn.h"

namespace flowpredict::ffnn {

namespace {

constexpr std::array<char, 4> kMagic = {'F', 'P', 'N', 'N'};
constexpr std::uint32_t kFormatVersion = 1;
// Guards against absurd allocations from a corrupt header.
constexpr std::uint64_t kMaxLayerWidth = 1u << 20;

[[noreturn]] void bad(const std::string& what) {
  throw FfnnError(FfnnErrc::kBadModelFile, "model file: " + what);
}

template <typename T>
void put_le(std::ostream& out, T v) {
  std::array<char, sizeof(T)> buf;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<char>(static_cast<std::uint64_t>(v) >> (8 * i) & 0xff);
  }
  out.write(buf.data(), buf.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> buf;
  if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size())) bad("unexpected end of file");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return static_cast<T>(v);
}

void put_doubles(std::ostream& out, const std::vector<double>& v) {
  for (double d : v) put_le(out, std::bit_cast<std::uint64_t>(d));
}

std::vector<double> get_doubles(std::istream& in, std::size_t n) {
  std::vector<double> v(n);
  for (double& d : v) d = std::bit_cast<double>(get_le<std::uint64_t>(in));
  return v;
}

}  // namespace

void save(const Network& net, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  put_le(out, kFormatVersion);
  put_le(out, static_cast<std::uint8_t>(net.loss_mode()));
  put_le(out, std::bit_cast<std::uint64_t>(net.dropout()));
  put_le(out, static_cast<std::uint32_t>(net.layers().size()));
  for (const Layer& l : net.layers()) {
    put_le(out, static_cast<std::uint64_t>(l.in));
    put_le(out, static_cast<std::uint64_t>(l.out));
    put_le(out, static_cast<std::uint8_t>(l.act));
    put_doubles(out, l.weights);
    put_doubles(out, l.bias);
    put_doubles(out, l.sq_grad_w);
    put_doubles(out, l.sq_delta_w);
    put_doubles(out, l.sq_grad_b);
    put_doubles(out, l.sq_delta_b);
  }
  if (!out) throw FfnnError(FfnnErrc::kBadModelFile, "model file: write failed");
}

Network load(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) bad("bad magic");
  if (get_le<std::uint32_t>(in) != kFormatVersion) bad("unsupported version");

  Network net;
  const auto loss = get_le<std::uint8_t>(in);
  if (loss > static_cast<std::uint8_t>(LossMode::kCce)) bad("bad loss mode");
  net.loss_ = static_cast<LossMode>(loss);
  const double dropout = std::bit_cast<double>(get_le<std::uint64_t>(in));
  if (!(dropout >= 0.0 && dropout < 1.0)) bad("bad dropout rate");
  net.dropout_ = dropout;

  const auto count = get_le<std::uint32_t>(in);
  if (count == 0) bad("no layers");
  for (std::uint32_t k = 0; k < count; ++k) {
    Layer l;
    const auto in_n = get_le<std::uint64_t>(in);
    const auto out_n = get_le<std::uint64_t>(in);
    if (in_n == 0 || out_n == 0 || in_n > kMaxLayerWidth || out_n > kMaxLayerWidth) {
      bad("bad layer shape");
    }
    if (!net.layers_.empty() && net.layers_.back().out != in_n) bad("layer shapes do not chain");
    l.in = in_n;
    l.out = out_n;
    const auto act = get_le<std::uint8_t>(in);
    if (act > static_cast<std::uint8_t>(Activation::kRelu)) bad("bad activation");
    l.act = static_cast<Activation>(act);
    l.weights = get_doubles(in, l.in * l.out);
    l.bias = get_doubles(in, l.out);
    l.sq_grad_w = get_doubles(in, l.in * l.out);
    l.sq_delta_w = get_doubles(in, l.in * l.out);
    l.sq_grad_b = get_doubles(in, l.out);
    l.sq_delta_b = get_doubles(in, l.out);
    net.layers_.push_back(std::move(l));
  }
  if (in.peek() != std::char_traits<char>::eof()) bad("trailing bytes");
  return net;
}

void save_file(const Network& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FfnnError(FfnnErrc::kBadModelFile, "cannot open '" + path + "' for writing");
  save(net, out);
}

Network load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FfnnError(FfnnErrc::kBadModelFile, "cannot open '" + path + "'");
  return load(in);
}

}  // namespace flowpredict::ffnn

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

// Fully connected feed-forward classifier trained with per-sample
// backpropagation and Adadelta.
//
// Layer l maps O^{l-1} (size dims[l-1]) to O^l (size dims[l]):
//   x^l = O^{l-1} W^l + theta^l,   O^l = act(x^l) [* dropout mask]
// Weights are stored row-major, weights[i * out + j] connecting input node i
// to output node j. Hidden layers use inverted dropout in training mode.
//
// A Network is not internally synchronized. Eval-mode forward() and predict()
// only read it, so a const snapshot may be shared across threads.

#ifndef FLOWPREDICT_FFNN_H_
#define FLOWPREDICT_FFNN_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "flowpredict/encoder.h"

namespace flowpredict::ffnn {

enum class Activation : std::uint8_t { kSigmoid = 0, kRelu = 1 };
enum class LossMode : std::uint8_t { kMse = 0, kCce = 1 };

const char* to_string(Activation a);
const char* to_string(LossMode m);
LossMode parse_loss_mode(const std::string& text);

double activate(Activation kind, double x);
double activate_deriv(Activation kind, double x);

// Lower clamp applied to outputs before the cross-entropy log.
inline constexpr double kCceEpsilon = 1e-7;

enum class FfnnErrc {
  kBadDims,
  kDimMismatch,
  kStaleTrace,
  kShapeMismatch,
  kEmptyDataset,
  kBadModelFile,
};

class FfnnError : public std::runtime_error {
 public:
  FfnnError(FfnnErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  FfnnErrc code() const noexcept { return code_; }

 private:
  FfnnErrc code_;
};

struct NetworkConfig {
  std::vector<std::size_t> dims = {16, 50, 50, 50, 5};
  Activation hidden = Activation::kRelu;
  Activation output = Activation::kSigmoid;
  double dropout = 0.2;
  LossMode loss = LossMode::kCce;
};

struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation act = Activation::kSigmoid;
  std::vector<double> weights;  // in * out
  std::vector<double> bias;     // out
  // Adadelta running averages E[g^2] and E[dx^2].
  std::vector<double> sq_grad_w;
  std::vector<double> sq_delta_w;
  std::vector<double> sq_grad_b;
  std::vector<double> sq_delta_b;

  double& w(std::size_t i, std::size_t j) { return weights[i * out + j]; }
  double w(std::size_t i, std::size_t j) const { return weights[i * out + j]; }

  bool operator==(const Layer&) const = default;
};

class Network {
 public:
  // Glorot-uniform weights, zero biases and accumulators. Throws
  // FfnnError(kBadDims) unless dims has >= 2 entries, all >= 1, and
  // 0 <= dropout < 1.
  static Network init(const NetworkConfig& cfg, std::uint64_t seed);

  std::vector<std::size_t> dims() const;
  std::size_t input_size() const { return layers_.front().in; }
  std::size_t output_size() const { return layers_.back().out; }
  std::size_t parameter_count() const;

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  double dropout() const { return dropout_; }
  void set_dropout(double p);
  LossMode loss_mode() const { return loss_; }
  void set_loss_mode(LossMode m) { loss_ = m; }

  bool operator==(const Network&) const = default;

 private:
  friend Network load(std::istream& in);

  std::vector<Layer> layers_;
  double dropout_ = 0.0;
  LossMode loss_ = LossMode::kCce;
};

struct Eval {};
struct Train {
  std::uint64_t seed = 0;
};
using Mode = std::variant<Eval, Train>;

struct ForwardTrace {
  // activations[0] is the input; activations[l] is O^l after dropout.
  std::vector<std::vector<double>> activations;
  // pre_activations[l-1] is x^l.
  std::vector<std::vector<double>> pre_activations;
  // masks[l-1] holds the scaled dropout multipliers of layer l: 0 or 1/(1-p)
  // in training mode, all ones in eval mode and for the output layer.
  std::vector<std::vector<double>> masks;

  std::span<const double> outputs() const { return activations.back(); }
};

ForwardTrace forward(const Network& net, std::span<const double> input, const Mode& mode);

// MSE: 0.5 * sum (q - t)^2.
// CCE: -sum t_k ln(c_k / sum c), c = clamp(q, kCceEpsilon, 1).
double loss(std::span<const double> outputs, std::span<const double> target, LossMode mode);

struct LayerGradients {
  std::vector<double> weights;
  std::vector<double> bias;  // equals the layer's deltas

  bool operator==(const LayerGradients&) const = default;
};

struct Gradients {
  std::vector<LayerGradients> layers;
};

// dE/dW and dE/dtheta for the network's loss mode. Throws
// FfnnError(kStaleTrace) if the trace does not fit the network.
Gradients backprop(const Network& net, const ForwardTrace& trace, std::span<const double> target);

struct AdadeltaParams {
  double rho = 0.95;
  double epsilon = 1e-6;
};

void adadelta_step(Network& net, const Gradients& grads, const AdadeltaParams& params = {});

struct Sample {
  std::vector<double> input;
  std::vector<double> target;
};

Sample make_sample(const encoder::FeatureVector& input, encoder::ClassLabel label);

// One online pass: shuffle with `seed`, then forward(Train), backprop and
// adadelta_step per sample. Returns the mean loss measured before each update.
double train_epoch(Network& net, std::span<const Sample> samples, std::uint64_t seed,
                   const AdadeltaParams& params = {});

// decode_one_hot(forward(net, input, Eval).outputs()); needs 5 outputs.
encoder::ClassLabel predict(const Network& net, std::span<const double> input);

// Versioned little-endian binary dump of configuration, parameters and
// optimizer state. load(save(net)) == net exactly.
void save(const Network& net, std::ostream& out);
Network load(std::istream& in);
void save_file(const Network& net, const std::string& path);
Network load_file(const std::string& path);

}  // namespace flowpredict::ffnn

#endif  // FLOWPREDICT_FFNN_H_

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

#include "flowpredict/ffnn.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace flowpredict::ffnn {

namespace {

constexpr double kAccumulatorFloor = 1e-30;

void check_dropout(double p) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw FfnnError(FfnnErrc::kBadDims, "dropout rate must be in [0, 1)");
  }
}

// dH/dq for the normalized cross-entropy, before the activation derivative.
double cce_output_grad(double q, double t, double clamped_sum, double target_sum) {
  const double c = std::clamp(q, kCceEpsilon, 1.0);
  const double dh_dc = -t / c + target_sum / clamped_sum;
  // The clamp has zero slope outside (epsilon, 1].
  return q > kCceEpsilon && q <= 1.0 ? dh_dc : 0.0;
}

}  // namespace

const char* to_string(Activation a) {
  switch (a) {
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kRelu: return "relu";
  }
  return "?";
}

const char* to_string(LossMode m) {
  switch (m) {
    case LossMode::kMse: return "mse";
    case LossMode::kCce: return "cce";
  }
  return "?";
}

LossMode parse_loss_mode(const std::string& text) {
  if (text == "mse") return LossMode::kMse;
  if (text == "cce") return LossMode::kCce;
  throw std::invalid_argument("loss mode must be 'mse' or 'cce', got '" + text + "'");
}

double activate(Activation kind, double x) {
  switch (kind) {
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Activation::kRelu: return x > 0.0 ? x : 0.0;
  }
  return 0.0;
}

double activate_deriv(Activation kind, double x) {
  switch (kind) {
    case Activation::kSigmoid: {
      const double s = activate(Activation::kSigmoid, x);
      return s * (1.0 - s);
    }
    case Activation::kRelu: return x > 0.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

Network Network::init(const NetworkConfig& cfg, std::uint64_t seed) {
  if (cfg.dims.size() < 2) throw FfnnError(FfnnErrc::kBadDims, "need at least 2 layer sizes");
  for (std::size_t d : cfg.dims) {
    if (d < 1) throw FfnnError(FfnnErrc::kBadDims, "layer sizes must be >= 1");
  }
  check_dropout(cfg.dropout);

  Network net;
  net.dropout_ = cfg.dropout;
  net.loss_ = cfg.loss;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 1; l < cfg.dims.size(); ++l) {
    Layer layer;
    layer.in = cfg.dims[l - 1];
    layer.out = cfg.dims[l];
    layer.act = l + 1 == cfg.dims.size() ? cfg.output : cfg.hidden;
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    layer.weights.resize(layer.in * layer.out);
    for (double& w : layer.weights) w = dist(rng);
    layer.bias.assign(layer.out, 0.0);
    layer.sq_grad_w.assign(layer.weights.size(), 0.0);
    layer.sq_delta_w.assign(layer.weights.size(), 0.0);
    layer.sq_grad_b.assign(layer.out, 0.0);
    layer.sq_delta_b.assign(layer.out, 0.0);
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

std::vector<std::size_t> Network::dims() const {
  std::vector<std::size_t> d;
  d.push_back(layers_.front().in);
  for (const Layer& l : layers_) d.push_back(l.out);
  return d;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

void Network::set_dropout(double p) {
  check_dropout(p);
  dropout_ = p;
}

ForwardTrace forward(const Network& net, std::span<const double> input, const Mode& mode) {
  if (input.size() != net.input_size()) {
    throw FfnnError(FfnnErrc::kDimMismatch, "input has " + std::to_string(input.size()) +
                                                " values, network expects " +
                                                std::to_string(net.input_size()));
  }
  const auto& layers = net.layers();
  const Train* train = std::get_if<Train>(&mode);
  const double p = net.dropout();
  const bool dropout = train != nullptr && p > 0.0;
  std::mt19937_64 rng(train ? train->seed : 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - p);

  ForwardTrace trace;
  trace.activations.reserve(layers.size() + 1);
  trace.pre_activations.reserve(layers.size());
  trace.masks.reserve(layers.size());
  trace.activations.emplace_back(input.begin(), input.end());

  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    const std::vector<double>& prev = trace.activations.back();
    std::vector<double> x(layer.bias);
    for (std::size_t i = 0; i < layer.in; ++i) {
      const double o = prev[i];
      if (o == 0.0) continue;
      const double* row = &layer.weights[i * layer.out];
      for (std::size_t j = 0; j < layer.out; ++j) x[j] += o * row[j];
    }
    std::vector<double> mask(layer.out, 1.0);
    const bool hidden = l + 1 < layers.size();
    if (hidden && dropout) {
      for (double& m : mask) m = unit(rng) < p ? 0.0 : keep_scale;
    }
    std::vector<double> o(layer.out);
    for (std::size_t j = 0; j < layer.out; ++j) o[j] = activate(layer.act, x[j]) * mask[j];
    trace.pre_activations.push_back(std::move(x));
    trace.masks.push_back(std::move(mask));
    trace.activations.push_back(std::move(o));
  }
  return trace;
}

double loss(std::span<const double> q, std::span<const double> t, LossMode mode) {
  if (q.size() != t.size()) {
    throw FfnnError(FfnnErrc::kDimMismatch, "outputs and target differ in size");
  }
  if (mode == LossMode::kMse) {
    double e = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) e += (q[k] - t[k]) * (q[k] - t[k]);
    return 0.5 * e;
  }
  double sum = 0.0;
  for (double v : q) sum += std::clamp(v, kCceEpsilon, 1.0);
  double h = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (t[k] == 0.0) continue;
    h -= t[k] * std::log(std::clamp(q[k], kCceEpsilon, 1.0) / sum);
  }
  return h;
}

Gradients backprop(const Network& net, const ForwardTrace& trace, std::span<const double> target) {
  const auto& layers = net.layers();
  const std::size_t n = layers.size();
  if (trace.activations.size() != n + 1 || trace.pre_activations.size() != n ||
      trace.masks.size() != n) {
    throw FfnnError(FfnnErrc::kStaleTrace, "trace depth does not match network");
  }
  for (std::size_t l = 0; l < n; ++l) {
    if (trace.activations[l].size() != layers[l].in ||
        trace.pre_activations[l].size() != layers[l].out ||
        trace.masks[l].size() != layers[l].out ||
        trace.activations[l + 1].size() != layers[l].out) {
      throw FfnnError(FfnnErrc::kStaleTrace, "trace shape does not match network");
    }
  }
  if (target.size() != net.output_size()) {
    throw FfnnError(FfnnErrc::kDimMismatch, "target size does not match output layer");
  }

  const Layer& out_layer = layers.back();
  const std::vector<double>& q = trace.activations.back();
  const std::vector<double>& x_out = trace.pre_activations.back();
  std::vector<double> delta(out_layer.out);
  if (net.loss_mode() == LossMode::kMse) {
    for (std::size_t k = 0; k < delta.size(); ++k) {
      delta[k] = (q[k] - target[k]) * activate_deriv(out_layer.act, x_out[k]);
    }
  } else {
    double clamped_sum = 0.0;
    for (double v : q) clamped_sum += std::clamp(v, kCceEpsilon, 1.0);
    const double target_sum = std::accumulate(target.begin(), target.end(), 0.0);
    for (std::size_t k = 0; k < delta.size(); ++k) {
      delta[k] = cce_output_grad(q[k], target[k], clamped_sum, target_sum) *
                 activate_deriv(out_layer.act, x_out[k]);
    }
  }

  Gradients grads;
  grads.layers.resize(n);
  for (std::size_t l = n; l-- > 0;) {
    const Layer& layer = layers[l];
    const std::vector<double>& prev = trace.activations[l];
    LayerGradients& g = grads.layers[l];
    g.weights.resize(layer.weights.size());
    for (std::size_t i = 0; i < layer.in; ++i) {
      double* row = &g.weights[i * layer.out];
      for (std::size_t j = 0; j < layer.out; ++j) row[j] = prev[i] * delta[j];
    }
    if (l > 0) {
      const Layer& below = layers[l - 1];
      const std::vector<double>& x = trace.pre_activations[l - 1];
      const std::vector<double>& mask = trace.masks[l - 1];
      std::vector<double> next(layer.in);
      for (std::size_t i = 0; i < layer.in; ++i) {
        if (mask[i] == 0.0) continue;
        const double* row = &layer.weights[i * layer.out];
        double s = 0.0;
        for (std::size_t j = 0; j < layer.out; ++j) s += row[j] * delta[j];
        next[i] = activate_deriv(below.act, x[i]) * mask[i] * s;
      }
      g.bias = std::move(delta);
      delta = std::move(next);
    } else {
      g.bias = std::move(delta);
    }
  }
  return grads;
}

void adadelta_step(Network& net, const Gradients& grads, const AdadeltaParams& params) {
  auto& layers = net.layers();
  if (grads.layers.size() != layers.size()) {
    throw FfnnError(FfnnErrc::kShapeMismatch, "gradient depth does not match network");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (grads.layers[l].weights.size() != layers[l].weights.size() ||
        grads.layers[l].bias.size() != layers[l].bias.size()) {
      throw FfnnError(FfnnErrc::kShapeMismatch, "gradient shape does not match network");
    }
  }
  const double rho = params.rho;
  const double eps = params.epsilon;
  auto update = [rho, eps](std::vector<double>& value, std::vector<double>& sq_grad,
                           std::vector<double>& sq_delta, const std::vector<double>& grad) {
    double* __restrict v = value.data();
    double* __restrict eg = sq_grad.data();
    double* __restrict ed = sq_delta.data();
    const double* __restrict gr = grad.data();
    const std::size_t n = value.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double g = gr[i];
      const double eg2 = rho * eg[i] + (1.0 - rho) * g * g;
      const double step = -(std::sqrt(ed[i] + eps) / std::sqrt(eg2 + eps)) * g;
      const double ed2 = rho * ed[i] + (1.0 - rho) * step * step;
      // Accumulators of inactive units decay geometrically; flushing them
      // before they go subnormal keeps the update loop at full speed.
      eg[i] = eg2 < kAccumulatorFloor ? 0.0 : eg2;
      ed[i] = ed2 < kAccumulatorFloor ? 0.0 : ed2;
      v[i] += step;
    }
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Layer& layer = layers[l];
    update(layer.weights, layer.sq_grad_w, layer.sq_delta_w, grads.layers[l].weights);
    update(layer.bias, layer.sq_grad_b, layer.sq_delta_b, grads.layers[l].bias);
  }
}

Sample make_sample(const encoder::FeatureVector& input, encoder::ClassLabel label) {
  const encoder::OneHot t = encoder::one_hot(label);
  return Sample{{input.begin(), input.end()}, {t.begin(), t.end()}};
}

double train_epoch(Network& net, std::span<const Sample> samples, std::uint64_t seed,
                   const AdadeltaParams& params) {
  if (samples.empty()) throw FfnnError(FfnnErrc::kEmptyDataset, "no training samples");
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  double total = 0.0;
  for (std::size_t idx : order) {
    const Sample& s = samples[idx];
    const ForwardTrace trace = forward(net, s.input, Train{rng()});
    total += loss(trace.outputs(), s.target, net.loss_mode());
    adadelta_step(net, backprop(net, trace, s.target), params);
  }
  return total / static_cast<double>(samples.size());
}

encoder::ClassLabel predict(const Network& net, std::span<const double> input) {
  const ForwardTrace trace = forward(net, input, Eval{});
  return encoder::decode_one_hot(trace.outputs());
}

}  // namespace flowpredict::ffnn

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

#include "flowpredict/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <random>

namespace flowpredict::ffnn {

namespace {

constexpr double kKinkMargin = 1e-3;
constexpr int kMaxInputRedraws = 200;

double eval_loss(const Network& net, std::span<const double> input,
                 std::span<const double> target) {
  const ForwardTrace t = forward(net, input, Eval{});
  return loss(t.outputs(), target, net.loss_mode());
}

bool near_relu_kink(const Network& net, std::span<const double> input) {
  const ForwardTrace t = forward(net, input, Eval{});
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    if (net.layers()[l].act != Activation::kRelu) continue;
    for (double x : t.pre_activations[l]) {
      if (std::abs(x) < kKinkMargin) return true;
    }
  }
  return false;
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckResult check_gradients(const Network& net, std::span<const double> input,
                                std::span<const double> target, double step) {
  const ForwardTrace trace = forward(net, input, Eval{});
  const Gradients analytic = backprop(net, trace, target);

  Network probe = net;
  GradCheckResult result;
  auto central = [&](double& param) {
    const double saved = param;
    param = saved + step;
    const double up = eval_loss(probe, input, target);
    param = saved - step;
    const double down = eval_loss(probe, input, target);
    param = saved;
    return (up - down) / (2.0 * step);
  };
  for (std::size_t l = 0; l < probe.layers().size(); ++l) {
    Layer& layer = probe.layers()[l];
    for (std::size_t i = 0; i < layer.weights.size(); ++i) {
      const double numeric = central(layer.weights[i]);
      result.max_rel_error = std::max(
          result.max_rel_error, relative_error(analytic.layers[l].weights[i], numeric));
    }
    for (std::size_t j = 0; j < layer.bias.size(); ++j) {
      const double numeric = central(layer.bias[j]);
      result.max_rel_error =
          std::max(result.max_rel_error, relative_error(analytic.layers[l].bias[j], numeric));
    }
    result.parameters += layer.weights.size() + layer.bias.size();
  }
  return result;
}

GradCheckReport run_gradient_check(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> bias_dist(-0.5, 0.5);
  auto pick = [&rng](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };

  GradCheckReport report;
  report.trials = count;
  for (std::size_t trial = 0; trial < count; ++trial) {
    for (LossMode mode : {LossMode::kMse, LossMode::kCce}) {
      NetworkConfig cfg;
      cfg.loss = mode;
      cfg.dropout = 0.0;
      cfg.hidden = pick(0, 1) ? Activation::kRelu : Activation::kSigmoid;
      if (trial % 10 != 0) {
        // Every tenth draw keeps the full default architecture.
        cfg.dims.assign(1, pick(1, 16));
        const std::size_t hidden_layers = pick(0, 3);
        for (std::size_t h = 0; h < hidden_layers; ++h) cfg.dims.push_back(pick(1, 12));
        cfg.dims.push_back(pick(1, 6));
      }
      Network net = Network::init(cfg, rng());
      for (Layer& layer : net.layers()) {
        for (double& b : layer.bias) b = bias_dist(rng);
      }

      std::vector<double> input(net.input_size());
      for (int attempt = 0; attempt < kMaxInputRedraws; ++attempt) {
        for (double& v : input) v = unit(rng);
        if (!near_relu_kink(net, input)) break;
      }

      std::vector<double> target(net.output_size(), 0.0);
      if (mode == LossMode::kCce || pick(0, 1)) {
        target[pick(0, target.size() - 1)] = 1.0;
      } else {
        for (double& v : target) v = unit(rng);
      }

      const GradCheckResult r = check_gradients(net, input, target);
      report.parameters += r.parameters;
      const double err = r.max_rel_error;
      double& worst = mode == LossMode::kMse ? report.max_rel_error_mse : report.max_rel_error_cce;
      worst = std::max(worst, err);
    }
  }
  return report;
}

}  // namespace flowpredict::ffnn

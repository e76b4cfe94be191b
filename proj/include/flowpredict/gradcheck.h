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

// Central finite-difference check of backprop(). The numeric side only uses
// forward() in eval mode and loss().

#ifndef FLOWPREDICT_GRADCHECK_H_
#define FLOWPREDICT_GRADCHECK_H_

#include <cstddef>
#include <cstdint>
#include <span>

#include "flowpredict/ffnn.h"

namespace flowpredict::ffnn {

inline constexpr double kGradCheckStep = 1e-5;
inline constexpr double kGradCheckTolerance = 1e-4;
// Gradients below this magnitude are compared on an absolute scale: central
// differences carry roughly 1e-11 of cancellation noise at h = 1e-5.
inline constexpr double kGradCheckFloor = 1e-6;

double relative_error(double analytic, double numeric);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t parameters = 0;
};

// Compares every weight and bias gradient. Dropout is not applied.
GradCheckResult check_gradients(const Network& net, std::span<const double> input,
                                std::span<const double> target, double step = kGradCheckStep);

struct GradCheckReport {
  std::size_t trials = 0;  // per loss mode
  double max_rel_error_mse = 0.0;
  double max_rel_error_cce = 0.0;
  std::size_t parameters = 0;

  double max_rel_error() const {
    return max_rel_error_mse > max_rel_error_cce ? max_rel_error_mse : max_rel_error_cce;
  }
};

// `count` random (network, input, target) draws in each loss mode. Shapes,
// activations, weights, biases and inputs are all randomized; inputs are
// redrawn while any ReLU pre-activation sits within 1e-3 of its kink.
GradCheckReport run_gradient_check(std::size_t count, std::uint64_t seed);

}  // namespace flowpredict::ffnn

#endif  // FLOWPREDICT_GRADCHECK_H_

// Copyright 2026 The lipcert Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>

#include "lipcert/network.hpp"

namespace lipcert {

/// J^T v of the network at x. ReLU passes gradient only where the
/// pre-activation is strictly positive; max pool routes each window's
/// gradient to its argmax (lowest flat index on ties).
Tensor vjp(const NetworkSpec& net, const Tensor& x, const Tensor& cotangent);

enum class LowerBoundMethod { kRandom, kGradient };
const char* to_string(LowerBoundMethod method);

struct LowerBoundReport {
  LowerBoundMethod method = LowerBoundMethod::kRandom;
  double best_ratio = 0.0;
  double best_perturbation_norm = 0.0;
  std::size_t samples_or_steps = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultRandomSamples = 10'000;

/// max ||f(x0 + dx) - f(x0)|| / ||dx|| over dx drawn uniformly from the
/// eps-sphere. Sample i uses derive_seed(seed, i), so any thread count gives
/// the same answer. eps == 0 reports a ratio of 0.
LowerBoundReport lipschitz_lower_random(const NetworkSpec& net, const Tensor& x0,
                                        double eps,
                                        std::size_t n_samples = kDefaultRandomSamples,
                                        std::uint64_t seed = 0,
                                        std::size_t threads = 1);

struct GradientAscentConfig {
  std::size_t steps = 200;
  double step_size = 0.0;  // 0 means eps / 10
  std::uint64_t seed = 0;
};

/// Projected gradient ascent of ||f(x0 + dx) - f(x0)|| over ||dx|| <= eps.
/// Steps that do not improve the objective are rejected and halve the step.
LowerBoundReport lipschitz_lower_gradient(const NetworkSpec& net,
                                          const Tensor& x0, double eps,
                                          const GradientAscentConfig& config = {});

struct AttackConfig {
  std::size_t steps = 100;        // ascent steps per trial radius
  double radius_start = 1e-6;
  double radius_growth = 2.0;
  double radius_max = 1e6;
  std::size_t bisections = 30;
  std::uint64_t seed = 0;
};

struct AttackResult {
  double norm = 0.0;  // +inf when nothing flipped the class
  std::size_t original_class = 0;
  std::size_t adversarial_class = 0;
  Tensor perturbation;  // empty when norm is +inf
};

/// Smallest ||dx|| found with argmax f(x0 + dx) != argmax f(x0). Each trial
/// radius runs projected ascent on the runner-up-minus-top margin; radii are
/// doubled until a flip appears and then bisected.
AttackResult adversarial_attack(const NetworkSpec& net, const Tensor& x0,
                                const AttackConfig& config = {});

double adversarial_upper_bound(const NetworkSpec& net, const Tensor& x0,
                               const AttackConfig& config = {});

/// Index of the largest entry, lowest index on ties.
std::size_t argmax(const Tensor& t);

}  // namespace lipcert

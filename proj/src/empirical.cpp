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

#include "lipcert/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "lipcert/error.hpp"
#include "lipcert/parallel.hpp"

namespace lipcert {

namespace {

void check_eps(double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw ConfigError("eps must be finite and non-negative");
  }
}

// Uniform point on the sphere of the given radius.
Tensor sphere_point(const Shape& shape, double radius, Rng& rng) {
  Tensor dx(shape);
  double norm = 0.0;
  while (norm == 0.0) {
    rng.fill(dx.data(), Distribution::kGaussian);
    norm = l2_norm(dx.data());
  }
  for (auto& v : dx.data()) v *= radius / norm;
  return dx;
}

// Rescales dx onto the ball of the given radius if it lies outside.
void project_to_ball(Tensor& dx, double radius) {
  const double norm = l2_norm(dx.data());
  if (norm > radius) {
    for (auto& v : dx.data()) v *= radius / norm;
  }
}

void add_scaled(Tensor& dst, double s, const Tensor& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s * src[i];
}

}  // namespace

std::size_t argmax(const Tensor& t) {
  if (t.empty()) throw InvalidInputError("argmax of an empty tensor");
  std::size_t best = 0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] > t[best]) best = i;
  }
  return best;
}

const char* to_string(LowerBoundMethod method) {
  return method == LowerBoundMethod::kRandom ? "random" : "gradient";
}

Tensor vjp(const NetworkSpec& net, const Tensor& x, const Tensor& cotangent) {
  const Shape out_shape = net.output_shape();
  if (cotangent.size() != numel(out_shape)) {
    throw ShapeError("vjp: cotangent has shape " + to_string(cotangent.shape()) +
                     ", network output is " + to_string(out_shape));
  }
  const std::vector<Tensor> outs = forward_intermediates(net, x);
  Tensor g = cotangent.reshape(out_shape);
  for (std::size_t k = net.size(); k-- > 0;) {
    const LayerSpec& layer = net.layer(k);
    const Tensor& input = k == 0 ? x : outs[k - 1];
    if (const auto* l = std::get_if<AffineRelu>(&layer)) {
      // relu(y) > 0 exactly when y > 0.
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(outs[k][i] > 0.0)) g[i] = 0.0;
      }
      g = l->op.apply_transpose(g);
    } else if (const auto* l = std::get_if<Affine>(&layer)) {
      g = l->op.apply_transpose(g);
    } else if (const auto* pool = std::get_if<MaxPool2d>(&layer)) {
      std::vector<std::size_t> winners;
      maxpool_forward(*pool, input, &winners);
      Tensor routed(pool->input_shape);
      for (std::size_t o = 0; o < g.size(); ++o) routed[winners[o]] += g[o];
      g = std::move(routed);
    } else {
      g = g.reshape(input_shape_of(layer));
    }
  }
  return g;
}

LowerBoundReport lipschitz_lower_random(const NetworkSpec& net, const Tensor& x0,
                                        double eps, std::size_t n_samples,
                                        std::uint64_t seed, std::size_t threads) {
  check_eps(eps);
  if (n_samples == 0) throw ConfigError("lipschitz_lower_random: n_samples == 0");
  LowerBoundReport report;
  report.method = LowerBoundMethod::kRandom;
  report.samples_or_steps = n_samples;
  report.seed = seed;
  if (eps == 0.0) return report;

  const Tensor y0 = forward(net, x0);
  std::vector<double> ratios(n_samples, 0.0);
  std::vector<double> norms(n_samples, 0.0);
  parallel_for(n_samples, 16, threads,
               [&](std::size_t begin, std::size_t end, std::size_t) {
                 for (std::size_t i = begin; i < end; ++i) {
                   Rng rng(derive_seed(seed, i));
                   const Tensor dx = sphere_point(x0.shape(), eps, rng);
                   const double dn = l2_norm(dx.data());
                   const Tensor y = forward(net, x0 + dx);
                   ratios[i] = l2_norm((y - y0).data()) / dn;
                   norms[i] = dn;
                 }
               });
  const auto best = std::max_element(ratios.begin(), ratios.end());
  report.best_ratio = *best;
  report.best_perturbation_norm = norms[static_cast<std::size_t>(best - ratios.begin())];
  return report;
}

LowerBoundReport lipschitz_lower_gradient(const NetworkSpec& net,
                                          const Tensor& x0, double eps,
                                          const GradientAscentConfig& config) {
  check_eps(eps);
  if (config.steps == 0) throw ConfigError("lipschitz_lower_gradient: steps == 0");
  if (config.step_size < 0.0) {
    throw ConfigError("lipschitz_lower_gradient: negative step size");
  }
  LowerBoundReport report;
  report.method = LowerBoundMethod::kGradient;
  report.samples_or_steps = config.steps;
  report.seed = config.seed;
  if (eps == 0.0) return report;

  const Tensor y0 = forward(net, x0);
  Rng rng(config.seed);
  double step = config.step_size > 0.0 ? config.step_size : eps / 10.0;

  struct Point {
    Tensor dx;
    Tensor diff;  // f(x0 + dx) - f(x0)
    double value = 0.0;
  };
  auto evaluate = [&](Tensor dx) {
    Point p;
    p.diff = forward(net, x0 + dx) - y0;
    p.value = l2_norm(p.diff.data());
    p.dx = std::move(dx);
    const double dn = l2_norm(p.dx.data());
    if (dn > 0.0 && p.value / dn > report.best_ratio) {
      report.best_ratio = p.value / dn;
      report.best_perturbation_norm = dn;
    }
    return p;
  };

  Point current = evaluate(sphere_point(x0.shape(), eps, rng));
  for (std::size_t s = 0; s < config.steps; ++s) {
    if (current.value == 0.0) {
      current = evaluate(sphere_point(x0.shape(), eps, rng));
      continue;
    }
    const Tensor cot = (1.0 / current.value) * current.diff;
    const Tensor grad = vjp(net, x0 + current.dx, cot);
    const double gn = l2_norm(grad.data());
    if (gn == 0.0) {
      current = evaluate(sphere_point(x0.shape(), eps, rng));
      continue;
    }
    Tensor next = current.dx;
    add_scaled(next, step / gn, grad);
    project_to_ball(next, eps);
    Point candidate = evaluate(std::move(next));
    if (candidate.value > current.value) {
      current = std::move(candidate);
    } else {
      step *= 0.5;
    }
  }
  return report;
}

namespace {

// Projected ascent on max_{j != top} f_j - f_top within the given radius.
// Returns the first iterate whose argmax differs from `top`.
std::optional<Tensor> margin_ascent(const NetworkSpec& net, const Tensor& x0,
                                    std::size_t top, double radius,
                                    std::size_t steps, Rng& rng) {
  Tensor dx(x0.shape());
  const double step = radius / 10.0;
  for (std::size_t s = 0; s < steps; ++s) {
    const Tensor x = x0 + dx;
    const Tensor y = forward(net, x);
    if (argmax(y) != top) return dx;
    std::size_t runner = top == 0 ? 1 : 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (i != top && y[i] > y[runner]) runner = i;
    }
    Tensor cot(y.shape());
    cot[runner] = 1.0;
    cot[top] = -1.0;
    Tensor grad = vjp(net, x, cot);
    double gn = l2_norm(grad.data());
    if (gn == 0.0) {
      grad = sphere_point(x0.shape(), 1.0, rng);
      gn = 1.0;
    }
    add_scaled(dx, step / gn, grad);
    project_to_ball(dx, radius);
  }
  if (argmax(forward(net, x0 + dx)) != top) return dx;
  return std::nullopt;
}

}  // namespace

AttackResult adversarial_attack(const NetworkSpec& net, const Tensor& x0,
                                const AttackConfig& config) {
  if (config.steps == 0 || !(config.radius_start > 0.0) ||
      !(config.radius_growth > 1.0) || !(config.radius_max >= config.radius_start)) {
    throw ConfigError(
        "adversarial_attack: need steps > 0, radius_start > 0, growth > 1 and "
        "radius_max >= radius_start");
  }
  AttackResult result;
  result.norm = std::numeric_limits<double>::infinity();
  const Tensor y0 = forward(net, x0);
  if (y0.size() < 2) throw ConfigError("adversarial_attack needs two or more outputs");
  const std::size_t top = argmax(y0);
  result.original_class = top;
  result.adversarial_class = top;

  std::uint64_t trial = 0;
  auto attempt = [&](double radius) {
    Rng rng(derive_seed(config.seed, trial++));
    auto dx = margin_ascent(net, x0, top, radius, config.steps, rng);
    if (!dx) return false;
    const double norm = l2_norm(dx->data());
    if (norm < result.norm) {
      result.norm = norm;
      result.adversarial_class = argmax(forward(net, x0 + *dx));
      result.perturbation = std::move(*dx);
    }
    return true;
  };

  double lo = 0.0;
  double hi = config.radius_start;
  while (!attempt(hi)) {
    lo = hi;
    if (hi >= config.radius_max) return result;
    hi = std::min(hi * config.radius_growth, config.radius_max);
  }
  hi = std::min(hi, result.norm);
  for (std::size_t b = 0; b < config.bisections; ++b) {
    const double mid = 0.5 * (lo + hi);
    if (attempt(mid)) {
      hi = std::min(mid, result.norm);
    } else {
      lo = mid;
    }
  }
  return result;
}

double adversarial_upper_bound(const NetworkSpec& net, const Tensor& x0,
                               const AttackConfig& config) {
  return adversarial_attack(net, x0, config).norm;
}

}  // namespace lipcert

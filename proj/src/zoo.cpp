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

#include "lipcert/zoo.hpp"

#include <algorithm>
#include <cmath>

namespace lipcert {

namespace {

Tensor fan_in_uniform(const Shape& shape, std::size_t fan_in, std::uint64_t seed) {
  Tensor t = seeded_fill(shape, seed, Distribution::kUniform);
  const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& v : t.data()) v *= scale;
  return t;
}

}  // namespace

AffineOperator random_dense(std::size_t out, std::size_t in, std::uint64_t seed) {
  return AffineOperator::dense(fan_in_uniform({out, in}, in, derive_seed(seed, 0)),
                               fan_in_uniform({out}, in, derive_seed(seed, 1)));
}

AffineOperator random_conv(std::size_t out_channels, const Shape& input_shape,
                           std::array<std::size_t, 2> kernel,
                           Conv2dGeometry geometry, std::uint64_t seed) {
  const std::size_t in_channels = input_shape.at(0);
  const std::size_t fan_in = in_channels * kernel[0] * kernel[1];
  return AffineOperator::conv2d(
      fan_in_uniform({out_channels, in_channels, kernel[0], kernel[1]}, fan_in,
                     derive_seed(seed, 0)),
      fan_in_uniform({out_channels}, fan_in, derive_seed(seed, 1)), input_shape,
      geometry);
}

NetworkSpec mnist_net(std::uint64_t seed) {
  std::vector<LayerSpec> layers;
  Shape shape{1, 28, 28};
  auto add = [&](LayerSpec layer) {
    shape = output_shape_of(layer);
    layers.push_back(std::move(layer));
  };
  add(AffineRelu{random_conv(6, shape, {5, 5}, {}, derive_seed(seed, 0))});
  add(make_maxpool(shape, {2, 2}, {2, 2}));
  add(AffineRelu{random_conv(16, shape, {5, 5}, {}, derive_seed(seed, 2))});
  add(make_maxpool(shape, {2, 2}, {2, 2}));
  add(Flatten{shape});
  add(AffineRelu{random_dense(120, numel(shape), derive_seed(seed, 4))});
  add(AffineRelu{random_dense(84, 120, derive_seed(seed, 5))});
  add(Affine{random_dense(10, 84, derive_seed(seed, 6))});
  return NetworkSpec::create({1, 28, 28}, std::move(layers));
}

Tensor synthetic_image(const Shape& shape, std::uint64_t seed) {
  Tensor x(shape);
  Rng rng(seed);
  const std::size_t h = shape.size() >= 2 ? shape[shape.size() - 2] : 1;
  const std::size_t w = shape.back();
  const double cy = rng.uniform(0.35, 0.65) * static_cast<double>(h);
  const double cx = rng.uniform(0.35, 0.65) * static_cast<double>(w);
  const double radius = 0.25 * static_cast<double>(std::min(h, w));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double y = static_cast<double>((i / w) % h);
    const double xx = static_cast<double>(i % w);
    const double d = std::hypot(y - cy, xx - cx) / radius;
    const double ring = std::exp(-8.0 * (d - 1.0) * (d - 1.0));
    x[i] = std::clamp(0.9 * ring + 0.1 * rng.uniform01(), 0.0, 1.0);
  }
  return x;
}

}  // namespace lipcert

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

#include <cstdint>

#include "lipcert/network.hpp"

namespace lipcert {

/// Dense layer with weights and bias drawn from U(-1/sqrt(n), 1/sqrt(n)).
AffineOperator random_dense(std::size_t out, std::size_t in, std::uint64_t seed);

/// Conv layer with the same fan-in scaled init (fan_in = in_ch * kh * kw).
AffineOperator random_conv(std::size_t out_channels, const Shape& input_shape,
                           std::array<std::size_t, 2> kernel,
                           Conv2dGeometry geometry, std::uint64_t seed);

/// C5-6 MP-2 C5-16 MP-2 FC-120 FC-84 FC-10 on [1, 28, 28], unpadded
/// convolutions, randomly initialized.
NetworkSpec mnist_net(std::uint64_t seed);

/// Values in [0, 1) with a blob of bright pixels, roughly digit-like.
Tensor synthetic_image(const Shape& shape, std::uint64_t seed);

}  // namespace lipcert

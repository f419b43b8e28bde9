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

#include <optional>
#include <string>
#include <vector>

#include "lipcert/layer_bounds.hpp"
#include "lipcert/network.hpp"

namespace lipcert {

struct LayerBoundRecord {
  std::size_t layer_index = 0;
  LayerKind layer_kind = LayerKind::kIdentity;
  double lipschitz = 1.0;
  double eps_in = 0.0;
  double eps_out = 0.0;  // eps_in * lipschitz
  double active_fraction = 1.0;  // share of next-mask bits equal to 1
  // Bare affine layers: ||A|| alongside the masked ||A D|| used as the bound.
  std::optional<double> lipschitz_unmasked;
  // Pooling layers.
  std::optional<std::size_t> n_max;
  // Set when the next-layer mask was reset to all ones (after bare affine).
  bool mask_reset = false;
  std::optional<PowerIterationReport> power_iteration;
};

struct NetworkBoundTrace {
  std::vector<LayerBoundRecord> records;
  double l_net = 1.0;
  double eps_input = 0.0;
  std::string nominal_input_digest;  // sha256 of the float64 input bytes

  bool all_converged() const;
};

/// Network-wide local Lipschitz bound around x0 over the eps-ball, walking
/// the layers in order while threading the nominal point, the radius and the
/// domain mask. Affine-ReLU layers use ||R A D||, pools sqrt(n_max), bare
/// affine layers ||A D||; flatten and identity contribute 1.
NetworkBoundTrace network_local_bound(const NetworkSpec& net, const Tensor& x0,
                                      double eps, const BoundConfig& config = {});

/// Input-independent product of ||A|| over affine layers and sqrt(n_max)
/// over pools.
NetworkBoundTrace network_global_bound(const NetworkSpec& net,
                                       const BoundConfig& config = {});

/// Per-layer power-iteration seed; shared by local and global runs so the
/// two start from the same vector on every layer.
std::uint64_t layer_seed(const BoundConfig& config, std::size_t layer_index);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string tensor_digest(const Tensor& t);

}  // namespace lipcert

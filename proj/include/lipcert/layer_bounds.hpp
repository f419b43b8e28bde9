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

#include "lipcert/affine_operator.hpp"
#include "lipcert/domain_mask.hpp"
#include "lipcert/network.hpp"
#include "lipcert/power_iteration.hpp"
#include "lipcert/tensor.hpp"

namespace lipcert {

struct BoundConfig {
  PowerIterationConfig power;
  std::size_t row_batch = kDefaultRowBatch;
  std::size_t threads = 1;
};

/// Local Lipschitz constant of the scalar ReLU at y0 over an input set whose
/// largest element other than y0 is `ybar`. `degenerate` marks the set {y0}
/// (constant 0). Otherwise ybar must differ from y0; the result is the slope
/// of the secant through (y0, relu(y0)) and (ybar, relu(ybar)), in [0, 1].
double relu_local_lipschitz(double y0, double ybar, bool degenerate);

/// Elementwise upper bound of A x + b over x = x0 + D dx, ||dx|| <= eps:
/// ybar_i = eps * ||D a_i|| + y0_i.
Tensor compute_ybar(const AffineOperator& op, const Tensor& y0,
                    const DomainMask& mask, double eps,
                    const BoundConfig& config = {});

struct AffineReluBound {
  Tensor y0;         // A x0 + b
  Tensor ybar;       // elementwise upper bound of the pre-activation
  Tensor slopes;     // diagonal of R
  double lipschitz_ub = 0.0;  // ||R A D||
  DomainMask next_mask;
  PowerIterationReport power_iteration;
};

/// Local Lipschitz upper bound ||R A D|| of relu(A x + b) around x0 over the
/// eps-ball restricted by `mask`. The norm is estimated by power iteration on
/// v -> D A^T R^2 A D v.
AffineReluBound affine_relu_bound(const AffineOperator& op, const Tensor& x0,
                                  const DomainMask& mask, double eps,
                                  const BoundConfig& config = {});

/// ||A D||, the affine-layer constant (D = identity gives ||A||).
SpectralEstimate affine_bound(const AffineOperator& op, const DomainMask& mask,
                              const BoundConfig& config = {});

struct MaxPoolBound {
  std::size_t n_max = 1;
  double lipschitz = 1.0;  // sqrt(n_max)
  DomainMask next_mask;
};

/// Largest number of pooling windows covering one input element,
/// ceil(kh/sh) * ceil(kw/sw). Padding does not change it.
std::size_t maxpool_n_max(const MaxPool2d& pool);

MaxPoolBound maxpool_bound(const MaxPool2d& pool, const DomainMask& mask);

/// Bit i is 0 exactly when ybar_i <= 0.
DomainMask mask_from_upper_bound(const Tensor& ybar);

/// Window maximum of the incoming bits.
DomainMask maxpool_mask(const MaxPool2d& pool, const DomainMask& mask);

/// Next-layer mask for any layer kind. Affine-ReLU layers need their ybar;
/// bare affine layers reset to all ones; flatten and identity reshape or pass
/// the bits through.
DomainMask propagate_mask(const LayerSpec& layer, const DomainMask& incoming,
                          const Tensor* ybar = nullptr);

}  // namespace lipcert

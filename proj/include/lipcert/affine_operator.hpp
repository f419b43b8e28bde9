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

#include <array>
#include <cstddef>
#include <span>

#include "lipcert/domain_mask.hpp"
#include "lipcert/tensor.hpp"

namespace lipcert {

enum class OperatorKind { kDense, kConv2d };

const char* to_string(OperatorKind kind);

struct Conv2dGeometry {
  std::array<std::size_t, 2> stride{1, 1};
  std::array<std::size_t, 2> padding{0, 0};
};

/// The affine map x -> A x + b of a dense or 2D-convolution layer.
///
/// A is never stored explicitly: `apply` runs the layer and
/// `apply_transpose` runs its adjoint (transposed convolution for conv2d).
/// Conv2d uses zero padding and unit dilation. Dense weights are [m, n];
/// conv2d weights are [out_ch, in_ch, kh, kw] with one bias per out channel.
class AffineOperator {
 public:
  static AffineOperator dense(Tensor weights, Tensor bias);
  static AffineOperator conv2d(Tensor weights, Tensor bias,
                               const Shape& input_shape,
                               Conv2dGeometry geometry = {});

  OperatorKind kind() const { return kind_; }
  const Shape& input_shape() const { return input_shape_; }
  const Shape& output_shape() const { return output_shape_; }
  std::size_t input_size() const { return input_size_; }
  std::size_t output_size() const { return output_size_; }
  const Tensor& weights() const { return weights_; }
  const Tensor& bias() const { return bias_; }
  const Conv2dGeometry& geometry() const { return geometry_; }
  std::size_t parameter_count() const { return weights_.size() + bias_.size(); }

  /// A x (+ b). `x` must have input_shape.
  Tensor apply(const Tensor& x, bool include_bias = true) const;
  /// A^T v, never with bias. `v` must have output_shape.
  Tensor apply_transpose(const Tensor& v) const;

  // Flat-buffer forms of the two maps for inner loops (no shape checks).
  void apply_linear(std::span<const double> x, std::span<double> y) const;
  void apply_transpose_linear(std::span<const double> v,
                              std::span<double> x) const;

  /// x += value * A^T e_row, i.e. adds a scaled row of A into `x`. This is
  /// the scatter step of the transposed map, restricted to one output.
  void scatter_row(std::size_t row, double value, std::span<double> x) const;

 private:
  AffineOperator() = default;

  OperatorKind kind_ = OperatorKind::kDense;
  Shape input_shape_;
  Shape output_shape_;
  std::size_t input_size_ = 0;
  std::size_t output_size_ = 0;
  Tensor weights_;
  Tensor bias_;
  Conv2dGeometry geometry_;
};

inline constexpr std::size_t kDefaultRowBatch = 256;
inline constexpr std::size_t kDefaultMaterializeCap = 4'000'000;

/// Element i is ||D a_i|| where a_i^T is row i of A. Rows are extracted in
/// batches of standard basis vectors pushed through the transposed map; each
/// row's norm is computed in isolation so the result does not depend on
/// `batch_size` or `threads`.
Tensor row_norms_masked(const AffineOperator& op, const DomainMask& mask,
                        std::size_t batch_size = kDefaultRowBatch,
                        std::size_t threads = 1);

/// Explicit [m, n] matrix of the linear part. Refuses when m * n > cap.
Tensor materialize(const AffineOperator& op,
                   std::size_t cap = kDefaultMaterializeCap);

}  // namespace lipcert

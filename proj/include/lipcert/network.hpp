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
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lipcert/affine_operator.hpp"
#include "lipcert/tensor.hpp"

namespace lipcert {

// relu(A x + b)
struct AffineRelu {
  AffineOperator op;
};

// A x + b
struct Affine {
  AffineOperator op;
};

struct MaxPool2d {
  std::array<std::size_t, 2> kernel{2, 2};
  std::array<std::size_t, 2> stride{2, 2};
  std::array<std::size_t, 2> padding{0, 0};
  Shape input_shape;  // [c, h, w]

  Shape output_shape() const;
};

struct Flatten {
  Shape input_shape;
};

// Placeholder for layers that are the identity at inference time.
// `source_kind` keeps the name of the layer it replaced ("dropout", ...).
struct Identity {
  Shape shape;
  std::string source_kind;
};

using LayerSpec = std::variant<AffineRelu, Affine, MaxPool2d, Flatten, Identity>;

enum class LayerKind { kAffineRelu, kAffine, kMaxPool2d, kFlatten, kIdentity };

LayerKind kind_of(const LayerSpec& layer);
const char* to_string(LayerKind kind);
Shape input_shape_of(const LayerSpec& layer);
Shape output_shape_of(const LayerSpec& layer);

/// Builds a pool layer, validating kernel/stride/padding against the input.
MaxPool2d make_maxpool(const Shape& input_shape,
                       std::array<std::size_t, 2> kernel,
                       std::array<std::size_t, 2> stride,
                       std::array<std::size_t, 2> padding = {0, 0});

/// A validated feedforward chain. Construct through `NetworkSpec::create` (or
/// the model loader); once built, the shape chain is known to be consistent.
class NetworkSpec {
 public:
  static NetworkSpec create(Shape input_shape, std::vector<LayerSpec> layers,
                            std::vector<std::string> class_labels = {});

  const Shape& input_shape() const { return input_shape_; }
  Shape output_shape() const;
  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::size_t size() const { return layers_.size(); }
  const LayerSpec& layer(std::size_t i) const { return layers_[i]; }
  const std::vector<std::string>& class_labels() const { return class_labels_; }

  // Non-fatal notes raised while loading (identity-mapped layers, ...).
  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  Shape input_shape_;
  std::vector<LayerSpec> layers_;
  std::vector<std::string> class_labels_;
  std::vector<std::string> warnings_;
};

/// Nominal output of a single layer.
Tensor forward_layer(const LayerSpec& layer, const Tensor& x);

/// Exact nominal forward pass.
Tensor forward(const NetworkSpec& net, const Tensor& x);

/// Output of every layer, in order; the last entry equals `forward`.
std::vector<Tensor> forward_intermediates(const NetworkSpec& net,
                                          const Tensor& x);

/// Window maximum; padded cells never win. Ties resolve to the lowest flat
/// input index. When `argmax` is non-null it receives, per output, the flat
/// input index that produced it.
Tensor maxpool_forward(const MaxPool2d& pool, const Tensor& x,
                       std::vector<std::size_t>* argmax = nullptr);

/// "C5-6 MP-2 FC-120 ..." style architecture summary.
std::string architecture_string(const NetworkSpec& net);

}  // namespace lipcert

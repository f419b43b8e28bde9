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
#include <span>
#include <vector>

#include "lipcert/tensor.hpp"

namespace lipcert {

/// Diagonal of the binary domain-restriction matrix for one layer input.
///
/// Bit 1 means the coordinate may vary over the input set; bit 0 means it is
/// known to be exactly zero for every input in the set. The mask carries the
/// layer-input shape so pooling can propagate it spatially.
class DomainMask {
 public:
  DomainMask() = default;
  DomainMask(Shape shape, std::vector<std::uint8_t> bits);

  static DomainMask all_ones(const Shape& shape);
  static DomainMask all_zeros(const Shape& shape);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return bits_.size(); }
  std::span<const std::uint8_t> bits() const { return bits_; }
  bool active(std::size_t i) const { return bits_[i] != 0; }

  std::size_t active_count() const;
  double active_fraction() const;
  bool is_identity() const { return active_count() == size(); }

  /// Zeros the inactive coordinates of `v` in place (v <- D v).
  void apply(std::span<double> v) const;
  Tensor as_tensor() const;
  DomainMask reshape(Shape shape) const;

  friend bool operator==(const DomainMask&, const DomainMask&) = default;

 private:
  Shape shape_;
  std::vector<std::uint8_t> bits_;
};

}  // namespace lipcert

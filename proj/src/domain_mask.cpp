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

#include "lipcert/domain_mask.hpp"

#include <algorithm>

#include "lipcert/error.hpp"

namespace lipcert {

DomainMask::DomainMask(Shape shape, std::vector<std::uint8_t> bits)
    : shape_(std::move(shape)), bits_(std::move(bits)) {
  if (numel(shape_) != bits_.size()) {
    throw ShapeError("domain mask of shape " + to_string(shape_) + " needs " +
                     std::to_string(numel(shape_)) + " bits, got " +
                     std::to_string(bits_.size()));
  }
  for (auto& b : bits_) {
    if (b > 1) throw InvalidInputError("domain mask bits must be 0 or 1");
  }
}

DomainMask DomainMask::all_ones(const Shape& shape) {
  return DomainMask(shape, std::vector<std::uint8_t>(numel(shape), 1));
}

DomainMask DomainMask::all_zeros(const Shape& shape) {
  return DomainMask(shape, std::vector<std::uint8_t>(numel(shape), 0));
}

std::size_t DomainMask::active_count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

double DomainMask::active_fraction() const {
  if (bits_.empty()) return 0.0;
  return static_cast<double>(active_count()) /
         static_cast<double>(bits_.size());
}

void DomainMask::apply(std::span<double> v) const {
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (!bits_[i]) v[i] = 0.0;
  }
}

Tensor DomainMask::as_tensor() const {
  Tensor t(shape_);
  for (std::size_t i = 0; i < bits_.size(); ++i) t[i] = bits_[i];
  return t;
}

DomainMask DomainMask::reshape(Shape shape) const {
  return DomainMask(std::move(shape), bits_);
}

}  // namespace lipcert

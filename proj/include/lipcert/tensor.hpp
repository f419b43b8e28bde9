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
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace lipcert {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense row-major array of doubles (last axis fastest).
///
/// The shape is fixed at construction; `reshape` returns a new tensor sharing
/// no storage. Element values may be written by the owner while the tensor is
/// being built and are treated as read-only afterwards.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, double value);
  static Tensor vector(std::initializer_list<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<const double> data() const { return values_; }
  std::span<double> data() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  Tensor reshape(Shape shape) const;
  Tensor flatten() const { return reshape({size()}); }

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& t);

/// Euclidean norm. Throws InvalidInputError if any element is not finite.
double l2_norm(const Tensor& t);

// Unchecked kernels used in inner loops.
double l2_norm(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
double max_abs_diff(const Tensor& a, const Tensor& b);

enum class Distribution { kUniform, kGaussian };

/// Deterministic random source.
///
/// Bits come from std::mt19937_64 (fully specified by the standard). Uniform
/// draws use the top 53 bits, gaussians use Box-Muller on two uniforms, so the
/// stream is identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double gaussian();

  void fill(std::span<double> out, Distribution dist);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Mixes a master seed with a stream index (splitmix64 finaliser). Used to
/// give every sample, layer, or restart an independent sub-stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// uniform(-1, 1) or gaussian(0, 1) tensor, bitwise reproducible per seed.
Tensor seeded_fill(const Shape& shape, std::uint64_t seed, Distribution dist);

}  // namespace lipcert

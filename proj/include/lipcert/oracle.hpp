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

// Brute-force reference implementations. These are slow on purpose and only
// used by the tests and the hidden --oracle CLI mode.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "lipcert/domain_mask.hpp"
#include "lipcert/tensor.hpp"

namespace lipcert::oracle {

struct OracleConfig {
  std::size_t entry_cap = 4'000'000;
  std::size_t restarts = 10;
  std::size_t max_iterations = 5000;
  double tolerance = 1e-12;
  // The iteration runs on (M^T M)^(2^squarings), normalized, which separates
  // clustered top singular values; the final value is the Rayleigh quotient
  // of the unpowered Gram matrix.
  std::size_t squarings = 6;
  std::uint64_t seed = 0x0a11ce;
};

struct SpectralNormDetail {
  double value = 0.0;                  // max over restarts
  std::vector<double> restart_values;  // one per restart
};

/// Spectral norm of an [m, n] matrix.
double dense_spectral_norm(const Tensor& matrix, const OracleConfig& config = {});
SpectralNormDetail dense_spectral_norm_detail(const Tensor& matrix,
                                              const OracleConfig& config = {});

/// diag(row_scale) * matrix * diag(col_scale).
Tensor scale_rows_cols(const Tensor& matrix, std::span<const double> row_scale,
                       std::span<const double> col_scale);

/// Enumerates every pooling window over an [h, w] or [c, h, w] input and
/// returns the largest number of windows covering one element. Refuses grids
/// smaller than max(2k, k + s) per axis, where an element covered by every
/// overlapping placement may not exist.
std::size_t pooling_coverage_count(const Shape& input_shape,
                                   std::array<std::size_t, 2> kernel,
                                   std::array<std::size_t, 2> stride,
                                   std::array<std::size_t, 2> padding = {0, 0});

using TensorFn = std::function<Tensor(const Tensor&)>;

/// max ||fn(x) - fn(x0)|| / ||x - x0|| over n points x = x0 + D dx drawn
/// uniformly from the masked eps-ball.
double sampled_lipschitz_ratio(const TensorFn& fn, const Tensor& x0, double eps,
                               const DomainMask& mask, std::size_t n,
                               std::uint64_t seed);

}  // namespace lipcert::oracle

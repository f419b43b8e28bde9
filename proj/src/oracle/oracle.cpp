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

#include "lipcert/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "lipcert/error.hpp"

namespace lipcert::oracle {

namespace {

using Matrix = std::vector<double>;  // row-major k x k

Matrix multiply(const Matrix& a, const Matrix& b, std::size_t k) {
  Matrix c(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t l = 0; l < k; ++l) {
      const double ail = a[i * k + l];
      if (ail == 0.0) continue;
      for (std::size_t j = 0; j < k; ++j) c[i * k + j] += ail * b[l * k + j];
    }
  }
  return c;
}

void matvec(const Matrix& a, std::size_t k, const std::vector<double>& v,
            std::vector<double>& out) {
  for (std::size_t i = 0; i < k; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += a[i * k + j] * v[j];
    out[i] = s;
  }
}

}  // namespace

SpectralNormDetail dense_spectral_norm_detail(const Tensor& matrix,
                                              const OracleConfig& config) {
  if (matrix.rank() != 2) throw ShapeError("dense_spectral_norm needs a matrix");
  const std::size_t m = matrix.shape()[0], n = matrix.shape()[1];
  if (m * n > config.entry_cap) {
    throw RefusalError("dense_spectral_norm: " + std::to_string(m * n) +
                       " entries exceed the cap of " +
                       std::to_string(config.entry_cap));
  }
  if (config.restarts == 0 || config.max_iterations == 0) {
    throw ConfigError("dense_spectral_norm: restarts and iterations must be positive");
  }

  // Gram matrix on the smaller side.
  const bool use_cols = n <= m;
  const std::size_t k = use_cols ? n : m;
  Matrix gram(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      double s = 0.0;
      if (use_cols) {
        for (std::size_t r = 0; r < m; ++r) s += matrix[r * n + i] * matrix[r * n + j];
      } else {
        for (std::size_t c = 0; c < n; ++c) s += matrix[i * n + c] * matrix[j * n + c];
      }
      gram[i * k + j] = s;
      gram[j * k + i] = s;
    }
  }

  SpectralNormDetail detail;
  const double scale = *std::max_element(gram.begin(), gram.end(),
                                         [](double a, double b) {
                                           return std::abs(a) < std::abs(b);
                                         });
  if (scale == 0.0) {
    detail.restart_values.assign(config.restarts, 0.0);
    return detail;
  }

  Matrix powered = gram;
  for (std::size_t s = 0; s < config.squarings; ++s) {
    powered = multiply(powered, powered, k);
    double peak = 0.0;
    for (double v : powered) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) break;
    for (double& v : powered) v /= peak;
  }

  std::vector<double> v(k), w(k);
  for (std::size_t r = 0; r < config.restarts; ++r) {
    Rng rng(derive_seed(config.seed, r));
    rng.fill(v, Distribution::kGaussian);
    double sigma = 0.0;
    for (std::size_t it = 0; it < config.max_iterations; ++it) {
      const double vn = l2_norm(v);
      if (vn == 0.0) break;
      for (double& x : v) x /= vn;
      matvec(gram, k, v, w);
      const double next = std::sqrt(std::max(dot(v, w), 0.0));
      const bool done = it > 0 && std::abs(next - sigma) <= config.tolerance * next;
      sigma = next;
      if (done) break;
      matvec(powered, k, v, w);
      v.swap(w);
    }
    detail.restart_values.push_back(sigma);
  }
  detail.value =
      *std::max_element(detail.restart_values.begin(), detail.restart_values.end());
  return detail;
}

double dense_spectral_norm(const Tensor& matrix, const OracleConfig& config) {
  return dense_spectral_norm_detail(matrix, config).value;
}

Tensor scale_rows_cols(const Tensor& matrix, std::span<const double> row_scale,
                       std::span<const double> col_scale) {
  if (matrix.rank() != 2 || row_scale.size() != matrix.shape()[0] ||
      col_scale.size() != matrix.shape()[1]) {
    throw ShapeError("scale_rows_cols: scale lengths do not match the matrix");
  }
  Tensor out = matrix;
  const std::size_t n = matrix.shape()[1];
  for (std::size_t i = 0; i < row_scale.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] *= row_scale[i] * col_scale[j];
  }
  return out;
}

std::size_t pooling_coverage_count(const Shape& input_shape,
                                   std::array<std::size_t, 2> kernel,
                                   std::array<std::size_t, 2> stride,
                                   std::array<std::size_t, 2> padding) {
  if (input_shape.size() < 2) throw ShapeError("pooling_coverage_count needs [h, w]");
  const std::size_t h = input_shape[input_shape.size() - 2];
  const std::size_t w = input_shape[input_shape.size() - 1];
  const std::array<std::size_t, 2> extent{h, w};
  for (int a = 0; a < 2; ++a) {
    if (kernel[a] == 0 || stride[a] == 0) {
      throw ConfigError("pooling_coverage_count: kernel and stride must be positive");
    }
    if (extent[a] < std::max(2 * kernel[a], kernel[a] + stride[a])) {
      throw RefusalError("pooling_coverage_count: grid too small for the kernel");
    }
  }
  const std::size_t ph = h + 2 * padding[0], pw = w + 2 * padding[1];
  std::vector<std::size_t> cover(h * w, 0);
  for (std::size_t y0 = 0; y0 + kernel[0] <= ph; y0 += stride[0]) {
    for (std::size_t x0 = 0; x0 + kernel[1] <= pw; x0 += stride[1]) {
      for (std::size_t dy = 0; dy < kernel[0]; ++dy) {
        for (std::size_t dx = 0; dx < kernel[1]; ++dx) {
          const std::size_t py = y0 + dy, px = x0 + dx;
          if (py < padding[0] || px < padding[1]) continue;
          const std::size_t iy = py - padding[0], ix = px - padding[1];
          if (iy >= h || ix >= w) continue;
          ++cover[iy * w + ix];
        }
      }
    }
  }
  return *std::max_element(cover.begin(), cover.end());
}

double sampled_lipschitz_ratio(const TensorFn& fn, const Tensor& x0, double eps,
                               const DomainMask& mask, std::size_t n,
                               std::uint64_t seed) {
  if (n == 0) throw ConfigError("sampled_lipschitz_ratio: n == 0");
  if (mask.size() != x0.size()) {
    throw ShapeError("sampled_lipschitz_ratio: mask size does not match x0");
  }
  const Tensor y0 = fn(x0);
  const double dim = static_cast<double>(std::max<std::size_t>(mask.active_count(), 1));
  double best = 0.0;
  Tensor dx(x0.shape());
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, i));
    rng.fill(dx.data(), Distribution::kGaussian);
    mask.apply(dx.data());
    const double norm = l2_norm(dx.data());
    if (norm == 0.0) continue;
    const double radius = eps * std::pow(rng.uniform01(), 1.0 / dim);
    if (radius == 0.0) continue;
    for (auto& v : dx.data()) v *= radius / norm;
    const Tensor y = fn(x0 + dx);
    const double ratio = l2_norm((y - y0).data()) / l2_norm(dx.data());
    best = std::max(best, ratio);
  }
  return best;
}

}  // namespace lipcert::oracle

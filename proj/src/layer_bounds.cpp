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

#include "lipcert/layer_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <variant>
#include <vector>

#include "lipcert/error.hpp"

namespace lipcert {

namespace {

double relu(double v) { return v > 0.0 ? v : 0.0; }

void check_eps(double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw ConfigError("eps must be finite and non-negative, got " +
                      std::to_string(eps));
  }
}

// Slope r_i for one coordinate given the exact spread eps * ||D a_i||.
double slope_for(double y0, double ybar, double spread) {
  if (spread == 0.0) return relu_local_lipschitz(y0, ybar, true);
  if (ybar == y0) {
    // spread is below half an ulp of y0 (so y0 != 0): the true upper end
    // y0 + spread has the sign of y0.
    return y0 > 0.0 ? 1.0 : 0.0;
  }
  return relu_local_lipschitz(y0, ybar, false);
}

}  // namespace

double relu_local_lipschitz(double y0, double ybar, bool degenerate) {
  if (degenerate) return 0.0;
  if (!std::isfinite(y0) || !std::isfinite(ybar)) {
    throw InvalidInputError("relu_local_lipschitz: non-finite argument");
  }
  if (ybar == y0) {
    throw InvalidInputError(
        "relu_local_lipschitz: ybar equals y0 for a non-degenerate set; "
        "pass degenerate = true for the single-point set");
  }
  // Both endpoints on the same side of zero: slope is exactly 0 or 1.
  if (y0 > 0.0 && ybar > 0.0) return 1.0;
  if (y0 <= 0.0 && ybar <= 0.0) return 0.0;
  const double r = (relu(ybar) - relu(y0)) / (ybar - y0);
  return std::clamp(r, 0.0, 1.0);
}

Tensor compute_ybar(const AffineOperator& op, const Tensor& y0,
                    const DomainMask& mask, double eps,
                    const BoundConfig& config) {
  check_eps(eps);
  if (y0.size() != op.output_size()) {
    throw ShapeError("compute_ybar: y0 has " + std::to_string(y0.size()) +
                     " entries, operator output has " +
                     std::to_string(op.output_size()));
  }
  const Tensor norms =
      row_norms_masked(op, mask, config.row_batch, config.threads);
  Tensor ybar(y0.shape());
  for (std::size_t i = 0; i < ybar.size(); ++i) {
    ybar[i] = eps * norms[i] + y0[i];
  }
  return ybar;
}

AffineReluBound affine_relu_bound(const AffineOperator& op, const Tensor& x0,
                                  const DomainMask& mask, double eps,
                                  const BoundConfig& config) {
  check_eps(eps);
  if (mask.size() != op.input_size()) {
    throw ShapeError("affine_relu_bound: mask size does not match the input");
  }
  AffineReluBound out;
  out.y0 = op.apply(x0);
  const Tensor norms =
      row_norms_masked(op, mask, config.row_batch, config.threads);
  const std::size_t m = op.output_size();
  out.ybar = Tensor(out.y0.shape());
  out.slopes = Tensor(out.y0.shape());
  for (std::size_t i = 0; i < m; ++i) {
    const double spread = eps * norms[i];
    out.ybar[i] = spread + out.y0[i];
    out.slopes[i] = slope_for(out.y0[i], out.ybar[i], spread);
  }

  std::vector<double> r2(m);
  for (std::size_t i = 0; i < m; ++i) r2[i] = out.slopes[i] * out.slopes[i];
  std::vector<double> masked(op.input_size());
  std::vector<double> image(m);
  auto gram = [&](std::span<const double> v, std::span<double> w) {
    std::copy(v.begin(), v.end(), masked.begin());
    mask.apply(masked);
    op.apply_linear(masked, image);
    for (std::size_t i = 0; i < m; ++i) image[i] *= r2[i];
    op.apply_transpose_linear(image, w);
    mask.apply(w);
  };
  const SpectralEstimate est =
      spectral_norm_estimate(gram, op.input_size(), &mask, config.power);
  out.lipschitz_ub = est.value;
  out.power_iteration = est.report;
  out.next_mask = mask_from_upper_bound(out.ybar);
  return out;
}

SpectralEstimate affine_bound(const AffineOperator& op, const DomainMask& mask,
                              const BoundConfig& config) {
  if (mask.size() != op.input_size()) {
    throw ShapeError("affine_bound: mask size does not match the input");
  }
  std::vector<double> masked(op.input_size());
  std::vector<double> image(op.output_size());
  const bool identity = mask.is_identity();
  auto gram = [&](std::span<const double> v, std::span<double> w) {
    std::copy(v.begin(), v.end(), masked.begin());
    if (!identity) mask.apply(masked);
    op.apply_linear(masked, image);
    op.apply_transpose_linear(image, w);
    if (!identity) mask.apply(w);
  };
  return spectral_norm_estimate(gram, op.input_size(), identity ? nullptr : &mask,
                         config.power);
}

std::size_t maxpool_n_max(const MaxPool2d& pool) {
  auto strides_to_clear = [](std::size_t k, std::size_t s) {
    return (k + s - 1) / s;
  };
  return strides_to_clear(pool.kernel[0], pool.stride[0]) *
         strides_to_clear(pool.kernel[1], pool.stride[1]);
}

MaxPoolBound maxpool_bound(const MaxPool2d& pool, const DomainMask& mask) {
  MaxPoolBound out;
  out.n_max = maxpool_n_max(pool);
  out.lipschitz = std::sqrt(static_cast<double>(out.n_max));
  out.next_mask = maxpool_mask(pool, mask);
  return out;
}

DomainMask mask_from_upper_bound(const Tensor& ybar) {
  std::vector<std::uint8_t> bits(ybar.size());
  for (std::size_t i = 0; i < ybar.size(); ++i) bits[i] = ybar[i] > 0.0;
  return DomainMask(ybar.shape(), std::move(bits));
}

DomainMask maxpool_mask(const MaxPool2d& pool, const DomainMask& mask) {
  const Tensor pooled = maxpool_forward(pool, mask.reshape(pool.input_shape).as_tensor());
  std::vector<std::uint8_t> bits(pooled.size());
  for (std::size_t i = 0; i < pooled.size(); ++i) bits[i] = pooled[i] > 0.0;
  return DomainMask(pooled.shape(), std::move(bits));
}

DomainMask propagate_mask(const LayerSpec& layer, const DomainMask& incoming,
                          const Tensor* ybar) {
  switch (kind_of(layer)) {
    case LayerKind::kAffineRelu:
      if (!ybar) {
        throw ConfigError("propagate_mask: affine_relu layers need ybar");
      }
      return mask_from_upper_bound(*ybar);
    case LayerKind::kAffine:
      return DomainMask::all_ones(output_shape_of(layer));
    case LayerKind::kMaxPool2d:
      return maxpool_mask(std::get<MaxPool2d>(layer), incoming);
    case LayerKind::kFlatten:
    case LayerKind::kIdentity:
      return incoming.reshape(output_shape_of(layer));
  }
  return incoming;
}

}  // namespace lipcert

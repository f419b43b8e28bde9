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

#include "lipcert/affine_operator.hpp"

#include <algorithm>
#include <vector>

#include "lipcert/error.hpp"
#include "lipcert/parallel.hpp"

namespace lipcert {

const char* to_string(OperatorKind kind) {
  return kind == OperatorKind::kDense ? "dense" : "conv2d";
}

AffineOperator AffineOperator::dense(Tensor weights, Tensor bias) {
  if (weights.rank() != 2) {
    throw ShapeError("dense weights must be [m, n], got " +
                     to_string(weights.shape()));
  }
  const std::size_t m = weights.shape()[0];
  const std::size_t n = weights.shape()[1];
  if (bias.size() != m) {
    throw ShapeError("dense bias must have " + std::to_string(m) +
                     " entries, got " + std::to_string(bias.size()));
  }
  AffineOperator op;
  op.kind_ = OperatorKind::kDense;
  op.input_shape_ = {n};
  op.output_shape_ = {m};
  op.input_size_ = n;
  op.output_size_ = m;
  op.weights_ = std::move(weights);
  op.bias_ = bias.reshape({m});
  return op;
}

AffineOperator AffineOperator::conv2d(Tensor weights, Tensor bias,
                                      const Shape& input_shape,
                                      Conv2dGeometry geometry) {
  if (weights.rank() != 4) {
    throw ShapeError("conv2d weights must be [out_ch, in_ch, kh, kw], got " +
                     to_string(weights.shape()));
  }
  if (input_shape.size() != 3) {
    throw ShapeError("conv2d input must be [c, h, w], got " +
                     to_string(input_shape));
  }
  const auto& ws = weights.shape();
  const std::size_t oc = ws[0], ic = ws[1], kh = ws[2], kw = ws[3];
  if (ic != input_shape[0]) {
    throw ShapeError("conv2d expects " + std::to_string(ic) +
                     " input channels, input shape is " +
                     to_string(input_shape));
  }
  if (bias.size() != oc) {
    throw ShapeError("conv2d bias must have " + std::to_string(oc) +
                     " entries, got " + std::to_string(bias.size()));
  }
  const auto [sh, sw] = geometry.stride;
  const auto [ph, pw] = geometry.padding;
  if (sh == 0 || sw == 0) throw ShapeError("conv2d stride must be positive");
  const std::size_t h = input_shape[1] + 2 * ph;
  const std::size_t w = input_shape[2] + 2 * pw;
  if (h < kh || w < kw) {
    throw ShapeError("conv2d kernel larger than padded input " +
                     to_string(input_shape));
  }
  AffineOperator op;
  op.kind_ = OperatorKind::kConv2d;
  op.input_shape_ = input_shape;
  op.output_shape_ = {oc, (h - kh) / sh + 1, (w - kw) / sw + 1};
  op.input_size_ = numel(op.input_shape_);
  op.output_size_ = numel(op.output_shape_);
  op.weights_ = std::move(weights);
  op.bias_ = bias.reshape({oc});
  op.geometry_ = geometry;
  return op;
}

Tensor AffineOperator::apply(const Tensor& x, bool include_bias) const {
  if (x.shape() != input_shape_) {
    throw ShapeError("apply: expected input " + to_string(input_shape_) +
                     ", got " + to_string(x.shape()));
  }
  Tensor y(output_shape_);
  apply_linear(x.data(), y.data());
  if (include_bias) {
    const std::size_t per_channel = output_size_ / bias_.size();
    for (std::size_t i = 0; i < output_size_; ++i) {
      y[i] += bias_[i / per_channel];
    }
  }
  return y;
}

Tensor AffineOperator::apply_transpose(const Tensor& v) const {
  if (v.shape() != output_shape_) {
    throw ShapeError("apply_transpose: expected " + to_string(output_shape_) +
                     ", got " + to_string(v.shape()));
  }
  Tensor x(input_shape_);
  apply_transpose_linear(v.data(), x.data());
  return x;
}

void AffineOperator::apply_linear(std::span<const double> x,
                                  std::span<double> y) const {
  const double* w = weights_.data().data();
  if (kind_ == OperatorKind::kDense) {
    const std::size_t n = input_size_;
    for (std::size_t i = 0; i < output_size_; ++i) {
      y[i] = dot(std::span(w + i * n, n), x);
    }
    return;
  }

  // Direct gather: y[o, oy, ox] = sum W[o, c, ky, kx] x[c, iy, ix].
  const std::size_t ic = input_shape_[0], ih = input_shape_[1],
                    iw = input_shape_[2];
  const std::size_t oc = output_shape_[0], oh = output_shape_[1],
                    ow = output_shape_[2];
  const std::size_t kh = weights_.shape()[2], kw = weights_.shape()[3];
  const auto [sh, sw] = geometry_.stride;
  const auto [ph, pw] = geometry_.padding;
  for (std::size_t o = 0; o < oc; ++o) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (std::size_t c = 0; c < ic; ++c) {
          const double* wk = w + ((o * ic + c) * kh) * kw;
          const double* xc = x.data() + c * ih * iw;
          for (std::size_t ky = 0; ky < kh; ++ky) {
            const std::ptrdiff_t iy =
                static_cast<std::ptrdiff_t>(oy * sh + ky) -
                static_cast<std::ptrdiff_t>(ph);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(ih)) continue;
            for (std::size_t kx = 0; kx < kw; ++kx) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(ox * sw + kx) -
                  static_cast<std::ptrdiff_t>(pw);
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(iw)) continue;
              acc += wk[ky * kw + kx] * xc[iy * iw + ix];
            }
          }
        }
        y[(o * oh + oy) * ow + ox] = acc;
      }
    }
  }
}

void AffineOperator::apply_transpose_linear(std::span<const double> v,
                                            std::span<double> x) const {
  std::fill(x.begin(), x.end(), 0.0);
  for (std::size_t i = 0; i < output_size_; ++i) {
    if (v[i] != 0.0) scatter_row(i, v[i], x);
  }
}

void AffineOperator::scatter_row(std::size_t row, double value,
                                 std::span<double> x) const {
  const double* w = weights_.data().data();
  if (kind_ == OperatorKind::kDense) {
    const std::size_t n = input_size_;
    const double* wr = w + row * n;
    for (std::size_t j = 0; j < n; ++j) x[j] += value * wr[j];
    return;
  }

  const std::size_t ic = input_shape_[0], ih = input_shape_[1],
                    iw = input_shape_[2];
  const std::size_t oh = output_shape_[1], ow = output_shape_[2];
  const std::size_t kh = weights_.shape()[2], kw = weights_.shape()[3];
  const auto [sh, sw] = geometry_.stride;
  const auto [ph, pw] = geometry_.padding;
  const std::size_t o = row / (oh * ow);
  const std::size_t oy = (row / ow) % oh;
  const std::size_t ox = row % ow;
  for (std::size_t c = 0; c < ic; ++c) {
    const double* wk = w + ((o * ic + c) * kh) * kw;
    double* xc = x.data() + c * ih * iw;
    for (std::size_t ky = 0; ky < kh; ++ky) {
      const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * sh + ky) -
                                static_cast<std::ptrdiff_t>(ph);
      if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(ih)) continue;
      for (std::size_t kx = 0; kx < kw; ++kx) {
        const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * sw + kx) -
                                  static_cast<std::ptrdiff_t>(pw);
        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(iw)) continue;
        xc[iy * iw + ix] += value * wk[ky * kw + kx];
      }
    }
  }
}

Tensor row_norms_masked(const AffineOperator& op, const DomainMask& mask,
                        std::size_t batch_size, std::size_t threads) {
  if (batch_size == 0) throw ConfigError("row_norms_masked: batch_size is 0");
  if (mask.size() != op.input_size()) {
    throw ShapeError("row_norms_masked: mask has " +
                     std::to_string(mask.size()) + " bits, operator input has " +
                     std::to_string(op.input_size()));
  }
  const std::size_t m = op.output_size();
  const std::size_t n = op.input_size();
  Tensor norms({m});
  if (threads == 0) threads = default_thread_count();

  // One [batch, n] scratch block per worker. Row i of the block receives
  // A^T e_i for the i-th basis vector of the batch.
  std::vector<std::vector<double>> scratch(threads);
  parallel_for(m, batch_size, threads,
               [&](std::size_t begin, std::size_t end, std::size_t worker) {
                 auto& block = scratch[worker];
                 block.assign((end - begin) * n, 0.0);
                 for (std::size_t i = begin; i < end; ++i) {
                   std::span<double> row(block.data() + (i - begin) * n, n);
                   op.scatter_row(i, 1.0, row);
                   mask.apply(row);
                   norms[i] = l2_norm(row);
                 }
               });
  return norms;
}

Tensor materialize(const AffineOperator& op, std::size_t cap) {
  const std::size_t m = op.output_size();
  const std::size_t n = op.input_size();
  if (m * n > cap) {
    throw RefusalError("materialize: " + std::to_string(m) + "x" +
                       std::to_string(n) + " exceeds the cap of " +
                       std::to_string(cap) + " entries");
  }
  if (op.kind() == OperatorKind::kDense) return op.weights().reshape({m, n});

  // Inverse index map: for every (row, column) pair decide which kernel tap,
  // if any, links them. Independent of the gather/scatter loops above.
  Tensor a({m, n});
  const auto& in = op.input_shape();
  const auto& out = op.output_shape();
  const auto& ws = op.weights().shape();
  const std::size_t ic = in[0], ih = in[1], iw = in[2];
  const std::size_t oh = out[1], ow = out[2];
  const std::size_t kh = ws[2], kw = ws[3];
  const auto [sh, sw] = op.geometry().stride;
  const auto [ph, pw] = op.geometry().padding;
  for (std::size_t row = 0; row < m; ++row) {
    const std::size_t o = row / (oh * ow);
    const auto top = static_cast<std::ptrdiff_t>((row / ow) % oh * sh) -
                     static_cast<std::ptrdiff_t>(ph);
    const auto left = static_cast<std::ptrdiff_t>(row % ow * sw) -
                      static_cast<std::ptrdiff_t>(pw);
    for (std::size_t col = 0; col < n; ++col) {
      const std::size_t c = col / (ih * iw);
      const auto ky = static_cast<std::ptrdiff_t>((col / iw) % ih) - top;
      const auto kx = static_cast<std::ptrdiff_t>(col % iw) - left;
      if (ky < 0 || kx < 0 || ky >= static_cast<std::ptrdiff_t>(kh) ||
          kx >= static_cast<std::ptrdiff_t>(kw)) {
        continue;
      }
      a[row * n + col] =
          op.weights()[((o * ic + c) * kh + static_cast<std::size_t>(ky)) * kw +
                       static_cast<std::size_t>(kx)];
    }
  }
  return a;
}

}  // namespace lipcert

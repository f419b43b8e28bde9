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

#include "lipcert/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>

#include "lipcert/error.hpp"

namespace lipcert {

bool NetworkBoundTrace::all_converged() const {
  return std::all_of(records.begin(), records.end(), [](const auto& r) {
    return !r.power_iteration || r.power_iteration->converged;
  });
}

std::uint64_t layer_seed(const BoundConfig& config, std::size_t layer_index) {
  return derive_seed(config.power.seed, layer_index);
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1) {
    throw Error("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string tensor_digest(const Tensor& t) {
  std::vector<std::uint8_t> bytes(t.size() * sizeof(double));
  std::memcpy(bytes.data(), t.data().data(), bytes.size());
  return sha256_hex(bytes);
}

namespace {

BoundConfig seeded_for(const BoundConfig& config, std::size_t layer_index) {
  BoundConfig c = config;
  c.power.seed = layer_seed(config, layer_index);
  return c;
}

}  // namespace

NetworkBoundTrace network_local_bound(const NetworkSpec& net, const Tensor& x0,
                                      double eps, const BoundConfig& config) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw ConfigError("eps must be finite and non-negative");
  }
  if (x0.shape() != net.input_shape()) {
    throw ShapeError("network_local_bound: expected input " +
                     to_string(net.input_shape()) + ", got " +
                     to_string(x0.shape()));
  }
  if (!x0.all_finite()) {
    throw InvalidInputError("network_local_bound: nominal input is not finite");
  }

  NetworkBoundTrace trace;
  trace.eps_input = eps;
  trace.nominal_input_digest = tensor_digest(x0);

  Tensor x = x0;
  DomainMask mask = DomainMask::all_ones(x0.shape());
  double layer_eps = eps;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const LayerSpec& layer = net.layer(i);
    const BoundConfig cfg = seeded_for(config, i);
    LayerBoundRecord rec;
    rec.layer_index = i;
    rec.layer_kind = kind_of(layer);
    rec.eps_in = layer_eps;

    DomainMask next;
    Tensor next_x;
    switch (rec.layer_kind) {
      case LayerKind::kAffineRelu: {
        const auto& op = std::get<AffineRelu>(layer).op;
        AffineReluBound b = affine_relu_bound(op, x, mask, layer_eps, cfg);
        rec.lipschitz = b.lipschitz_ub;
        rec.power_iteration = b.power_iteration;
        next = std::move(b.next_mask);
        next_x = std::move(b.y0);
        for (auto& v : next_x.data()) v = std::max(v, 0.0);
        break;
      }
      case LayerKind::kAffine: {
        const auto& op = std::get<Affine>(layer).op;
        const SpectralEstimate masked = affine_bound(op, mask, cfg);
        rec.lipschitz = masked.value;
        rec.power_iteration = masked.report;
        rec.lipschitz_unmasked =
            mask.is_identity()
                ? masked.value
                : affine_bound(op, DomainMask::all_ones(mask.shape()), cfg).value;
        next = DomainMask::all_ones(op.output_shape());
        rec.mask_reset = true;
        next_x = op.apply(x);
        break;
      }
      case LayerKind::kMaxPool2d: {
        const auto& pool = std::get<MaxPool2d>(layer);
        MaxPoolBound b = maxpool_bound(pool, mask);
        rec.lipschitz = b.lipschitz;
        rec.n_max = b.n_max;
        next = std::move(b.next_mask);
        next_x = maxpool_forward(pool, x);
        break;
      }
      case LayerKind::kFlatten:
      case LayerKind::kIdentity:
        rec.lipschitz = 1.0;
        next = propagate_mask(layer, mask);
        next_x = forward_layer(layer, x);
        break;
    }

    rec.eps_out = rec.eps_in * rec.lipschitz;
    rec.active_fraction = next.active_fraction();
    trace.l_net *= rec.lipschitz;
    trace.records.push_back(rec);

    layer_eps = rec.eps_out;
    mask = std::move(next);
    x = std::move(next_x);
  }
  return trace;
}

NetworkBoundTrace network_global_bound(const NetworkSpec& net,
                                       const BoundConfig& config) {
  NetworkBoundTrace trace;
  trace.eps_input = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < net.size(); ++i) {
    const LayerSpec& layer = net.layer(i);
    LayerBoundRecord rec;
    rec.layer_index = i;
    rec.layer_kind = kind_of(layer);
    const AffineOperator* op = nullptr;
    if (const auto* l = std::get_if<AffineRelu>(&layer)) op = &l->op;
    if (const auto* l = std::get_if<Affine>(&layer)) op = &l->op;
    if (op) {
      const SpectralEstimate est = affine_bound(
          *op, DomainMask::all_ones(op->input_shape()), seeded_for(config, i));
      rec.lipschitz = est.value;
      rec.power_iteration = est.report;
      if (rec.layer_kind == LayerKind::kAffine) {
        rec.lipschitz_unmasked = est.value;
        rec.mask_reset = true;
      }
    } else if (const auto* pool = std::get_if<MaxPool2d>(&layer)) {
      rec.n_max = maxpool_n_max(*pool);
      rec.lipschitz = std::sqrt(static_cast<double>(*rec.n_max));
    }
    rec.eps_in = std::numeric_limits<double>::infinity();
    rec.eps_out = rec.eps_in;
    rec.active_fraction = 1.0;
    trace.l_net *= rec.lipschitz;
    trace.records.push_back(rec);
  }
  return trace;
}

}  // namespace lipcert

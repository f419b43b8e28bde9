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

#include "lipcert/network.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "lipcert/error.hpp"

namespace lipcert {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

Shape MaxPool2d::output_shape() const {
  const std::size_t h = input_shape[1] + 2 * padding[0];
  const std::size_t w = input_shape[2] + 2 * padding[1];
  return {input_shape[0], (h - kernel[0]) / stride[0] + 1,
          (w - kernel[1]) / stride[1] + 1};
}

MaxPool2d make_maxpool(const Shape& input_shape,
                       std::array<std::size_t, 2> kernel,
                       std::array<std::size_t, 2> stride,
                       std::array<std::size_t, 2> padding) {
  if (input_shape.size() != 3) {
    throw ShapeError("maxpool2d input must be [c, h, w], got " +
                     to_string(input_shape));
  }
  for (int d = 0; d < 2; ++d) {
    if (kernel[d] == 0 || stride[d] == 0) {
      throw ShapeError("maxpool2d kernel and stride must be >= 1");
    }
    if (2 * padding[d] > kernel[d]) {
      throw ShapeError("maxpool2d padding must be at most half the kernel");
    }
    if (input_shape[1 + d] + 2 * padding[d] < kernel[d]) {
      throw ShapeError("maxpool2d kernel larger than padded input " +
                       to_string(input_shape));
    }
  }
  return MaxPool2d{kernel, stride, padding, input_shape};
}

LayerKind kind_of(const LayerSpec& layer) {
  return static_cast<LayerKind>(layer.index());
}

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kAffineRelu: return "affine_relu";
    case LayerKind::kAffine: return "affine";
    case LayerKind::kMaxPool2d: return "maxpool2d";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kIdentity: return "identity";
  }
  return "unknown";
}

Shape input_shape_of(const LayerSpec& layer) {
  return std::visit(
      Overloaded{
          [](const AffineRelu& l) { return l.op.input_shape(); },
          [](const Affine& l) { return l.op.input_shape(); },
          [](const MaxPool2d& l) { return l.input_shape; },
          [](const Flatten& l) { return l.input_shape; },
          [](const Identity& l) { return l.shape; },
      },
      layer);
}

Shape output_shape_of(const LayerSpec& layer) {
  return std::visit(
      Overloaded{
          [](const AffineRelu& l) { return l.op.output_shape(); },
          [](const Affine& l) { return l.op.output_shape(); },
          [](const MaxPool2d& l) { return l.output_shape(); },
          [](const Flatten& l) { return Shape{numel(l.input_shape)}; },
          [](const Identity& l) { return l.shape; },
      },
      layer);
}

NetworkSpec NetworkSpec::create(Shape input_shape,
                                std::vector<LayerSpec> layers,
                                std::vector<std::string> class_labels) {
  if (layers.empty()) throw ShapeError("network has no layers");
  if (input_shape.empty() || numel(input_shape) == 0) {
    throw ShapeError("network input shape is empty");
  }
  Shape current = input_shape;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Shape expected = input_shape_of(layers[i]);
    if (expected != current) {
      std::ostringstream os;
      os << "layer " << i << " (" << to_string(kind_of(layers[i]))
         << ") expects input " << to_string(expected) << " but ";
      if (i == 0) {
        os << "the network input is " << to_string(current);
      } else {
        os << "layer " << i - 1 << " (" << to_string(kind_of(layers[i - 1]))
           << ") produces " << to_string(current);
      }
      throw ShapeError(os.str());
    }
    current = output_shape_of(layers[i]);
  }
  if (!class_labels.empty() && class_labels.size() != numel(current)) {
    throw ShapeError("class_labels has " + std::to_string(class_labels.size()) +
                     " entries for an output of size " +
                     std::to_string(numel(current)));
  }
  NetworkSpec net;
  net.input_shape_ = std::move(input_shape);
  net.layers_ = std::move(layers);
  net.class_labels_ = std::move(class_labels);
  return net;
}

Shape NetworkSpec::output_shape() const {
  return output_shape_of(layers_.back());
}

Tensor maxpool_forward(const MaxPool2d& pool, const Tensor& x,
                       std::vector<std::size_t>* argmax) {
  if (x.shape() != pool.input_shape) {
    throw ShapeError("maxpool2d: expected input " +
                     to_string(pool.input_shape) + ", got " +
                     to_string(x.shape()));
  }
  const Shape out_shape = pool.output_shape();
  const std::size_t c = out_shape[0], oh = out_shape[1], ow = out_shape[2];
  const std::size_t ih = pool.input_shape[1], iw = pool.input_shape[2];
  Tensor y(out_shape);
  if (argmax) argmax->assign(y.size(), 0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_index = 0;
        for (std::size_t ky = 0; ky < pool.kernel[0]; ++ky) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * pool.stride[0] + ky) -
                          static_cast<std::ptrdiff_t>(pool.padding[0]);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(ih)) continue;
          for (std::size_t kx = 0; kx < pool.kernel[1]; ++kx) {
            const auto ix =
                static_cast<std::ptrdiff_t>(ox * pool.stride[1] + kx) -
                static_cast<std::ptrdiff_t>(pool.padding[1]);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(iw)) continue;
            const std::size_t idx = (ch * ih + static_cast<std::size_t>(iy)) * iw +
                                    static_cast<std::size_t>(ix);
            // Row-major scan with strict '>' keeps the lowest index on ties.
            if (x[idx] > best) {
              best = x[idx];
              best_index = idx;
            }
          }
        }
        const std::size_t o = (ch * oh + oy) * ow + ox;
        y[o] = best;
        if (argmax) (*argmax)[o] = best_index;
      }
    }
  }
  return y;
}

Tensor forward_layer(const LayerSpec& layer, const Tensor& x) {
  return std::visit(
      Overloaded{
          [&](const AffineRelu& l) {
            Tensor y = l.op.apply(x);
            for (auto& v : y.data()) v = std::max(v, 0.0);
            return y;
          },
          [&](const Affine& l) { return l.op.apply(x); },
          [&](const MaxPool2d& l) { return maxpool_forward(l, x); },
          [&](const Flatten& l) {
            if (x.shape() != l.input_shape) {
              throw ShapeError("flatten: expected input " +
                               to_string(l.input_shape) + ", got " +
                               to_string(x.shape()));
            }
            return x.flatten();
          },
          [&](const Identity& l) {
            if (x.shape() != l.shape) {
              throw ShapeError("identity: expected input " +
                               to_string(l.shape) + ", got " +
                               to_string(x.shape()));
            }
            return x;
          },
      },
      layer);
}

Tensor forward(const NetworkSpec& net, const Tensor& x) {
  if (x.shape() != net.input_shape()) {
    throw ShapeError("forward: expected input " + to_string(net.input_shape()) +
                     ", got " + to_string(x.shape()));
  }
  Tensor current = x;
  for (const auto& layer : net.layers()) current = forward_layer(layer, current);
  return current;
}

std::vector<Tensor> forward_intermediates(const NetworkSpec& net,
                                          const Tensor& x) {
  if (x.shape() != net.input_shape()) {
    throw ShapeError("forward: expected input " + to_string(net.input_shape()) +
                     ", got " + to_string(x.shape()));
  }
  std::vector<Tensor> outputs;
  outputs.reserve(net.size());
  const Tensor* current = &x;
  for (const auto& layer : net.layers()) {
    outputs.push_back(forward_layer(layer, *current));
    current = &outputs.back();
  }
  return outputs;
}

std::string architecture_string(const NetworkSpec& net) {
  auto affine_token = [](const AffineOperator& op) {
    std::ostringstream os;
    if (op.kind() == OperatorKind::kDense) {
      os << "FC-" << op.output_size();
      return os.str();
    }
    const auto& ws = op.weights().shape();
    os << 'C' << ws[2];
    if (ws[3] != ws[2]) os << 'x' << ws[3];
    os << '-' << ws[0];
    const auto& s = op.geometry().stride;
    if (s[0] != 1 || s[1] != 1) os << "/s" << s[0];
    return os.str();
  };

  std::vector<std::string> tokens;
  for (const auto& layer : net.layers()) {
    std::visit(Overloaded{
                   [&](const AffineRelu& l) { tokens.push_back(affine_token(l.op)); },
                   [&](const Affine& l) { tokens.push_back(affine_token(l.op)); },
                   [&](const MaxPool2d& l) {
                     std::ostringstream os;
                     os << "MP-" << l.kernel[0];
                     if (l.kernel[1] != l.kernel[0]) os << 'x' << l.kernel[1];
                     if (l.stride[0] != l.kernel[0] || l.stride[1] != l.kernel[1]) {
                       os << "/s" << l.stride[0];
                     }
                     tokens.push_back(os.str());
                   },
                   [](const Flatten&) {},
                   [&](const Identity& l) {
                     if (l.source_kind == "dropout") tokens.push_back("D");
                   },
               },
               layer);
  }
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace lipcert

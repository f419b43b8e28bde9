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

#include "lipcert/model_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <sstream>

#include "lipcert/error.hpp"

namespace lipcert {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

float load_le_float(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int b = 3; b >= 0; --b) bits = (bits << 8) | p[b];
  return std::bit_cast<float>(bits);
}

void store_le_float(float f, unsigned char* p) {
  auto bits = std::bit_cast<std::uint32_t>(f);
  for (int b = 0; b < 4; ++b) {
    p[b] = static_cast<unsigned char>(bits & 0xffu);
    bits >>= 8;
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw LoadError(LoadErrorKind::kMalformed, std::nullopt,
                    "cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Accepts either a scalar k or a pair [a, b].
std::array<std::size_t, 2> pair_field(const json& entry, const char* key,
                                      std::array<std::size_t, 2> fallback,
                                      std::size_t index) {
  if (!entry.contains(key)) return fallback;
  const json& v = entry.at(key);
  try {
    if (v.is_number_unsigned()) {
      const auto k = v.get<std::size_t>();
      return {k, k};
    }
    if (v.is_array() && v.size() == 2) {
      return {v[0].get<std::size_t>(), v[1].get<std::size_t>()};
    }
  } catch (const json::exception&) {
  }
  throw LoadError(LoadErrorKind::kMalformed, index,
                  std::string("field '") + key +
                      "' must be a non-negative integer or a pair");
}

std::string string_field(const json& entry, const char* key,
                         std::size_t index) {
  if (!entry.contains(key) || !entry.at(key).is_string()) {
    throw LoadError(LoadErrorKind::kMalformed, index,
                    std::string("missing string field '") + key + "'");
  }
  return entry.at(key).get<std::string>();
}

std::vector<double> load_blob(const fs::path& base, const json& entry,
                              const char* key, std::size_t index) {
  const fs::path path = base / string_field(entry, key, index);
  if (!fs::exists(path)) {
    throw LoadError(LoadErrorKind::kMissingBlob, index,
                    "blob '" + path.string() + "' does not exist");
  }
  auto values = read_f32_blob(path);
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw LoadError(LoadErrorKind::kNonFinite, index,
                      "blob '" + path.string() + "' holds a non-finite value");
    }
  }
  return values;
}

std::string describe_previous(std::size_t index, const Shape& shape) {
  if (index == 0) return "the network input " + to_string(shape);
  return "layer " + std::to_string(index - 1) + " output " + to_string(shape);
}

[[noreturn]] void chain_error(std::size_t index, const std::string& expects,
                              const Shape& current) {
  throw LoadError(LoadErrorKind::kShapeChain, index,
                  "layer " + std::to_string(index) + " expects " + expects +
                      " but " + describe_previous(index, current) +
                      " does not match");
}

void check_conv_extras(const json& entry, std::size_t index) {
  if (entry.contains("dilation")) {
    const auto d = pair_field(entry, "dilation", {1, 1}, index);
    if (d[0] != 1 || d[1] != 1) {
      throw LoadError(LoadErrorKind::kDilation, index,
                      "only dilation 1 is supported");
    }
  }
  if (entry.contains("groups") && entry.at("groups") != 1) {
    throw LoadError(LoadErrorKind::kUnsupportedLayer, index,
                    "grouped convolutions are not supported");
  }
  if (entry.contains("padding_mode") && entry.at("padding_mode") != "zeros") {
    throw LoadError(LoadErrorKind::kUnsupportedLayer, index,
                    "only zero padding is supported");
  }
}

AffineOperator load_affine(const fs::path& base, const json& entry,
                           std::size_t index, const Shape& current) {
  const std::string op = string_field(entry, "op", index);
  if (op == "dense") {
    auto bias = load_blob(base, entry, "bias", index);
    auto weights = load_blob(base, entry, "weights", index);
    const std::size_t m =
        entry.value("out_features", static_cast<std::size_t>(bias.size()));
    if (m != bias.size() || m == 0) {
      throw LoadError(LoadErrorKind::kMalformed, index,
                      "dense bias has " + std::to_string(bias.size()) +
                          " values for " + std::to_string(m) + " outputs");
    }
    if (current.size() != 1) chain_error(index, "a flat input", current);
    const std::size_t n = current[0];
    if (entry.contains("in_features") &&
        entry.at("in_features").get<std::size_t>() != n) {
      chain_error(index,
                  std::to_string(entry.at("in_features").get<std::size_t>()) +
                      " inputs",
                  current);
    }
    if (weights.size() != m * n) {
      if (weights.size() % m == 0) {
        chain_error(index, std::to_string(weights.size() / m) + " inputs",
                    current);
      }
      throw LoadError(LoadErrorKind::kMalformed, index,
                      "dense weight blob has " + std::to_string(weights.size()) +
                          " values, not a multiple of " + std::to_string(m));
    }
    return AffineOperator::dense(Tensor({m, n}, std::move(weights)),
                                 Tensor({m}, std::move(bias)));
  }

  if (op == "conv2d") {
    check_conv_extras(entry, index);
    auto bias = load_blob(base, entry, "bias", index);
    auto weights = load_blob(base, entry, "weights", index);
    const std::size_t oc =
        entry.value("out_channels", static_cast<std::size_t>(bias.size()));
    if (oc != bias.size() || oc == 0) {
      throw LoadError(LoadErrorKind::kMalformed, index,
                      "conv2d bias has " + std::to_string(bias.size()) +
                          " values for " + std::to_string(oc) + " channels");
    }
    if (!entry.contains("kernel")) {
      throw LoadError(LoadErrorKind::kMalformed, index,
                      "conv2d needs a 'kernel' field");
    }
    const auto kernel = pair_field(entry, "kernel", {1, 1}, index);
    Conv2dGeometry geometry;
    geometry.stride = pair_field(entry, "stride", {1, 1}, index);
    geometry.padding = pair_field(entry, "padding", {0, 0}, index);
    if (kernel[0] == 0 || kernel[1] == 0 || geometry.stride[0] == 0 ||
        geometry.stride[1] == 0) {
      throw LoadError(LoadErrorKind::kMalformed, index,
                      "conv2d kernel and stride must be >= 1");
    }
    if (current.size() != 3) chain_error(index, "a [c, h, w] input", current);
    const std::size_t per_in = oc * kernel[0] * kernel[1];
    std::size_t ic = current[0];
    if (entry.contains("in_channels")) {
      const auto declared = entry.at("in_channels").get<std::size_t>();
      if (declared != ic) {
        chain_error(index, std::to_string(declared) + " input channels",
                    current);
      }
    }
    if (weights.size() != per_in * ic) {
      if (weights.size() % per_in == 0) {
        chain_error(index,
                    std::to_string(weights.size() / per_in) + " input channels",
                    current);
      }
      throw LoadError(LoadErrorKind::kMalformed, index,
                      "conv2d weight blob has " +
                          std::to_string(weights.size()) + " values");
    }
    try {
      return AffineOperator::conv2d(
          Tensor({oc, ic, kernel[0], kernel[1]}, std::move(weights)),
          Tensor({oc}, std::move(bias)), current, geometry);
    } catch (const ShapeError& e) {
      throw LoadError(LoadErrorKind::kShapeChain, index, e.what());
    }
  }

  throw LoadError(LoadErrorKind::kUnsupportedLayer, index,
                  "unsupported affine op '" + op + "'");
}

}  // namespace

std::vector<double> read_f32_blob(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw LoadError(LoadErrorKind::kMissingBlob, std::nullopt,
                    "cannot open blob '" + path.string() + "'");
  }
  std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>()};
  if (bytes.size() % 4 != 0) {
    throw LoadError(LoadErrorKind::kMalformed, std::nullopt,
                    "blob '" + path.string() + "' size " +
                        std::to_string(bytes.size()) +
                        " is not a multiple of 4");
  }
  std::vector<double> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = load_le_float(bytes.data() + 4 * i);
  }
  return values;
}

void write_f32_blob(const fs::path& path, std::span<const double> values) {
  std::vector<unsigned char> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    store_le_float(static_cast<float>(values[i]), bytes.data() + 4 * i);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

NetworkSpec load_model(const fs::path& manifest_path) {
  fs::path manifest = manifest_path;
  if (fs::is_directory(manifest)) manifest /= "model.json";
  if (!fs::exists(manifest)) {
    throw LoadError(LoadErrorKind::kMalformed, std::nullopt,
                    "manifest '" + manifest.string() + "' does not exist");
  }
  const fs::path base = manifest.parent_path();

  json doc;
  try {
    doc = json::parse(read_text(manifest));
  } catch (const json::parse_error& e) {
    throw LoadError(LoadErrorKind::kMalformed, std::nullopt,
                    std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format_version", 0) != kModelFormatVersion) {
    throw LoadError(LoadErrorKind::kMalformed, std::nullopt,
                    "manifest must be an object with format_version 1");
  }

  Shape input_shape;
  try {
    input_shape = doc.at("input_shape").get<Shape>();
  } catch (const json::exception&) {
    throw LoadError(LoadErrorKind::kMalformed, std::nullopt,
                    "input_shape must be a list of positive integers");
  }
  if ((input_shape.size() != 1 && input_shape.size() != 3) ||
      numel(input_shape) == 0) {
    throw LoadError(LoadErrorKind::kMalformed, std::nullopt,
                    "input_shape must be [c, h, w] or [n]");
  }
  if (!doc.contains("layers") || !doc.at("layers").is_array() ||
      doc.at("layers").empty()) {
    throw LoadError(LoadErrorKind::kMalformed, std::nullopt,
                    "manifest has no layers");
  }

  std::vector<LayerSpec> layers;
  std::vector<std::string> warnings;
  Shape current = input_shape;
  const json& entries = doc.at("layers");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const json& entry = entries[i];
    if (!entry.is_object()) {
      throw LoadError(LoadErrorKind::kMalformed, i, "layer entry is not an object");
    }
    const std::string kind = string_field(entry, "kind", i);
    try {
      if (kind == "affine_relu") {
        layers.emplace_back(AffineRelu{load_affine(base, entry, i, current)});
      } else if (kind == "affine") {
        layers.emplace_back(Affine{load_affine(base, entry, i, current)});
      } else if (kind == "maxpool2d") {
        if (current.size() != 3) chain_error(i, "a [c, h, w] input", current);
        if (entry.contains("dilation")) {
          const auto d = pair_field(entry, "dilation", {1, 1}, i);
          if (d[0] != 1 || d[1] != 1) {
            throw LoadError(LoadErrorKind::kDilation, i,
                            "only dilation 1 is supported");
          }
        }
        if (!entry.contains("kernel")) {
          throw LoadError(LoadErrorKind::kMalformed, i,
                          "maxpool2d needs a 'kernel' field");
        }
        const auto kernel = pair_field(entry, "kernel", {1, 1}, i);
        const auto stride = pair_field(entry, "stride", kernel, i);
        const auto padding = pair_field(entry, "padding", {0, 0}, i);
        try {
          layers.emplace_back(make_maxpool(current, kernel, stride, padding));
        } catch (const ShapeError& e) {
          throw LoadError(LoadErrorKind::kMalformed, i, e.what());
        }
      } else if (kind == "flatten") {
        layers.emplace_back(Flatten{current});
      } else if (kind == "identity") {
        layers.emplace_back(Identity{current, "identity"});
      } else if (kind == "dropout") {
        layers.emplace_back(Identity{current, "dropout"});
        warnings.push_back("layer " + std::to_string(i) +
                           ": dropout mapped to identity (inference mode)");
      } else if (kind == "adaptive_avg_pool2d") {
        if (entry.contains("output_size") && current.size() == 3) {
          const auto out = pair_field(entry, "output_size", {0, 0}, i);
          if (out[0] != current[1] || out[1] != current[2]) {
            throw LoadError(LoadErrorKind::kUnsupportedLayer, i,
                            "adaptive_avg_pool2d only supported when it is "
                            "the identity (output size equals input size)");
          }
        }
        layers.emplace_back(Identity{current, "adaptive_avg_pool2d"});
        warnings.push_back("layer " + std::to_string(i) +
                           ": adaptive_avg_pool2d mapped to identity");
      } else if (kind == "relu") {
        if (layers.empty() || !std::holds_alternative<Affine>(layers.back())) {
          throw LoadError(LoadErrorKind::kUnsupportedLayer, i,
                          "a standalone relu must follow an 'affine' layer");
        }
        AffineOperator op = std::get<Affine>(layers.back()).op;
        layers.back() = AffineRelu{std::move(op)};
        warnings.push_back("layer " + std::to_string(i) +
                           ": relu fused into the preceding affine layer");
        continue;
      } else {
        throw LoadError(LoadErrorKind::kUnsupportedLayer, i,
                        "unsupported layer kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw LoadError(LoadErrorKind::kMalformed, i, e.what());
    }
    current = output_shape_of(layers.back());
  }

  std::vector<std::string> labels;
  if (doc.contains("class_labels")) {
    try {
      labels = doc.at("class_labels").get<std::vector<std::string>>();
    } catch (const json::exception&) {
      throw LoadError(LoadErrorKind::kMalformed, std::nullopt,
                      "class_labels must be a list of strings");
    }
  }

  NetworkSpec net;
  try {
    net = NetworkSpec::create(std::move(input_shape), std::move(layers),
                              std::move(labels));
  } catch (const ShapeError& e) {
    throw LoadError(LoadErrorKind::kShapeChain, std::nullopt, e.what());
  }
  for (auto& w : warnings) net.add_warning(std::move(w));
  return net;
}

namespace {

json affine_entry(const AffineOperator& op, const std::string& kind,
                  std::size_t index, const fs::path& dir) {
  json entry;
  entry["kind"] = kind;
  entry["op"] = to_string(op.kind());
  const std::string stem = "layer" + std::to_string(index);
  entry["weights"] = stem + "_weights.bin";
  entry["bias"] = stem + "_bias.bin";
  write_f32_blob(dir / (stem + "_weights.bin"), op.weights().data());
  write_f32_blob(dir / (stem + "_bias.bin"), op.bias().data());
  if (op.kind() == OperatorKind::kConv2d) {
    const auto& ws = op.weights().shape();
    entry["out_channels"] = ws[0];
    entry["kernel"] = {ws[2], ws[3]};
    entry["stride"] = op.geometry().stride;
    entry["padding"] = op.geometry().padding;
  } else {
    entry["out_features"] = op.output_size();
  }
  return entry;
}

}  // namespace

void save_model(const NetworkSpec& net, const fs::path& dir) {
  fs::create_directories(dir);
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["input_shape"] = net.input_shape();
  if (!net.class_labels().empty()) doc["class_labels"] = net.class_labels();
  json layers = json::array();
  for (std::size_t i = 0; i < net.size(); ++i) {
    const LayerSpec& layer = net.layer(i);
    if (const auto* l = std::get_if<AffineRelu>(&layer)) {
      layers.push_back(affine_entry(l->op, "affine_relu", i, dir));
    } else if (const auto* l = std::get_if<Affine>(&layer)) {
      layers.push_back(affine_entry(l->op, "affine", i, dir));
    } else if (const auto* l = std::get_if<MaxPool2d>(&layer)) {
      layers.push_back({{"kind", "maxpool2d"},
                        {"kernel", l->kernel},
                        {"stride", l->stride},
                        {"padding", l->padding}});
    } else if (std::holds_alternative<Flatten>(layer)) {
      layers.push_back({{"kind", "flatten"}});
    } else {
      const auto& id = std::get<Identity>(layer);
      const bool known = id.source_kind == "dropout" ||
                         id.source_kind == "adaptive_avg_pool2d";
      layers.push_back({{"kind", known ? id.source_kind : "identity"}});
    }
  }
  doc["layers"] = std::move(layers);
  std::ofstream out(dir / "model.json", std::ios::trunc);
  if (!out) throw Error("cannot write " + (dir / "model.json").string());
  out << doc.dump(2) << '\n';
}

namespace {

Tensor pixels_to_tensor(const unsigned char* pixels, std::size_t channels,
                        std::size_t height, std::size_t width) {
  Tensor t({channels, height, width});
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        t[(c * height + y) * width + x] =
            pixels[(y * width + x) * channels + c] / 255.0;
      }
    }
  }
  return t;
}

Tensor load_png(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw LoadError(LoadErrorKind::kMalformed, std::nullopt,
                    "cannot read PNG '" + path.string() + "': " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<unsigned char> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw LoadError(LoadErrorKind::kMalformed, std::nullopt,
                    "cannot decode PNG '" + path.string() + "': " + message);
  }
  return pixels_to_tensor(pixels.data(), color ? 3 : 1, image.height,
                          image.width);
}

Tensor load_netpbm(const fs::path& path) {
  const std::string bytes = read_text(path);
  std::istringstream in(bytes);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P6") {
    throw LoadError(LoadErrorKind::kMalformed, std::nullopt,
                    "'" + path.string() + "' is not a binary PGM/PPM");
  }
  auto next_int = [&]() {
    for (;;) {
      in >> std::ws;
      if (in.peek() == '#') {
        std::string comment;
        std::getline(in, comment);
        continue;
      }
      std::size_t v = 0;
      if (!(in >> v)) {
        throw LoadError(LoadErrorKind::kMalformed, std::nullopt,
                        "bad netpbm header in '" + path.string() + "'");
      }
      return v;
    }
  };
  const std::size_t width = next_int();
  const std::size_t height = next_int();
  const std::size_t maxval = next_int();
  if (maxval == 0 || maxval > 255 || width == 0 || height == 0) {
    throw LoadError(LoadErrorKind::kMalformed, std::nullopt,
                    "only 8-bit netpbm images are supported");
  }
  in.get();  // single whitespace before the raster
  const std::size_t channels = magic == "P6" ? 3 : 1;
  const auto offset = static_cast<std::size_t>(in.tellg());
  if (bytes.size() < offset + width * height * channels) {
    throw LoadError(LoadErrorKind::kMalformed, std::nullopt,
                    "truncated netpbm raster in '" + path.string() + "'");
  }
  Tensor t = pixels_to_tensor(
      reinterpret_cast<const unsigned char*>(bytes.data() + offset), channels,
      height, width);
  // Rescale to [0, 1] when maxval < 255.
  if (maxval != 255) {
    for (auto& v : t.data()) v = v * 255.0 / static_cast<double>(maxval);
  }
  return t;
}

fs::path sidecar_for(const fs::path& blob) {
  fs::path appended = blob;
  appended += ".json";
  if (fs::exists(appended)) return appended;
  fs::path replaced = blob;
  replaced.replace_extension(".json");
  return replaced;
}

}  // namespace

Tensor load_input(const fs::path& path) {
  if (!fs::exists(path)) {
    throw LoadError(LoadErrorKind::kMissingBlob, std::nullopt,
                    "input '" + path.string() + "' does not exist");
  }
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") return load_png(path);
  if (ext == ".pgm" || ext == ".ppm") return load_netpbm(path);

  const fs::path sidecar = sidecar_for(path);
  if (!fs::exists(sidecar)) {
    throw LoadError(LoadErrorKind::kMissingBlob, std::nullopt,
                    "input blob '" + path.string() +
                        "' has no shape sidecar (expected '" +
                        sidecar.string() + "')");
  }
  Shape shape;
  try {
    shape = json::parse(read_text(sidecar)).at("shape").get<Shape>();
  } catch (const json::exception& e) {
    throw LoadError(LoadErrorKind::kMalformed, std::nullopt,
                    "bad sidecar '" + sidecar.string() + "': " + e.what());
  }
  auto values = read_f32_blob(path);
  if (values.size() != numel(shape) || numel(shape) == 0) {
    throw LoadError(LoadErrorKind::kMalformed, std::nullopt,
                    "input blob holds " + std::to_string(values.size()) +
                        " values but the sidecar shape is " + to_string(shape));
  }
  Tensor x(std::move(shape), std::move(values));
  if (!x.all_finite()) {
    throw LoadError(LoadErrorKind::kNonFinite, std::nullopt,
                    "input '" + path.string() + "' holds non-finite values");
  }
  return x;
}

void save_input(const Tensor& x, const fs::path& path) {
  write_f32_blob(path, x.data());
  fs::path sidecar = path;
  sidecar.replace_extension(".json");
  std::ofstream out(sidecar, std::ios::trunc);
  if (!out) throw Error("cannot write " + sidecar.string());
  out << json{{"shape", x.shape()}}.dump() << '\n';
}

}  // namespace lipcert

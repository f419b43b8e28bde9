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

#include <gtest/gtest.h>
#include <png.h>

#include <fstream>
#include <nlohmann/json.hpp>

#include "lipcert/error.hpp"
#include "lipcert/model_io.hpp"
#include "lipcert/zoo.hpp"
#include "test_support.hpp"

namespace lipcert {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void write_json(const fs::path& p, const json& j) {
  std::ofstream(p) << j.dump(2);
}

// Blob of n float32 values 0.5, -0.25, ... stored next to the manifest.
std::string blob(const fs::path& dir, const std::string& name, std::size_t n,
                 double value = 0.5) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = (i % 2 ? -value / 2 : value);
  write_f32_blob(dir / name, v);
  return name;
}

json dense_entry(const fs::path& dir, const std::string& tag, std::size_t m,
                 std::size_t n, const char* kind = "affine") {
  return {{"kind", kind},
          {"op", "dense"},
          {"weights", blob(dir, tag + "_w.bin", m * n)},
          {"bias", blob(dir, tag + "_b.bin", m)}};
}

LoadError expect_load_error(const fs::path& path) {
  try {
    load_model(path);
  } catch (const LoadError& e) {
    return e;
  }
  ADD_FAILURE() << "expected LoadError";
  return LoadError(LoadErrorKind::kMalformed, std::nullopt, "none");
}

TEST(LoadModel, MinimalIdentityDense) {
  testing::TempDir dir;
  write_f32_blob(dir.path() / "w.bin", std::vector<double>{1, 0, 0, 1});
  write_f32_blob(dir.path() / "b.bin", std::vector<double>{0, 0});
  write_json(dir.path() / "model.json",
             {{"format_version", 1},
              {"input_shape", {2}},
              {"layers",
               {{{"kind", "affine"}, {"op", "dense"}, {"weights", "w.bin"}, {"bias", "b.bin"}}}}});
  const NetworkSpec net = load_model(dir.path());
  ASSERT_EQ(net.size(), 1u);
  EXPECT_EQ(forward(net, Tensor::vector({3, -4})), Tensor::vector({3, -4}));
  EXPECT_EQ(load_model(dir.path() / "model.json").size(), 1u);
}

TEST(LoadModel, RoundTripMnistNet) {
  testing::TempDir dir;
  const NetworkSpec net = mnist_net(5);
  save_model(net, dir.path());
  const NetworkSpec back = load_model(dir.path());
  EXPECT_EQ(back.size(), net.size());
  EXPECT_EQ(architecture_string(back), "C5-6 MP-2 C5-16 MP-2 FC-120 FC-84 FC-10");
  EXPECT_EQ(back.output_shape(), Shape{10});
  // Saved weights are float32; the reload reproduces the float32-rounded net.
  const Tensor x = synthetic_image({1, 28, 28}, 1);
  const Tensor a = forward(net, x), b = forward(back, x);
  EXPECT_LT(max_abs_diff(a, b), 1e-5);
  save_model(back, dir.path() / "again");
  EXPECT_EQ(forward(load_model(dir.path() / "again"), x), b);
}

TEST(LoadModel, MissingBlobNamesFile) {
  testing::TempDir dir;
  json m = {{"format_version", 1},
            {"input_shape", {3}},
            {"layers", {dense_entry(dir.path(), "l0", 2, 3)}}};
  m["layers"][0]["weights"] = "nope.bin";
  write_json(dir.path() / "model.json", m);
  const LoadError e = expect_load_error(dir.path());
  EXPECT_EQ(e.kind(), LoadErrorKind::kMissingBlob);
  EXPECT_EQ(e.layer(), std::optional<std::size_t>(0));
  EXPECT_NE(std::string(e.what()).find("nope.bin"), std::string::npos);
}

TEST(LoadModel, ShapeChainErrorNamesBothLayers) {
  testing::TempDir dir;
  json conv = {{"kind", "affine_relu"},
               {"op", "conv2d"},
               {"weights", blob(dir.path(), "c_w.bin", 2 * 1 * 3 * 3)},
               {"bias", blob(dir.path(), "c_b.bin", 2)},
               {"kernel", {3, 3}},
               {"stride", {1, 1}},
               {"padding", {0, 0}},
               {"out_channels", 2}};
  // conv output is [2, 4, 4] = 32 values; the flatten is fine, the dense
  // layer then claims 30 inputs.
  write_json(dir.path() / "model.json",
             {{"format_version", 1},
              {"input_shape", {1, 6, 6}},
              {"layers",
               {conv, {{"kind", "flatten"}}, dense_entry(dir.path(), "d", 2, 30)}}});
  const LoadError e = expect_load_error(dir.path());
  EXPECT_EQ(e.kind(), LoadErrorKind::kShapeChain);
  EXPECT_EQ(e.layer(), std::optional<std::size_t>(2));
  const std::string msg = e.what();
  EXPECT_NE(msg.find("layer 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("layer 1"), std::string::npos) << msg;
}

TEST(LoadModel, DenseAfterConvWithoutFlattenIsChainError) {
  testing::TempDir dir;
  json conv = {{"kind", "affine_relu"}, {"op", "conv2d"},
               {"weights", blob(dir.path(), "c_w.bin", 9)},
               {"bias", blob(dir.path(), "c_b.bin", 1)},
               {"kernel", {3, 3}}};
  write_json(dir.path() / "model.json",
             {{"format_version", 1},
              {"input_shape", {1, 4, 4}},
              {"layers", {conv, dense_entry(dir.path(), "d", 2, 4)}}});
  const LoadError e = expect_load_error(dir.path());
  EXPECT_EQ(e.kind(), LoadErrorKind::kShapeChain);
  EXPECT_EQ(e.layer(), std::optional<std::size_t>(1));
}

TEST(LoadModel, RejectsDilationUnsupportedAndNonFinite) {
  testing::TempDir dir;
  json conv = {{"kind", "affine_relu"}, {"op", "conv2d"},
               {"weights", blob(dir.path(), "c_w.bin", 9)},
               {"bias", blob(dir.path(), "c_b.bin", 1)},
               {"kernel", {3, 3}},
               {"dilation", {2, 2}}};
  json base = {{"format_version", 1}, {"input_shape", {1, 8, 8}}};

  base["layers"] = {conv};
  write_json(dir.path() / "model.json", base);
  EXPECT_EQ(expect_load_error(dir.path()).kind(), LoadErrorKind::kDilation);

  base["layers"] = {{{"kind", "batchnorm"}}};
  write_json(dir.path() / "model.json", base);
  const LoadError unsupported = expect_load_error(dir.path());
  EXPECT_EQ(unsupported.kind(), LoadErrorKind::kUnsupportedLayer);
  EXPECT_EQ(unsupported.layer(), std::optional<std::size_t>(0));

  conv.erase("dilation");
  write_f32_blob(dir.path() / "bad.bin",
                 std::vector<double>{1, 1, 1, 1, std::numeric_limits<double>::infinity(), 1, 1, 1, 1});
  conv["weights"] = "bad.bin";
  base["layers"] = {conv};
  write_json(dir.path() / "model.json", base);
  EXPECT_EQ(expect_load_error(dir.path()).kind(), LoadErrorKind::kNonFinite);

  write_json(dir.path() / "model.json", {{"format_version", 1}, {"input_shape", {2}}, {"layers", json::array()}});
  EXPECT_EQ(expect_load_error(dir.path()).kind(), LoadErrorKind::kMalformed);

  write_json(dir.path() / "model.json", {{"format_version", 2}, {"input_shape", {2}}, {"layers", json::array()}});
  EXPECT_EQ(expect_load_error(dir.path()).kind(), LoadErrorKind::kMalformed);
}

TEST(LoadModel, DropoutBecomesIdentityWithWarning) {
  testing::TempDir dir;
  write_json(dir.path() / "model.json",
             {{"format_version", 1},
              {"input_shape", {3}},
              {"layers",
               {dense_entry(dir.path(), "a", 4, 3, "affine_relu"),
                {{"kind", "dropout"}},
                dense_entry(dir.path(), "b", 2, 4)}}});
  const NetworkSpec net = load_model(dir.path());
  ASSERT_EQ(net.size(), 3u);
  EXPECT_EQ(kind_of(net.layer(1)), LayerKind::kIdentity);
  EXPECT_FALSE(net.warnings().empty());
}

TEST(LoadModel, BareReluFusesOrIsRejected) {
  testing::TempDir dir;
  write_json(dir.path() / "model.json",
             {{"format_version", 1},
              {"input_shape", {3}},
              {"layers",
               {dense_entry(dir.path(), "a", 4, 3), {{"kind", "relu"}},
                dense_entry(dir.path(), "b", 2, 4)}}});
  const NetworkSpec net = load_model(dir.path());
  ASSERT_EQ(net.size(), 2u);
  EXPECT_EQ(kind_of(net.layer(0)), LayerKind::kAffineRelu);

  write_json(dir.path() / "model.json",
             {{"format_version", 1},
              {"input_shape", {3}},
              {"layers", {{{"kind", "relu"}}, dense_entry(dir.path(), "b", 2, 3)}}});
  EXPECT_EQ(expect_load_error(dir.path()).kind(), LoadErrorKind::kUnsupportedLayer);
}

TEST(LoadInput, BlobWithSidecar) {
  testing::TempDir dir;
  const Tensor x = seeded_fill({1, 4, 3}, 2, Distribution::kUniform);
  save_input(x, dir.path() / "x.bin");
  EXPECT_TRUE(fs::exists(dir.path() / "x.json"));
  const Tensor back = load_input(dir.path() / "x.bin");
  EXPECT_EQ(back.shape(), x.shape());
  EXPECT_LT(max_abs_diff(back, x), 1e-7);
  // 28x28 float32 blob is 3136 bytes.
  save_input(Tensor({1, 28, 28}), dir.path() / "img.bin");
  EXPECT_EQ(fs::file_size(dir.path() / "img.bin"), 3136u);
  EXPECT_THROW(load_input(dir.path() / "missing.bin"), Error);
}

TEST(LoadInput, PgmScaledToUnitRange) {
  testing::TempDir dir;
  {
    std::ofstream f(dir.path() / "a.pgm", std::ios::binary);
    f << "P5\n# comment\n3 2\n255\n";
    const unsigned char px[6] = {0, 51, 255, 102, 204, 153};
    f.write(reinterpret_cast<const char*>(px), 6);
  }
  const Tensor x = load_input(dir.path() / "a.pgm");
  EXPECT_EQ(x.shape(), (Shape{1, 2, 3}));
  EXPECT_DOUBLE_EQ(x[0], 0.0);
  EXPECT_DOUBLE_EQ(x[1], 0.2);
  EXPECT_DOUBLE_EQ(x[2], 1.0);
}

TEST(LoadInput, GrayPng) {
  testing::TempDir dir;
  const fs::path path = dir.path() / "g.png";
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = 4;
  image.height = 2;
  image.format = PNG_FORMAT_GRAY;
  const unsigned char px[8] = {0, 255, 51, 102, 0, 0, 0, 255};
  ASSERT_TRUE(png_image_write_to_file(&image, path.c_str(), 0, px, 0, nullptr));
  const Tensor x = load_input(path);
  EXPECT_EQ(x.shape(), (Shape{1, 2, 4}));
  EXPECT_DOUBLE_EQ(x[1], 1.0);
  EXPECT_DOUBLE_EQ(x[2], 0.2);
}

}  // namespace
}  // namespace lipcert

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

#include <filesystem>
#include <vector>

#include "lipcert/network.hpp"
#include "lipcert/tensor.hpp"

namespace lipcert {

inline constexpr int kModelFormatVersion = 1;

/// Reads a `model.json` manifest (or a directory containing one) and its
/// float32 weight blobs. Blob paths are relative to the manifest. Weights are
/// widened to double and the whole chain is validated; failures throw
/// LoadError naming the manifest entry index.
///
/// Besides the five canonical kinds the loader accepts `dropout` and
/// `adaptive_avg_pool2d` (mapped to identity with a warning) and a bare
/// `relu`, which is fused into the preceding `affine` entry.
NetworkSpec load_model(const std::filesystem::path& manifest);

/// Writes `dir/model.json` plus one weight and one bias blob per affine
/// layer. Values are narrowed to float32.
void save_model(const NetworkSpec& net, const std::filesystem::path& dir);

/// Raw little-endian float32 blob, widened to double.
std::vector<double> read_f32_blob(const std::filesystem::path& path);
void write_f32_blob(const std::filesystem::path& path,
                    std::span<const double> values);

/// Loads a nominal input: `.png`, `.pgm`, `.ppm` (8-bit, scaled to [0, 1],
/// shape [channels, h, w]) or a float32 blob with a JSON sidecar
/// `{"shape": [...]}` at `<path>.json` or `<stem>.json`.
Tensor load_input(const std::filesystem::path& path);

/// Writes a float32 blob and its `<stem>.json` sidecar.
void save_input(const Tensor& x, const std::filesystem::path& path);

}  // namespace lipcert

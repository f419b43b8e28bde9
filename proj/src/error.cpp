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

#include "lipcert/error.hpp"

namespace lipcert {

const char* to_string(LoadErrorKind kind) {
  switch (kind) {
    case LoadErrorKind::kMalformed: return "malformed";
    case LoadErrorKind::kMissingBlob: return "missing-blob";
    case LoadErrorKind::kShapeChain: return "shape-chain";
    case LoadErrorKind::kUnsupportedLayer: return "unsupported-layer";
    case LoadErrorKind::kDilation: return "dilation";
    case LoadErrorKind::kNonFinite: return "non-finite";
  }
  return "unknown";
}

namespace {

std::string decorate(LoadErrorKind kind, std::optional<std::size_t> layer,
                     const std::string& message) {
  std::string out = std::string(to_string(kind)) + " error";
  if (layer) out += " at layer " + std::to_string(*layer);
  return out + ": " + message;
}

}  // namespace

LoadError::LoadError(LoadErrorKind kind, std::optional<std::size_t> layer,
                     const std::string& message)
    : Error(decorate(kind, layer, message)), kind_(kind), layer_(layer) {}

}  // namespace lipcert

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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace lipcert {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values or arguments outside an operation's domain.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Bad configuration knobs (negative eps, zero batch size, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An oracle declined to run because the problem exceeds its size cap.
class RefusalError : public Error {
 public:
  using Error::Error;
};

// Power iteration failed to converge and the caller asked for strictness.
class NumericalError : public Error {
 public:
  using Error::Error;
};

enum class LoadErrorKind {
  kMalformed,
  kMissingBlob,
  kShapeChain,
  kUnsupportedLayer,
  kDilation,
  kNonFinite,
};

const char* to_string(LoadErrorKind kind);

// Model or input loading failure. Carries the offending layer index when the
// failure is attributable to a single layer.
class LoadError : public Error {
 public:
  LoadError(LoadErrorKind kind, std::optional<std::size_t> layer,
            const std::string& message);

  LoadErrorKind kind() const { return kind_; }
  std::optional<std::size_t> layer() const { return layer_; }

 private:
  LoadErrorKind kind_;
  std::optional<std::size_t> layer_;
};

}  // namespace lipcert

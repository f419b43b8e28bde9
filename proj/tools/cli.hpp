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

#include <iosfwd>
#include <string>
#include <vector>

namespace lipcert::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kModelOrInput = 2,
  kNumerical = 3,
};

/// Runs `lipcert <args...>` (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses start:stop:count[:log] into the eps list. Throws ConfigError.
std::vector<double> parse_eps_sweep(const std::string& spec);

}  // namespace lipcert::cli

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

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lipcert/certifier.hpp"
#include "lipcert/empirical.hpp"
#include "lipcert/pipeline.hpp"

namespace lipcert {

// Bump when the CSV columns change.
inline constexpr int kCsvSchemaVersion = 1;

/// One row of an eps sweep: the four curves plus convergence of the local run.
struct SweepRow {
  double eps = 0.0;
  double local_ub = 0.0;
  double global_ub = 0.0;
  double random_lb = 0.0;
  double gradient_lb = 0.0;
  bool converged = true;
};

/// Header is eps,local_ub,global_ub,random_lb,gradient_lb,converged. Numbers
/// use %.17g so they round-trip.
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Per-layer trace as CSV, one row per layer.
std::string trace_csv(const NetworkBoundTrace& trace);

/// Fixed-width text rendering of a certification search.
std::string certification_table(const CertificationResult& result);

std::string format_double(double v);

nlohmann::json to_json(const PowerIterationReport& report);
nlohmann::json to_json(const LayerBoundRecord& record);
nlohmann::json to_json(const NetworkBoundTrace& trace);
nlohmann::json to_json(const CertificationResult& result);
nlohmann::json to_json(const LowerBoundReport& report);
nlohmann::json to_json(const SweepRow& row);

}  // namespace lipcert

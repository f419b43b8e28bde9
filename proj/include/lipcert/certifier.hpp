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
#include <vector>

#include "lipcert/layer_bounds.hpp"
#include "lipcert/network.hpp"

namespace lipcert {

struct LogitGap {
  double delta = 0.0;
  std::size_t top_index = 0;
  std::size_t runner_up_index = 1;
};

/// Top-1 minus top-2 output at x0. Ties go to the lowest index.
LogitGap logit_gap(const NetworkSpec& net, const Tensor& x0);

struct SearchConfig {
  double eps_start = 1e-9;
  double growth = 2.0;
  double rel_tol = 1e-3;  // bisection stops at (hi - lo) / hi <= rel_tol
  // Expansion stops here; a net still certified at eps_max reports eps_max.
  double eps_max = 1e12;
  BoundConfig bound;
};

struct Probe {
  double eps = 0.0;
  double l_net = 0.0;
  double product = 0.0;  // eps * l_net
  bool accepted = false;
  bool converged = true;
};

struct CertificationResult {
  double certified_radius = 0.0;
  double delta = 0.0;
  double threshold = 0.0;  // delta / sqrt(2)
  std::vector<Probe> search_trace;
  std::size_t top_class_index = 0;
  std::size_t runner_up_index = 1;
  bool hit_eps_max = false;

  bool all_converged() const;
};

/// Largest probed eps with eps * L_net(x0, eps) < delta / sqrt(2). Doubles
/// eps from eps_start until the test fails, then bisects between the last
/// accepted and the first rejected eps.
CertificationResult certify_radius(const NetworkSpec& net, const Tensor& x0,
                                   const SearchConfig& config = {});

}  // namespace lipcert

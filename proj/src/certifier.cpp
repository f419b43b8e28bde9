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

#include "lipcert/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lipcert/error.hpp"
#include "lipcert/pipeline.hpp"

namespace lipcert {

LogitGap logit_gap(const NetworkSpec& net, const Tensor& x0) {
  const Tensor y = forward(net, x0);
  if (y.size() < 2) {
    throw ConfigError("logit_gap needs at least two outputs, got " +
                      std::to_string(y.size()));
  }
  LogitGap gap;
  gap.top_index = 0;
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (y[i] > y[gap.top_index]) gap.top_index = i;
  }
  gap.runner_up_index = gap.top_index == 0 ? 1 : 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (i != gap.top_index && y[i] > y[gap.runner_up_index]) {
      gap.runner_up_index = i;
    }
  }
  gap.delta = y[gap.top_index] - y[gap.runner_up_index];
  return gap;
}

bool CertificationResult::all_converged() const {
  return std::all_of(search_trace.begin(), search_trace.end(),
                     [](const Probe& p) { return p.converged; });
}

CertificationResult certify_radius(const NetworkSpec& net, const Tensor& x0,
                                   const SearchConfig& config) {
  if (!(config.eps_start > 0.0) || !(config.growth > 1.0) ||
      !(config.rel_tol > 0.0) || !(config.eps_max >= config.eps_start)) {
    throw ConfigError(
        "certify_radius: need eps_start > 0, growth > 1, rel_tol > 0 and "
        "eps_max >= eps_start");
  }
  CertificationResult result;
  const LogitGap gap = logit_gap(net, x0);
  result.delta = gap.delta;
  result.top_class_index = gap.top_index;
  result.runner_up_index = gap.runner_up_index;
  result.threshold = gap.delta / std::numbers::sqrt2;
  if (gap.delta <= 0.0) return result;

  auto probe = [&](double eps) {
    const NetworkBoundTrace trace = network_local_bound(net, x0, eps, config.bound);
    Probe p;
    p.eps = eps;
    p.l_net = trace.l_net;
    p.product = eps * trace.l_net;
    p.accepted = p.product < result.threshold;
    p.converged = trace.all_converged();
    result.search_trace.push_back(p);
    return p.accepted;
  };

  double lo = 0.0;
  double hi = config.eps_start;
  while (probe(hi)) {
    lo = hi;
    if (hi >= config.eps_max) {
      result.hit_eps_max = true;
      result.certified_radius = lo;
      return result;
    }
    hi = std::min(hi * config.growth, config.eps_max);
  }
  if (lo == 0.0) return result;  // eps_start already fails

  while ((hi - lo) / hi > config.rel_tol) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  result.certified_radius = lo;
  return result;
}

}  // namespace lipcert

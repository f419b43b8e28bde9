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

#include "lipcert/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace lipcert {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

// JSON has no infinity; non-finite numbers become strings.
nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "eps,local_ub,global_ub,random_lb,gradient_lb,converged\n";
  for (const auto& r : rows) {
    out << format_double(r.eps) << ',' << format_double(r.local_ub) << ','
        << format_double(r.global_ub) << ',' << format_double(r.random_lb) << ','
        << format_double(r.gradient_lb) << ',' << (r.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string trace_csv(const NetworkBoundTrace& trace) {
  std::ostringstream out;
  out << "layer,kind,lipschitz,eps_in,eps_out,active_fraction,n_max,"
         "pi_iterations,pi_converged\n";
  for (const auto& r : trace.records) {
    out << r.layer_index << ',' << to_string(r.layer_kind) << ','
        << format_double(r.lipschitz) << ',' << format_double(r.eps_in) << ','
        << format_double(r.eps_out) << ',' << format_double(r.active_fraction)
        << ',' << (r.n_max ? std::to_string(*r.n_max) : "") << ','
        << (r.power_iteration ? std::to_string(r.power_iteration->iterations) : "")
        << ',' << (r.power_iteration ? (r.power_iteration->converged ? "1" : "0") : "")
        << '\n';
  }
  return out.str();
}

std::string certification_table(const CertificationResult& result) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "top class      %zu\nrunner-up      %zu\n",
                result.top_class_index, result.runner_up_index);
  out << line;
  std::snprintf(line, sizeof line, "delta          %.9g\ndelta/sqrt(2)  %.9g\n",
                result.delta, result.threshold);
  out << line;
  std::snprintf(line, sizeof line, "%-6s %-16s %-16s %-16s %s\n", "probe", "eps",
                "L_net", "eps*L_net", "verdict");
  out << line;
  for (std::size_t i = 0; i < result.search_trace.size(); ++i) {
    const Probe& p = result.search_trace[i];
    std::snprintf(line, sizeof line, "%-6zu %-16.9g %-16.9g %-16.9g %s%s\n", i,
                  p.eps, p.l_net, p.product, p.accepted ? "accept" : "reject",
                  p.converged ? "" : " (unconverged)");
    out << line;
  }
  std::snprintf(line, sizeof line, "certified radius %.9g%s\n",
                result.certified_radius,
                result.hit_eps_max ? " (search cap reached)" : "");
  out << line;
  return out.str();
}

nlohmann::json to_json(const PowerIterationReport& report) {
  return {{"iterations", report.iterations},
          {"residual", number(report.residual)},
          {"converged", report.converged},
          {"raw_estimate", number(report.raw_estimate)}};
}

nlohmann::json to_json(const LayerBoundRecord& r) {
  nlohmann::json j = {{"layer_index", r.layer_index},
                      {"layer_kind", to_string(r.layer_kind)},
                      {"lipschitz", number(r.lipschitz)},
                      {"eps_in", number(r.eps_in)},
                      {"eps_out", number(r.eps_out)},
                      {"active_fraction", r.active_fraction},
                      {"mask_reset", r.mask_reset}};
  if (r.lipschitz_unmasked) j["lipschitz_unmasked"] = number(*r.lipschitz_unmasked);
  if (r.n_max) j["n_max"] = *r.n_max;
  if (r.power_iteration) j["power_iteration"] = to_json(*r.power_iteration);
  return j;
}

nlohmann::json to_json(const NetworkBoundTrace& trace) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : trace.records) records.push_back(to_json(r));
  return {{"l_net", number(trace.l_net)},
          {"eps_input", number(trace.eps_input)},
          {"nominal_input_digest", trace.nominal_input_digest},
          {"all_converged", trace.all_converged()},
          {"records", std::move(records)}};
}

nlohmann::json to_json(const CertificationResult& result) {
  nlohmann::json probes = nlohmann::json::array();
  for (const auto& p : result.search_trace) {
    probes.push_back({{"eps", number(p.eps)},
                      {"l_net", number(p.l_net)},
                      {"eps_times_l_net", number(p.product)},
                      {"accepted", p.accepted},
                      {"converged", p.converged}});
  }
  return {{"certified_radius", number(result.certified_radius)},
          {"delta", number(result.delta)},
          {"threshold", number(result.threshold)},
          {"top_class_index", result.top_class_index},
          {"runner_up_index", result.runner_up_index},
          {"hit_eps_max", result.hit_eps_max},
          {"search_trace", std::move(probes)}};
}

nlohmann::json to_json(const LowerBoundReport& report) {
  return {{"method", to_string(report.method)},
          {"best_ratio", number(report.best_ratio)},
          {"best_perturbation_norm", number(report.best_perturbation_norm)},
          {"samples_or_steps", report.samples_or_steps},
          {"seed", report.seed}};
}

nlohmann::json to_json(const SweepRow& row) {
  return {{"eps", number(row.eps)},
          {"local_ub", number(row.local_ub)},
          {"global_ub", number(row.global_ub)},
          {"random_lb", number(row.random_lb)},
          {"gradient_lb", number(row.gradient_lb)},
          {"converged", row.converged}};
}

}  // namespace lipcert

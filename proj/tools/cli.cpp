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

#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "lipcert/certifier.hpp"
#include "lipcert/empirical.hpp"
#include "lipcert/error.hpp"
#include "lipcert/model_io.hpp"
#include "lipcert/oracle.hpp"
#include "lipcert/parallel.hpp"
#include "lipcert/pipeline.hpp"
#include "lipcert/report.hpp"

namespace lipcert::cli {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::string model;
  std::string input;
  std::optional<double> eps;
  std::string eps_sweep;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string format;
  bool attack = false;
  bool strict = false;
  bool oracle = false;
  std::size_t threads = 0;
  std::size_t pi_iters = PowerIterationConfig{}.max_iterations;
  double pi_tol = PowerIterationConfig{}.tolerance;
  std::string pi_method = "lanczos";
  std::size_t samples = kDefaultRandomSamples;
  std::size_t steps = GradientAscentConfig{}.steps;
};

// Failure while reading the model or the input; maps to exit code 2.
struct InputStageError : Error {
  using Error::Error;
};

BoundConfig bound_config(const RunConfig& cfg) {
  BoundConfig bc;
  bc.power.max_iterations = cfg.pi_iters;
  bc.power.tolerance = cfg.pi_tol;
  bc.power.method =
      cfg.pi_method == "power" ? SpectralMethod::kPower : SpectralMethod::kLanczos;
  bc.threads = cfg.threads == 0 ? default_thread_count() : cfg.threads;
  return bc;
}

std::size_t thread_count(const RunConfig& cfg) {
  return cfg.threads == 0 ? default_thread_count() : cfg.threads;
}

NetworkSpec load_net(const RunConfig& cfg, std::ostream& err) {
  try {
    NetworkSpec net = load_model(cfg.model);
    for (const auto& w : net.warnings()) err << "warning: " << w << '\n';
    return net;
  } catch (const Error& e) {
    throw InputStageError(e.what());
  }
}

Tensor load_nominal(const RunConfig& cfg, const NetworkSpec& net) {
  if (cfg.input.empty()) throw ConfigError("--input is required");
  Tensor x;
  try {
    x = load_input(cfg.input);
  } catch (const Error& e) {
    throw InputStageError(e.what());
  }
  if (x.shape() != net.input_shape()) {
    if (x.size() != numel(net.input_shape())) {
      throw InputStageError("input shape " + to_string(x.shape()) +
                            " does not match the model input " +
                            to_string(net.input_shape()));
    }
    x = x.reshape(net.input_shape());
  }
  if (!x.all_finite()) throw InputStageError("input contains non-finite values");
  return x;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("failed writing " + path.string());
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message());
}

std::vector<double> eps_values(const RunConfig& cfg) {
  if (cfg.eps && !cfg.eps_sweep.empty()) {
    throw ConfigError("--eps and --eps-sweep are mutually exclusive");
  }
  if (cfg.eps) {
    if (!(*cfg.eps >= 0.0) || !std::isfinite(*cfg.eps)) {
      throw ConfigError("--eps must be finite and non-negative");
    }
    return {*cfg.eps};
  }
  if (cfg.eps_sweep.empty()) throw ConfigError("one of --eps or --eps-sweep is required");
  return parse_eps_sweep(cfg.eps_sweep);
}

int check_strict(const RunConfig& cfg, bool converged, std::ostream& err) {
  if (cfg.strict && !converged) {
    err << "error: power iteration did not converge (--strict)\n";
    return kNumerical;
  }
  if (!converged) {
    err << "warning: power iteration did not converge on some layer; "
           "affected bounds carry the safety factor\n";
  }
  return kOk;
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  char line[200];
  std::snprintf(line, sizeof line, "%-14s %-14s %-14s %-14s %-14s %s\n", "eps",
                "local_ub", "global_ub", "random_lb", "gradient_lb", "converged");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-14.6g %-14.8g %-14.8g %-14.8g %-14.8g %s\n",
                  r.eps, r.local_ub, r.global_ub, r.random_lb, r.gradient_lb,
                  r.converged ? "yes" : "no");
    out << line;
  }
  return out.str();
}

int cmd_bound(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::vector<double> eps_list = eps_values(cfg);
  const NetworkSpec net = load_net(cfg, err);
  const Tensor x0 = load_nominal(cfg, net);
  const BoundConfig bc = bound_config(cfg);
  const std::size_t threads = thread_count(cfg);

  const NetworkBoundTrace global = network_global_bound(net, bc);
  bool converged = global.all_converged();
  std::vector<SweepRow> rows;
  nlohmann::json json_rows = nlohmann::json::array();
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    const double eps = eps_list[i];
    const NetworkBoundTrace local = network_local_bound(net, x0, eps, bc);
    const LowerBoundReport random =
        lipschitz_lower_random(net, x0, eps, cfg.samples, derive_seed(cfg.seed, 2 * i), threads);
    GradientAscentConfig gc;
    gc.steps = cfg.steps;
    gc.seed = derive_seed(cfg.seed, 2 * i + 1);
    const LowerBoundReport gradient = lipschitz_lower_gradient(net, x0, eps, gc);
    converged = converged && local.all_converged();

    SweepRow row{eps, local.l_net, global.l_net, random.best_ratio,
                 gradient.best_ratio, local.all_converged() && global.all_converged()};
    rows.push_back(row);
    nlohmann::json j = to_json(row);
    j["local_trace"] = to_json(local);
    j["random"] = to_json(random);
    j["gradient"] = to_json(gradient);
    if (cfg.oracle) {
      const auto fn = [&](const Tensor& x) { return forward(net, x); };
      j["oracle_sampled_ratio"] = oracle::sampled_lipschitz_ratio(
          fn, x0, eps, DomainMask::all_ones(x0.shape()), 1000, cfg.seed);
    }
    json_rows.push_back(std::move(j));
  }
  if (const int code = check_strict(cfg, converged, err); code != kOk) return code;

  nlohmann::json doc = {{"csv_schema", kCsvSchemaVersion},
                        {"model", cfg.model},
                        {"input", cfg.input},
                        {"seed", cfg.seed},
                        {"power_iteration",
                         {{"method", to_string(bc.power.method)},
                          {"max_iterations", bc.power.max_iterations},
                          {"tolerance", bc.power.tolerance},
                          {"safety_factor", bc.power.safety_factor}}},
                        {"global_trace", to_json(global)},
                        {"rows", std::move(json_rows)}};
  const std::string csv = sweep_csv(rows);
  ensure_dir(cfg.out_dir);
  if (!cfg.out_dir.empty()) {
    write_file(fs::path(cfg.out_dir) / "bound.csv", csv);
    write_file(fs::path(cfg.out_dir) / "bound.json", doc.dump(2) + "\n");
  }
  if (cfg.format == "json") {
    out << doc.dump(2) << '\n';
  } else if (cfg.format == "table") {
    out << sweep_table(rows);
  } else {
    out << csv;
  }
  return kOk;
}

std::string probes_csv(const CertificationResult& result) {
  std::ostringstream out;
  out << "probe,eps,l_net,eps_times_l_net,accepted,converged\n";
  for (std::size_t i = 0; i < result.search_trace.size(); ++i) {
    const Probe& p = result.search_trace[i];
    out << i << ',' << format_double(p.eps) << ',' << format_double(p.l_net) << ','
        << format_double(p.product) << ',' << (p.accepted ? 1 : 0) << ','
        << (p.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

int cmd_certify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const NetworkSpec net = load_net(cfg, err);
  const Tensor x0 = load_nominal(cfg, net);
  SearchConfig sc;
  sc.bound = bound_config(cfg);
  const CertificationResult result = certify_radius(net, x0, sc);
  if (const int code = check_strict(cfg, result.all_converged(), err); code != kOk) {
    return code;
  }

  nlohmann::json doc = to_json(result);
  std::string attack_line;
  bool violated = false;
  if (cfg.attack) {
    AttackConfig ac;
    ac.seed = cfg.seed;
    const AttackResult attack = adversarial_attack(net, x0, ac);
    doc["attack"] = {{"norm", std::isfinite(attack.norm) ? nlohmann::json(attack.norm)
                                                         : nlohmann::json("inf")},
                     {"original_class", attack.original_class},
                     {"adversarial_class", attack.adversarial_class}};
    char line[160];
    if (std::isfinite(attack.norm)) {
      std::snprintf(line, sizeof line,
                    "attack upper bound %.9g (class %zu -> %zu)\n", attack.norm,
                    attack.original_class, attack.adversarial_class);
    } else {
      std::snprintf(line, sizeof line, "attack upper bound inf (no flip found)\n");
    }
    attack_line = line;
    violated = attack.norm <= result.certified_radius;
  }

  ensure_dir(cfg.out_dir);
  if (!cfg.out_dir.empty()) {
    write_file(fs::path(cfg.out_dir) / "certify.json", doc.dump(2) + "\n");
    write_file(fs::path(cfg.out_dir) / "certify.csv", probes_csv(result));
  }
  if (cfg.format == "json") {
    out << doc.dump(2) << '\n';
  } else if (cfg.format == "csv") {
    out << probes_csv(result);
  } else {
    out << certification_table(result) << attack_line;
  }
  if (violated) {
    err << "error: attack found a perturbation no larger than the certified radius\n";
    return kNumerical;
  }
  return kOk;
}

struct InspectRow {
  std::size_t index = 0;
  std::string kind;
  std::string op;
  std::string in_shape;
  std::string out_shape;
  std::size_t params = 0;
  std::optional<double> norm;
  std::optional<std::size_t> n_max;
  std::optional<double> oracle_norm;
  std::optional<std::size_t> oracle_n_max;
};

int cmd_inspect(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const NetworkSpec net = load_net(cfg, err);
  const BoundConfig bc = bound_config(cfg);
  const NetworkBoundTrace global = network_global_bound(net, bc);
  if (const int code = check_strict(cfg, global.all_converged(), err); code != kOk) {
    return code;
  }

  std::vector<InspectRow> rows;
  std::vector<std::string> shape_only;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const LayerSpec& layer = net.layer(i);
    const LayerBoundRecord& rec = global.records[i];
    InspectRow row;
    row.index = i;
    row.kind = to_string(kind_of(layer));
    row.in_shape = to_string(input_shape_of(layer));
    row.out_shape = to_string(output_shape_of(layer));
    const AffineOperator* op = nullptr;
    if (const auto* l = std::get_if<AffineRelu>(&layer)) op = &l->op;
    if (const auto* l = std::get_if<Affine>(&layer)) op = &l->op;
    if (op) {
      row.op = to_string(op->kind());
      row.params = op->parameter_count();
      row.norm = rec.lipschitz;
      if (cfg.oracle) {
        try {
          row.oracle_norm = oracle::dense_spectral_norm(materialize(*op));
        } catch (const RefusalError&) {
        }
      }
    } else if (const auto* pool = std::get_if<MaxPool2d>(&layer)) {
      row.op = "max";
      row.n_max = rec.n_max;
      if (cfg.oracle) {
        const std::size_t h = 2 * (pool->kernel[0] + pool->stride[0]);
        const std::size_t w = 2 * (pool->kernel[1] + pool->stride[1]);
        row.oracle_n_max = oracle::pooling_coverage_count({h, w}, pool->kernel,
                                                          pool->stride, pool->padding);
      }
    } else {
      shape_only.push_back(std::to_string(i) + " " + row.kind + " " + row.in_shape +
                           " -> " + row.out_shape);
      continue;
    }
    rows.push_back(row);
  }

  nlohmann::json doc = {{"architecture", architecture_string(net)},
                        {"input_shape", net.input_shape()},
                        {"global_bound", global.l_net},
                        {"warnings", net.warnings()}};
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = {{"index", r.index},         {"kind", r.kind},
                        {"op", r.op},               {"input_shape", r.in_shape},
                        {"output_shape", r.out_shape}, {"parameters", r.params}};
    if (r.norm) j["spectral_norm"] = *r.norm;
    if (r.n_max) j["n_max"] = *r.n_max;
    if (r.oracle_norm) j["oracle_spectral_norm"] = *r.oracle_norm;
    if (r.oracle_n_max) j["oracle_n_max"] = *r.oracle_n_max;
    layers.push_back(std::move(j));
  }
  doc["layers"] = std::move(layers);
  doc["shape_only_layers"] = shape_only;

  ensure_dir(cfg.out_dir);
  if (!cfg.out_dir.empty()) {
    write_file(fs::path(cfg.out_dir) / "inspect.json", doc.dump(2) + "\n");
  }
  if (cfg.format == "json") {
    out << doc.dump(2) << '\n';
    return kOk;
  }
  if (cfg.format == "csv") {
    out << "index,kind,op,input_shape,output_shape,parameters,spectral_norm,n_max\n";
    for (const auto& r : rows) {
      out << r.index << ',' << r.kind << ',' << r.op << ",\"" << r.in_shape << "\",\""
          << r.out_shape << "\"," << r.params << ','
          << (r.norm ? format_double(*r.norm) : "") << ','
          << (r.n_max ? std::to_string(*r.n_max) : "") << '\n';
    }
    return kOk;
  }
  out << "architecture " << architecture_string(net) << '\n';
  char line[240];
  std::snprintf(line, sizeof line, "%-5s %-12s %-7s %-14s %-14s %-10s %-12s %s\n", "#",
                "kind", "op", "input", "output", "params", "||A||", "n_max");
  out << line;
  for (const auto& r : rows) {
    const std::string norm = r.norm ? format_double(*r.norm).substr(0, 10) : "-";
    const std::string n_max = r.n_max ? std::to_string(*r.n_max) : "-";
    std::snprintf(line, sizeof line, "%-5zu %-12s %-7s %-14s %-14s %-10zu %-12s %s",
                  r.index, r.kind.c_str(), r.op.c_str(), r.in_shape.c_str(),
                  r.out_shape.c_str(), r.params, norm.c_str(), n_max.c_str());
    out << line;
    if (r.oracle_norm) out << "  oracle ||A|| " << format_double(*r.oracle_norm);
    if (r.oracle_n_max) out << "  oracle n_max " << *r.oracle_n_max;
    out << '\n';
  }
  for (const auto& s : shape_only) out << "shape-only " << s << '\n';
  out << "global bound " << format_double(global.l_net) << '\n';
  return kOk;
}

}  // namespace

std::vector<double> parse_eps_sweep(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() < 3 || parts.size() > 4 || (parts.size() == 4 && parts[3] != "log")) {
    throw ConfigError("--eps-sweep expects start:stop:count[:log], got '" + spec + "'");
  }
  double start = 0.0, stop = 0.0;
  long long count = 0;
  try {
    std::size_t used = 0;
    start = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument(parts[0]);
    stop = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
    count = std::stoll(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument(parts[2]);
  } catch (const std::exception&) {
    throw ConfigError("--eps-sweep has a malformed number in '" + spec + "'");
  }
  const bool log_spaced = parts.size() == 4;
  if (count < 1) throw ConfigError("--eps-sweep count must be at least 1");
  if (!(start >= 0.0) || !(stop >= 0.0) || !std::isfinite(start) || !std::isfinite(stop)) {
    throw ConfigError("--eps-sweep bounds must be finite and non-negative");
  }
  if (log_spaced && (start <= 0.0 || stop <= 0.0)) {
    throw ConfigError("--eps-sweep with :log needs positive bounds");
  }
  std::vector<double> eps(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (count == 1) {
      eps[i] = start;
      continue;
    }
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    eps[i] = log_spaced ? start * std::pow(stop / start, t) : start + t * (stop - start);
  }
  eps.front() = start;
  eps.back() = count == 1 ? start : stop;
  return eps;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certified local Lipschitz bounds for ReLU networks", "lipcert"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub, bool needs_input) {
    sub->add_option("--model", cfg.model, "Model directory or model.json")->required();
    auto* input = sub->add_option("--input", cfg.input, "Nominal input (blob, PNG, PGM, PPM)");
    if (needs_input) input->required();
    sub->add_option("--seed", cfg.seed, "Master seed");
    sub->add_option("--out", cfg.out_dir, "Directory for report files");
    sub->add_option("--format", cfg.format, "Output format")
        ->check(CLI::IsMember({"json", "csv", "table"}));
    sub->add_flag("--strict", cfg.strict, "Fail with exit 3 on unconverged power iteration");
    sub->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)")
        ->envname("LIPCERT_THREADS");
    sub->add_option("--pi-iters", cfg.pi_iters, "Power iteration budget")
        ->check(CLI::PositiveNumber);
    sub->add_option("--pi-tol", cfg.pi_tol, "Power iteration relative tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--pi-method", cfg.pi_method, "Spectral estimator")
        ->check(CLI::IsMember({"lanczos", "power"}));
    sub->add_flag("--oracle", cfg.oracle, "Cross-check with reference oracles")->group("");
  };

  auto* bound = app.add_subcommand("bound", "Local, global and empirical bounds over eps");
  common(bound, true);
  bound->add_option("--eps", cfg.eps, "Single perturbation radius");
  bound->add_option("--eps-sweep", cfg.eps_sweep, "start:stop:count[:log]");
  bound->add_option("--samples", cfg.samples, "Random lower-bound samples")
      ->check(CLI::PositiveNumber);
  bound->add_option("--steps", cfg.steps, "Gradient ascent steps")->check(CLI::PositiveNumber);

  auto* certify = app.add_subcommand("certify", "Certified adversarial radius");
  common(certify, true);
  certify->add_flag("--attack", cfg.attack, "Also run the adversarial attack");

  auto* inspect = app.add_subcommand("inspect", "Layer table of a model");
  common(inspect, false);

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("lipcert");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*bound) return cmd_bound(cfg, out, err);
    if (*certify) return cmd_certify(cfg, out, err);
    return cmd_inspect(cfg, out, err);
  } catch (const InputStageError& e) {
    err << "error: " << e.what() << '\n';
    return kModelOrInput;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kModelOrInput;
  }
}

}  // namespace lipcert::cli

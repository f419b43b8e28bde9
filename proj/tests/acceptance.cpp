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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lipcert/certifier.hpp"
#include "lipcert/empirical.hpp"
#include "lipcert/layer_bounds.hpp"
#include "lipcert/model_io.hpp"
#include "lipcert/oracle.hpp"
#include "lipcert/pipeline.hpp"
#include "lipcert/zoo.hpp"
#include "test_support.hpp"

namespace {

using namespace lipcert;
using Clock = std::chrono::steady_clock;

// Pinned tolerances and limits.
constexpr double kReluTol = 1e-12;
constexpr double kOperatorRelTol = 1e-6;
constexpr double kYbarSlackRel = 1e-12;   // rounding slack on y <= ybar
constexpr double kYbarTightness = 0.01;   // share of the spread eps*||D a_i||
constexpr double kSandwichGlobalSlack = 1e-6;
constexpr double kMonotoneSlack = 1e-9;
constexpr double kSoftRandomVsGradient = 0.05;
constexpr double kLargeEps = 1e6;
constexpr double kLargeEpsRelTol = 0.01;
constexpr double kCertifyClosedFormTol = 1e-3;
constexpr double kVjpRelTol = 1e-4;

constexpr std::size_t kConvLayers = 20;
constexpr std::size_t kYbarSamples = 100000;
constexpr std::size_t kCertifySamples = 1000;
constexpr std::size_t kVjpPoints = 100;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (secs >= limit_s) {
    o.pass = false;
    o.detail += " [time limit exceeded]";
  }
  if (!o.pass) ++failures;
  std::printf("%s %-22s %7.2fs / %gs  %s\n", o.pass ? "PASS" : "FAIL", name, secs, limit_s,
              o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome maxpool_constants() {
  Outcome o;
  const auto b = maxpool_bound(make_maxpool({1, 9, 9}, {3, 3}, {2, 2}),
                               DomainMask::all_ones({1, 9, 9}));
  if (b.n_max != 4 || b.lipschitz != 2.0) {
    o.pass = false;
    o.detail = "k3 s2 gave n_max " + std::to_string(b.n_max);
  }
  std::size_t mismatches = 0, cases = 0;
  for (std::size_t kh = 1; kh <= 5; ++kh)
    for (std::size_t kw = 1; kw <= 5; ++kw)
      for (std::size_t sh = 1; sh <= 5; ++sh)
        for (std::size_t sw = 1; sw <= 5; ++sw) {
          const std::size_t h = 2 * kh + 2 * sh, w = 2 * kw + 2 * sw;
          const auto pool = make_maxpool({1, h, w}, {kh, kw}, {sh, sw});
          ++cases;
          if (maxpool_n_max(pool) !=
              oracle::pooling_coverage_count({h, w}, {kh, kw}, {sh, sw})) {
            ++mismatches;
          }
        }
  if (mismatches) o.pass = false;
  o.detail += std::to_string(cases) + " kernel/stride cases, " + std::to_string(mismatches) +
              " mismatches; k3s2 n_max=4 L=2";
  return o;
}

Outcome relu_constant() {
  // Case table over the two points y0 and ybar.
  auto table = [](double y0, double yb) {
    if (y0 <= 0 && yb <= 0) return 0.0;
    if (y0 > 0 && yb > 0) return 1.0;
    if (y0 <= 0) return yb / (yb - y0);  // y0 <= 0 < ybar
    return y0 / (y0 - yb);               // ybar <= 0 < y0
  };
  Outcome o;
  std::size_t pairs = 0;
  double worst = 0.0;
  const int n = 33;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double y0 = -2.0 + 4.0 * i / (n - 1) + 1e-3 * std::sin(i);
      const double yb = -2.0 + 4.0 * j / (n - 1) + 1e-3 * std::cos(j);
      const double direct =
          std::abs(std::max(yb, 0.0) - std::max(y0, 0.0)) / std::abs(yb - y0);
      const double got = relu_local_lipschitz(y0, yb, false);
      worst = std::max({worst, std::abs(got - direct), std::abs(got - table(y0, yb))});
      ++pairs;
    }
  }
  o.pass = pairs >= 1000 && worst <= kReluTol;
  o.detail = std::to_string(pairs) + " pairs, max deviation " + fmt("%.3g", worst);
  return o;
}

struct ConvCase {
  AffineOperator op;
  Tensor x0;
  DomainMask mask;
  double eps;
};

std::vector<ConvCase> conv_cases() {
  std::vector<ConvCase> out;
  Rng rng(0xacce);
  for (std::size_t i = 0; i < kConvLayers; ++i) {
    const std::size_t c = 1 + i % 2;
    const std::size_t hw = 6 + (i * 5) % 7;  // 6..12
    const std::size_t k = 1 + i % 4;
    const std::size_t s = 1 + (i / 4) % 2;
    const std::size_t p = (i / 3) % 2;
    const Shape shape{c, hw, hw};
    const std::uint64_t seed = derive_seed(0xc0de, i);
    auto op = random_conv(2 + i % 3, shape, {k, k}, {{s, s}, {p, p}}, seed);
    Tensor x0 = seeded_fill(shape, seed + 1, Distribution::kGaussian);
    DomainMask mask = testing::random_mask(shape, 0.5 + 0.4 * rng.uniform01(), seed + 2);
    const double eps = std::pow(10.0, -2.0 + 3.0 * rng.uniform01());
    out.push_back({std::move(op), std::move(x0), std::move(mask), eps});
  }
  return out;
}

Outcome operator_vs_dense(const std::vector<ConvCase>& cases) {
  Outcome o;
  double worst = 0.0;
  for (const auto& c : cases) {
    const auto b = affine_relu_bound(c.op, c.x0, c.mask, c.eps);
    std::vector<double> cols(c.mask.size());
    for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = c.mask.active(j) ? 1.0 : 0.0;
    const double ref = oracle::dense_spectral_norm(
        oracle::scale_rows_cols(materialize(c.op), b.slopes.data(), cols));
    const double rel = ref > 0 ? std::abs(b.lipschitz_ub - ref) / ref : b.lipschitz_ub;
    worst = std::max(worst, rel);
  }
  o.pass = worst <= kOperatorRelTol;
  o.detail = std::to_string(cases.size()) + " conv layers, max relative error " +
             fmt("%.3g", worst);
  return o;
}

Outcome ybar_sound_tight(const std::vector<ConvCase>& cases) {
  Outcome o;
  std::size_t violations = 0, tight_layers = 0;
  double worst_gap = 0.0;
  for (std::size_t li = 0; li < cases.size(); ++li) {
    const auto& c = cases[li];
    const std::size_t n = c.op.input_size(), m = c.op.output_size();
    const Tensor y0 = c.op.apply(c.x0);
    const Tensor ybar = compute_ybar(c.op, y0, c.mask, c.eps);
    const Tensor norms = row_norms_masked(c.op, c.mask);
    std::vector<double> best(m, -std::numeric_limits<double>::infinity());
    std::vector<double> dx(n), dy(m), dir(n);
    Rng rng(derive_seed(0x7b, li));
    for (std::size_t s = 0; s < kYbarSamples; ++s) {
      if (s % 2 == 0) {
        // Uniform in the masked ball.
        const Tensor t = testing::masked_ball_sample(c.mask, c.eps, rng);
        std::copy(t.data().begin(), t.data().end(), dx.begin());
      } else {
        // Near the maximiser D a_i / ||D a_i|| of a random output row.
        const auto row = static_cast<std::size_t>(rng.uniform01() * m) % m;
        std::fill(dir.begin(), dir.end(), 0.0);
        c.op.scatter_row(row, 1.0, dir);
        c.mask.apply(dir);
        const double rn = l2_norm(dir);
        rng.fill(dx, Distribution::kGaussian);
        c.mask.apply(dx);
        const double gn = l2_norm(dx);
        const double noise = 0.02 * rng.uniform01();
        for (std::size_t t = 0; t < n; ++t) {
          dx[t] = (rn > 0 ? dir[t] / rn : 0.0) + (gn > 0 ? noise * dx[t] / gn : 0.0);
        }
        const double dn = l2_norm(dx);
        if (dn == 0) continue;
        const double radius = c.eps * std::pow(rng.uniform01(), 1e-3);
        for (auto& v : dx) v *= radius / dn;
      }
      c.op.apply_linear(dx, dy);
      for (std::size_t i = 0; i < m; ++i) {
        const double y = y0[i] + dy[i];
        const double slack = kYbarSlackRel * (std::abs(ybar[i]) + std::abs(y0[i]) + 1.0);
        if (y > ybar[i] + slack) ++violations;
        best[i] = std::max(best[i], y);
      }
    }
    double layer_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double spread = c.eps * norms[i];
      if (spread > 0) layer_gap = std::min(layer_gap, (ybar[i] - best[i]) / spread);
    }
    if (layer_gap <= kYbarTightness) ++tight_layers;
    worst_gap = std::max(worst_gap, layer_gap);
  }
  o.pass = violations == 0 && tight_layers == cases.size();
  o.detail = std::to_string(violations) + " violations; " + std::to_string(tight_layers) +
             "/" + std::to_string(cases.size()) +
             " layers tight, worst best-coordinate gap " + fmt("%.3g", worst_gap) +
             " of the spread";
  return o;
}

Outcome network_sandwich(const NetworkSpec& net, const Tensor& x0) {
  Outcome o;
  const double global = network_global_bound(net).l_net;
  std::size_t hard = 0, soft = 0, monotone = 0;
  double prev = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double eps = std::pow(10.0, -3.0 + 4.0 * i / 9.0);  // 1e-3 .. 10
    const double local = network_local_bound(net, x0, eps).l_net;
    const double rnd =
        lipschitz_lower_random(net, x0, eps, kDefaultRandomSamples, derive_seed(1, 2 * i))
            .best_ratio;
    GradientAscentConfig g;
    g.seed = derive_seed(1, 2 * i + 1);
    const double grad = lipschitz_lower_gradient(net, x0, eps, g).best_ratio;
    if (rnd > local || grad > local || local > global * (1 + kSandwichGlobalSlack)) ++hard;
    if (rnd > grad * (1 + kSoftRandomVsGradient)) ++soft;
    if (local < prev * (1 - kMonotoneSlack)) ++monotone;
    prev = local;
  }
  o.pass = hard == 0 && monotone == 0;
  o.detail = "10-point sweep: " + std::to_string(hard) + " ordering violations, " +
             std::to_string(monotone) + " monotonicity violations, soft random>gradient " +
             std::to_string(soft) + "/10; global " + fmt("%.6g", global);
  return o;
}

Outcome large_eps(const NetworkSpec& net, const Tensor& x0) {
  Outcome o;
  const double global = network_global_bound(net).l_net;
  const double local = network_local_bound(net, x0, kLargeEps).l_net;
  const double rel = std::abs(local - global) / global;
  o.pass = rel <= kLargeEpsRelTol;
  o.detail = "local " + fmt("%.9g", local) + " global " + fmt("%.9g", global) +
             " relative gap " + fmt("%.3g", rel);
  return o;
}

Outcome certification() {
  Outcome o;
  std::vector<NetworkSpec> nets;
  for (std::uint64_t s = 0; s < 3; ++s) nets.push_back(testing::random_dense_net({10, 24, 16, 5}, s));
  nets.push_back(testing::small_conv_net(3));
  nets.push_back(testing::small_conv_net(4));
  // Hand-built: one unit dead over a neighbourhood of the nominal point.
  nets.push_back(testing::dense_chain({
      {testing::matrix(3, 2, {1, 0, 0, 1, 1, 1}), Tensor::vector({0, 0, -10})},
      {testing::matrix(2, 3, {1, -1, 2, -1, 1, 0}), Tensor::vector({0.2, 0})},
  }));
  std::size_t flips = 0, ordering = 0, runs = 0;
  for (std::size_t k = 0; k < nets.size(); ++k) {
    const auto& net = nets[k];
    const Tensor x0 = seeded_fill(net.input_shape(), derive_seed(0xce, k), Distribution::kGaussian);
    const auto r = certify_radius(net, x0);
    const std::size_t cls = argmax(forward(net, x0));
    Rng rng(derive_seed(0xcf, k));
    for (std::size_t i = 0; i < kCertifySamples; ++i) {
      const Tensor x = x0 + testing::sphere_sample(net.input_shape(), r.certified_radius, rng);
      if (argmax(forward(net, x)) != cls) ++flips;
    }
    if (!(r.certified_radius < adversarial_upper_bound(net, x0))) ++ordering;
    ++runs;
  }
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Tensor w = seeded_fill({4, 6}, derive_seed(0x11, s), Distribution::kGaussian);
    const NetworkSpec net = testing::dense_chain({{w, Tensor({4})}});
    const Tensor x0 = seeded_fill({6}, derive_seed(0x12, s), Distribution::kGaussian);
    const auto r = certify_radius(net, x0);
    const double closed = r.delta / (std::sqrt(2.0) * oracle::dense_spectral_norm(w));
    worst = std::max(worst, std::abs(r.certified_radius - closed) / closed);
    if (!(r.certified_radius < adversarial_upper_bound(net, x0))) ++ordering;
    ++runs;
  }
  o.pass = flips == 0 && ordering == 0 && worst <= kCertifyClosedFormTol;
  o.detail = std::to_string(flips) + " flips at the radius over " + std::to_string(nets.size()) +
             " nets; linear closed-form max rel err " + fmt("%.3g", worst) + "; " +
             std::to_string(ordering) + "/" + std::to_string(runs) +
             " runs with attack <= radius";
  return o;
}

// Same ReLU sign pattern and pool argmax at x and x'.
bool same_pattern(const NetworkSpec& net, const Tensor& a, const Tensor& b) {
  Tensor xa = a, xb = b;
  for (const auto& layer : net.layers()) {
    if (const auto* pool = std::get_if<MaxPool2d>(&layer)) {
      std::vector<std::size_t> ia, ib;
      Tensor ya = maxpool_forward(*pool, xa, &ia);
      Tensor yb = maxpool_forward(*pool, xb, &ib);
      if (ia != ib) return false;
      xa = std::move(ya);
      xb = std::move(yb);
      continue;
    }
    if (const auto* l = std::get_if<AffineRelu>(&layer)) {
      Tensor pa = l->op.apply(xa), pb = l->op.apply(xb);
      for (std::size_t i = 0; i < pa.size(); ++i) {
        if ((pa[i] > 0) != (pb[i] > 0)) return false;
      }
    }
    xa = forward_layer(layer, xa);
    xb = forward_layer(layer, xb);
  }
  return true;
}

Outcome vjp_finite_differences(const NetworkSpec& mnist) {
  Outcome o;
  const std::vector<NetworkSpec> nets = {testing::small_conv_net(7),
                                         testing::random_dense_net({12, 20, 20, 6}, 8), mnist};
  const double h = 1e-6;
  double worst = 0.0;
  std::size_t points = 0;
  for (std::size_t k = 0; k < nets.size(); ++k) {
    const auto& net = nets[k];
    Rng rng(derive_seed(0x71, k));
    std::size_t got = 0, tries = 0;
    while (got < kVjpPoints && tries < 20 * kVjpPoints) {
      ++tries;
      const Tensor x = seeded_fill(net.input_shape(), derive_seed(0x72 + k, tries),
                                   Distribution::kGaussian);
      const Tensor v = testing::sphere_sample(net.input_shape(), 1.0, rng);
      const Tensor c = testing::sphere_sample(net.output_shape(), 1.0, rng);
      const Tensor xp = x + h * v, xm = x - h * v;
      if (!same_pattern(net, x, xp) || !same_pattern(net, x, xm)) continue;
      const double fd =
          (dot(c.data(), forward(net, xp).data()) - dot(c.data(), forward(net, xm).data())) /
          (2 * h);
      const double an = dot(vjp(net, x, c).data(), v.data());
      const double scale = std::max({std::abs(fd), std::abs(an), 1e-8});
      worst = std::max(worst, std::abs(fd - an) / scale);
      ++got;
    }
    points += got;
    if (got < kVjpPoints) o.pass = false;
  }
  o.pass = o.pass && worst <= kVjpRelTol;
  o.detail = std::to_string(points) + " off-boundary points over 3 nets, max relative error " +
             fmt("%.3g", worst);
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism(const std::filesystem::path& dir) {
  Outcome o;
  std::string outputs[2];
  for (int run = 0; run < 2; ++run) {
    const auto out = dir / ("run" + std::to_string(run));
    const std::string cmd = std::string("\"") + LIPCERT_BIN + "\" bound --model \"" +
                            (dir / "model.json").string() + "\" --input \"" +
                            (dir / "input.bin").string() +
                            "\" --eps-sweep 0.001:1:4:log --samples 200 --steps 20 --seed 7" +
                            " --out \"" + out.string() + "\" > \"" +
                            (dir / ("stdout" + std::to_string(run))).string() + "\"";
    if (std::system(cmd.c_str()) != 0) {
      o.pass = false;
      o.detail = "lipcert exited non-zero";
      return o;
    }
    outputs[run] = slurp(out / "bound.csv");
  }
  const bool files = !outputs[0].empty() && outputs[0] == outputs[1];
  const bool stdout_same = slurp(dir / "stdout0") == slurp(dir / "stdout1");
  o.pass = files && stdout_same;
  o.detail = "bound.csv " + std::to_string(outputs[0].size()) + " bytes, " +
             (files ? "identical" : "different") + "; stdout " +
             (stdout_same ? "identical" : "different");
  return o;
}

}  // namespace

int main() {
  testing::TempDir dir;
  const NetworkSpec mnist = mnist_net(1);
  save_model(mnist, dir.path());
  save_input(synthetic_image(mnist.input_shape(), 2), dir.path() / "input.bin");
  // Exercise the same float32-rounded weights the CLI sees.
  const NetworkSpec net = load_model(dir.path() / "model.json");
  const Tensor x0 = load_input(dir.path() / "input.bin").reshape(net.input_shape());

  std::printf("lipcert acceptance suite\n");
  report("maxpool-constants", 1, maxpool_constants);
  report("relu-local-constant", 1, relu_constant);
  const auto cases = conv_cases();
  report("operator-vs-dense", 60, [&] { return operator_vs_dense(cases); });
  report("ybar-sound-tight", 120, [&] { return ybar_sound_tight(cases); });
  report("network-sandwich", 600, [&] { return network_sandwich(net, x0); });
  report("large-eps-limit", 60, [&] { return large_eps(net, x0); });
  report("certification", 300, certification);
  report("vjp-finite-diff", 120, [&] { return vjp_finite_differences(net); });
  report("determinism", 120, [&] { return determinism(dir.path()); });
  std::printf("%d failed\n", failures);
  return failures;
}

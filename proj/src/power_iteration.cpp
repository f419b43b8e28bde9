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

#include "lipcert/power_iteration.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lipcert/error.hpp"
#include "lipcert/tensor.hpp"

namespace lipcert {

namespace {

void validate(std::size_t dim, const DomainMask* restriction,
              const PowerIterationConfig& config) {
  if (config.max_iterations == 0) {
    throw ConfigError("power iteration needs at least one iteration");
  }
  if (!(config.tolerance > 0.0)) {
    throw ConfigError("power iteration tolerance must be positive");
  }
  if (!(config.safety_factor >= 1.0)) {
    throw ConfigError("power iteration safety factor must be at least 1");
  }
  if (restriction && restriction->size() != dim) {
    throw ShapeError("power iteration restriction has the wrong size");
  }
}

// Seeded gaussian start, restricted and normalized. Empty when nothing
// survives the restriction.
std::vector<double> start_vector(std::size_t dim, const DomainMask* restriction,
                                 std::uint64_t seed) {
  std::vector<double> v(dim);
  Rng rng(seed);
  rng.fill(v, Distribution::kGaussian);
  if (restriction) restriction->apply(v);
  const double norm = l2_norm(v);
  if (norm == 0.0) return {};
  for (auto& x : v) x /= norm;
  return v;
}

SpectralEstimate finish(SpectralEstimate result, double sigma,
                        const PowerIterationConfig& config) {
  result.report.raw_estimate = sigma;
  result.value = result.report.converged ? sigma : sigma * config.safety_factor;
  return result;
}

}  // namespace

const char* to_string(SpectralMethod method) {
  return method == SpectralMethod::kLanczos ? "lanczos" : "power";
}

SpectralEstimate spectral_norm_estimate(const GramOperator& gram, std::size_t dim,
                                        const DomainMask* restriction,
                                        const PowerIterationConfig& config) {
  return config.method == SpectralMethod::kLanczos
             ? lanczos(gram, dim, restriction, config)
             : power_iteration(gram, dim, restriction, config);
}

SpectralEstimate power_iteration(const GramOperator& gram, std::size_t dim,
                                 const DomainMask* restriction,
                                 const PowerIterationConfig& config) {
  validate(dim, restriction, config);
  SpectralEstimate result;
  std::vector<double> v = start_vector(dim, restriction, config.seed);
  if (v.empty()) {
    // Nothing survives the restriction: the map is zero on its domain.
    result.report = {0, 0.0, true, 0.0};
    return result;
  }
  std::vector<double> w(dim);

  double sigma = 0.0;
  PowerIterationReport& report = result.report;
  report.converged = false;
  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    gram(v, w);
    const double rayleigh = std::max(dot(v, w), 0.0);
    const double next = std::sqrt(rayleigh);
    report.iterations = it;
    report.residual = next > 0.0 ? std::abs(next - sigma) / next : 0.0;
    const bool settled = it > 1 && report.residual < config.tolerance;
    sigma = next;

    const double norm = l2_norm(w);
    if (norm == 0.0) {
      // v lies in the null space of G; a seeded gaussian lands there only
      // when G vanishes on the whole restricted domain.
      report.converged = true;
      break;
    }
    if (settled) {
      report.converged = true;
      break;
    }
    for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / norm;
  }
  return finish(result, sigma, config);
}

SpectralEstimate lanczos(const GramOperator& gram, std::size_t dim,
                         const DomainMask* restriction,
                         const PowerIterationConfig& config) {
  validate(dim, restriction, config);
  if (config.krylov_dim == 0) throw ConfigError("krylov_dim must be positive");
  SpectralEstimate result;
  std::vector<double> v = start_vector(dim, restriction, config.seed);
  if (v.empty()) {
    result.report = {0, 0.0, true, 0.0};
    return result;
  }

  PowerIterationReport& report = result.report;
  report.converged = false;
  const std::size_t k = std::min(config.krylov_dim, dim);
  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta;
  std::vector<double> w(dim);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  double sigma = 0.0;

  auto solve = [&](bool vectors) {
    const auto n = static_cast<Eigen::Index>(alpha.size());
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(alpha.data(), n);
    Eigen::VectorXd e(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index i = 0; i + 1 < n; ++i) e[i] = beta[static_cast<std::size_t>(i)];
    tri.computeFromTridiagonal(d, e,
                               vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    return tri.eigenvalues()[n - 1];
  };

  bool done = false;
  while (!done && report.iterations < config.max_iterations) {
    basis.assign(1, v);
    alpha.clear();
    beta.clear();
    for (std::size_t j = 0; j < k && report.iterations < config.max_iterations; ++j) {
      gram(basis[j], w);
      ++report.iterations;
      const double scale = l2_norm(w);
      alpha.push_back(dot(basis[j], w));
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) {
          const double c = dot(b, w);
          for (std::size_t i = 0; i < dim; ++i) w[i] -= c * b[i];
        }
      }
      const double theta = std::max(solve(true), 0.0);
      sigma = std::sqrt(theta);
      const double b = l2_norm(w);
      // Residual of the top Ritz pair, ||G y - theta y|| = b * |s_last|.
      const auto& vecs = tri.eigenvectors();
      const double ritz = b * std::abs(vecs(vecs.rows() - 1, vecs.cols() - 1));
      report.residual = theta > 0.0 ? ritz / theta : 0.0;
      const bool settled = report.residual < config.tolerance;
      // Krylov space exhausted: the tridiagonal eigenvalue is exact.
      if (b <= 1e-10 * scale || scale == 0.0 || settled) {
        report.converged = true;
        done = true;
        break;
      }
      if (j + 1 == k) break;
      beta.push_back(b);
      for (auto& x : w) x /= b;
      basis.push_back(w);
    }
    if (done) break;
    // Restart from the top Ritz vector.
    solve(true);
    const Eigen::VectorXd s = tri.eigenvectors().col(tri.eigenvectors().cols() - 1);
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      const double c = s[static_cast<Eigen::Index>(i)];
      for (std::size_t t = 0; t < dim; ++t) v[t] += c * basis[i][t];
    }
    const double norm = l2_norm(v);
    if (norm == 0.0) break;
    for (auto& x : v) x /= norm;
  }
  return finish(result, sigma, config);
}

}  // namespace lipcert

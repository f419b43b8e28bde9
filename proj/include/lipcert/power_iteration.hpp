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
#include <cstdint>
#include <functional>
#include <span>

#include "lipcert/domain_mask.hpp"

namespace lipcert {

enum class SpectralMethod {
  // Restarted Lanczos on the Gram operator. Its top Ritz value is never
  // below the power-iteration estimate from the same start vector after the
  // same number of operator applications.
  kLanczos,
  kPower,
};

const char* to_string(SpectralMethod method);

struct PowerIterationConfig {
  // Budget in Gram-operator applications.
  std::size_t max_iterations = 500;
  // Power iteration stops when successive singular-value estimates differ by
  // less than this, relative to the current estimate. Lanczos stops when the
  // top Ritz pair residual ||G y - theta y|| is below this times theta.
  double tolerance = 1e-8;
  // Multiplier applied to an estimate that did not converge. Both methods
  // approach the spectral norm from below, so a raw unconverged value is not
  // an upper bound.
  double safety_factor = 1.05;
  std::uint64_t seed = 0x5eed;
  SpectralMethod method = SpectralMethod::kLanczos;
  // Lanczos basis size before an explicit restart from the top Ritz vector.
  std::size_t krylov_dim = 64;
};

struct PowerIterationReport {
  std::size_t iterations = 0;  // Gram-operator applications
  double residual = 0.0;       // last value tested against the tolerance
  bool converged = true;
  double raw_estimate = 0.0;
};

struct SpectralEstimate {
  // raw_estimate when converged, raw_estimate * safety_factor otherwise.
  double value = 0.0;
  PowerIterationReport report;
};

// out = G in, for a symmetric positive semidefinite G (typically M^T M).
using GramOperator =
    std::function<void(std::span<const double>, std::span<double>)>;

/// Largest singular value of M given G = M^T M, using config.method.
///
/// The start vector is a seeded gaussian restricted by `restriction`; G must
/// map the restricted subspace into itself.
SpectralEstimate spectral_norm_estimate(const GramOperator& gram, std::size_t dim,
                                        const DomainMask* restriction,
                                        const PowerIterationConfig& config);

/// Plain power iteration: each step evaluates the Rayleigh quotient of the
/// unit iterate; its square root is the estimate.
SpectralEstimate power_iteration(const GramOperator& gram, std::size_t dim,
                                 const DomainMask* restriction,
                                 const PowerIterationConfig& config);

/// Lanczos with full reorthogonalization; the estimate is the square root of
/// the largest eigenvalue of the tridiagonal projection.
SpectralEstimate lanczos(const GramOperator& gram, std::size_t dim,
                         const DomainMask* restriction,
                         const PowerIterationConfig& config);

}  // namespace lipcert

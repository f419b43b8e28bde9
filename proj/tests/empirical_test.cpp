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

#include <gtest/gtest.h>

#include <cmath>

#include "lipcert/certifier.hpp"
#include "lipcert/empirical.hpp"
#include "lipcert/pipeline.hpp"
#include "test_support.hpp"

namespace lipcert {
namespace {

using testing::matrix;
using testing::small_conv_net;

NetworkSpec identity_net(std::size_t n) {
  Tensor w({n, n});
  for (std::size_t i = 0; i < n; ++i) w[i * n + i] = 1.0;
  return testing::dense_chain({{w, Tensor({n})}});
}

TEST(Vjp, LinearNetIsTranspose) {
  const Tensor w = matrix(2, 3, {1, 2, 3, 4, 5, 6});
  const NetworkSpec net = testing::dense_chain({{w, Tensor::vector({1, -1})}});
  const Tensor g = vjp(net, Tensor::vector({0.1, 0.2, 0.3}), Tensor::vector({1, -2}));
  EXPECT_EQ(g, Tensor::vector({-7, -8, -9}));
}

TEST(Vjp, MatchesFiniteDifferences) {
  const NetworkSpec net = small_conv_net(1);
  const Tensor x = seeded_fill({2, 9, 9}, 2, Distribution::kGaussian);
  const Tensor c = seeded_fill(net.output_shape(), 3, Distribution::kGaussian);
  const Tensor g = vjp(net, x, c);
  const double h = 1e-6;
  for (std::uint64_t k = 0; k < 5; ++k) {
    const Tensor v = seeded_fill({2, 9, 9}, 10 + k, Distribution::kGaussian);
    const double fd = (dot(c.data(), forward(net, x + h * v).data()) -
                       dot(c.data(), forward(net, x - h * v).data())) /
                      (2 * h);
    EXPECT_NEAR(dot(g.data(), v.data()), fd, 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Vjp, ZeroCotangent) {
  const NetworkSpec net = small_conv_net(4);
  const Tensor g = vjp(net, seeded_fill({2, 9, 9}, 5, Distribution::kGaussian),
                       Tensor(net.output_shape()));
  EXPECT_EQ(l2_norm(g), 0.0);
}

TEST(RandomLowerBound, IdentityNetIsOne) {
  const auto r = lipschitz_lower_random(identity_net(4), Tensor::vector({1, 2, 3, 4}), 0.5, 200, 7);
  EXPECT_NEAR(r.best_ratio, 1.0, 1e-12);
  EXPECT_NEAR(r.best_perturbation_norm, 0.5, 1e-12);
  EXPECT_EQ(r.samples_or_steps, 200u);
  EXPECT_EQ(r.method, LowerBoundMethod::kRandom);
}

TEST(RandomLowerBound, ZeroEps) {
  EXPECT_EQ(lipschitz_lower_random(identity_net(2), Tensor({2}), 0.0, 10, 1).best_ratio, 0.0);
}

TEST(RandomLowerBound, BelowUpperBound) {
  const NetworkSpec net = small_conv_net(8);
  const Tensor x0 = seeded_fill({2, 9, 9}, 9, Distribution::kGaussian);
  for (double eps : {0.01, 0.3, 3.0}) {
    const double lb = lipschitz_lower_random(net, x0, eps, 500, 10).best_ratio;
    EXPECT_LE(lb, network_local_bound(net, x0, eps).l_net * (1 + 1e-9)) << eps;
    EXPECT_GT(lb, 0.0);
  }
}

TEST(RandomLowerBound, MoreSamplesNeverLower) {
  const NetworkSpec net = small_conv_net(11);
  const Tensor x0 = seeded_fill({2, 9, 9}, 12, Distribution::kGaussian);
  double prev = 0.0;
  for (std::size_t n : {1u, 10u, 100u, 400u}) {
    const double r = lipschitz_lower_random(net, x0, 0.2, n, 13).best_ratio;
    EXPECT_GE(r, prev);
    prev = r;
  }
}

TEST(RandomLowerBound, ThreadCountInvariant) {
  const NetworkSpec net = small_conv_net(14);
  const Tensor x0 = seeded_fill({2, 9, 9}, 15, Distribution::kGaussian);
  const auto a = lipschitz_lower_random(net, x0, 0.2, 300, 16, 1);
  const auto b = lipschitz_lower_random(net, x0, 0.2, 300, 16, 4);
  EXPECT_EQ(a.best_ratio, b.best_ratio);
  EXPECT_EQ(a.best_perturbation_norm, b.best_perturbation_norm);
}

TEST(GradientLowerBound, LinearNetReachesOperatorNorm) {
  const auto op = random_dense(6, 9, 17);
  const NetworkSpec net = testing::dense_chain({{op.weights(), op.bias()}});
  const double norm = network_global_bound(net).l_net;
  GradientAscentConfig cfg;
  cfg.seed = 18;
  const auto r = lipschitz_lower_gradient(net, seeded_fill({9}, 19, Distribution::kGaussian),
                                          0.5, cfg);
  EXPECT_GE(r.best_ratio, 0.99 * norm);
  EXPECT_LE(r.best_ratio, norm * (1 + 1e-9));
  EXPECT_EQ(r.method, LowerBoundMethod::kGradient);
}

TEST(GradientLowerBound, BelowUpperBound) {
  const NetworkSpec net = small_conv_net(20);
  const Tensor x0 = seeded_fill({2, 9, 9}, 21, Distribution::kGaussian);
  for (double eps : {0.01, 0.3, 3.0}) {
    const double lb = lipschitz_lower_gradient(net, x0, eps).best_ratio;
    EXPECT_LE(lb, network_local_bound(net, x0, eps).l_net * (1 + 1e-9)) << eps;
  }
}

TEST(Attack, TiedLogitsFlipImmediately) {
  const auto r = adversarial_attack(identity_net(2), Tensor::vector({0.5, 0.5}));
  EXPECT_LE(r.norm, 1e-3);
  EXPECT_EQ(r.original_class, 0u);
  EXPECT_EQ(r.adversarial_class, 1u);
}

TEST(Attack, LinearClosedForm) {
  const Tensor x0 = Tensor::vector({1, 0});
  const auto r = adversarial_attack(identity_net(2), x0);
  EXPECT_NEAR(r.norm, 1.0 / std::sqrt(2.0), 0.05 / std::sqrt(2.0));
  EXPECT_GE(r.norm, 1.0 / std::sqrt(2.0));
  ASSERT_EQ(r.perturbation.size(), 2u);
  EXPECT_NEAR(l2_norm(r.perturbation), r.norm, 1e-12);
  EXPECT_NE(argmax(forward(identity_net(2), x0 + r.perturbation)), 0u);
}

TEST(Attack, ConstantNetNeverFlips) {
  const NetworkSpec net = testing::dense_chain({{matrix(2, 2, {0, 0, 0, 0}), Tensor::vector({1, 0})}});
  AttackConfig cfg;
  cfg.radius_max = 10;
  const auto r = adversarial_attack(net, Tensor({2}), cfg);
  EXPECT_TRUE(std::isinf(r.norm));
  EXPECT_EQ(r.perturbation.size(), 0u);
}

TEST(Attack, NeverInsideCertifiedRadius) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const NetworkSpec net = testing::random_dense_net({10, 16, 4}, 22 + seed);
    const Tensor x0 = seeded_fill({10}, 30 + seed, Distribution::kGaussian);
    const double radius = certify_radius(net, x0).certified_radius;
    EXPECT_GT(adversarial_upper_bound(net, x0), radius) << seed;
  }
}

TEST(Argmax, LowestIndexOnTies) {
  EXPECT_EQ(argmax(Tensor::vector({1, 3, 3, 2})), 1u);
  EXPECT_EQ(argmax(Tensor::vector({-1})), 0u);
}

}  // namespace
}  // namespace lipcert

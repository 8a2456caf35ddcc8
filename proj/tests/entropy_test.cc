// Copyright 2026 The REALM Authors
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

#include "realm/entropy.h"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

namespace realm {
namespace {

constexpr double kNoFloor = -std::numeric_limits<double>::infinity();
const double kHalfLog2PiE = 0.5 * (1.0 + std::log(2.0 * std::numbers::pi));

std::vector<double> Normal(int n, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sigma);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

std::vector<double> Uniform(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

// Reference values computed with scipy.stats.differential_entropy(x, m,
// method="ebrahimi") on the same deterministic samples.
std::vector<double> WavySample() {
  std::vector<double> x(200);
  for (int i = 0; i < 200; ++i) {
    x[i] = std::sin(0.7 * i) * (1.0 + 0.01 * i) +
           0.3 * std::cos(1.3 * static_cast<double>(i) * i);
  }
  return x;
}

TEST(SampleEntropy1d, MatchesReferenceImplementation) {
  const std::vector<double> x = WavySample();
  EXPECT_NEAR(SampleEntropy1d(x, 1, kNoFloor), 1.4427321469876955, 1e-12);
  EXPECT_NEAR(SampleEntropy1d(x, 3, kNoFloor), 1.6305010603513568, 1e-12);
  EXPECT_NEAR(SampleEntropy1d(x, 14, kNoFloor), 1.7424337864798973, 1e-12);
  // Default spacing for n = 200 is 14.
  EXPECT_EQ(SampleEntropy1d(x, 0, kNoFloor), SampleEntropy1d(x, 14, kNoFloor));
}

TEST(SampleEntropy1d, EvenGridOnUnitIntervalIsZero) {
  std::vector<double> x(101);
  for (int i = 0; i < 101; ++i) x[i] = ((i * 7919) % 101) / 101.0;
  EXPECT_NEAR(SampleEntropy1d(x, 10, kNoFloor), 0.0, 1e-12);
}

TEST(SampleEntropy1d, StandardNormal) {
  EXPECT_NEAR(SampleEntropy1d(Normal(10000, 1.0, 1), 0, kNoFloor), kHalfLog2PiE,
              0.05);
}

TEST(SampleEntropy1d, UnitUniform) {
  EXPECT_NEAR(SampleEntropy1d(Uniform(10000, 2), 0, kNoFloor), 0.0, 0.05);
}

TEST(SampleEntropy1d, NarrowNormal) {
  EXPECT_NEAR(SampleEntropy1d(Normal(10000, 0.001, 3), 0, kNoFloor),
              kHalfLog2PiE + std::log(0.001), 0.05);
}

TEST(SampleEntropy1d, TooFewSamplesThrows) {
  const std::vector<double> x = {0.1, 0.2, 0.3, 0.4};
  EXPECT_THROW(SampleEntropy1d(x, 2, kNoFloor), std::invalid_argument);
  EXPECT_NO_THROW(SampleEntropy1d({x.data(), 3}, 1, kNoFloor));
  EXPECT_THROW(SampleEntropy1d({x.data(), 2}, 1, kNoFloor), std::invalid_argument);
}

TEST(SampleEntropy1d, IdenticalSamplesGiveFloor) {
  const std::vector<double> x(50, 0.25);
  EXPECT_EQ(SampleEntropy1d(x, 0, -4.0), -4.0);
}

TEST(SampleEntropy1d, ResultIsFloored) {
  const std::vector<double> x = Normal(400, 1e-9, 4);
  EXPECT_EQ(SampleEntropy1d(x, 0, -5.0), -5.0);
}

TEST(SampleEntropy1d, TranslationInvariant) {
  const std::vector<double> x = Normal(1000, 0.3, 5);
  for (double c : {-3.0, 0.5, 7.25}) {
    std::vector<double> y = x;
    for (double& v : y) v += c;
    EXPECT_NEAR(SampleEntropy1d(y, 0, kNoFloor), SampleEntropy1d(x, 0, kNoFloor),
                1e-9);
  }
}

TEST(SampleEntropy1d, ScalingAddsLogFactor) {
  const std::vector<double> x = Normal(1000, 1.0, 6);
  for (double c : {0.001, 0.5, 4.0}) {
    std::vector<double> y = x;
    for (double& v : y) v *= c;
    EXPECT_NEAR(SampleEntropy1d(y, 0, kNoFloor) - SampleEntropy1d(x, 0, kNoFloor),
                std::log(c), 1e-9);
  }
}

TEST(SampleEntropy1d, ErrorShrinksWithSampleCount) {
  double err_small = 0.0;
  double err_large = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    err_small += std::abs(SampleEntropy1d(Normal(1000, 1.0, 100 + seed), 0,
                                          kNoFloor) - kHalfLog2PiE);
    err_large += std::abs(SampleEntropy1d(Normal(10000, 1.0, 200 + seed), 0,
                                          kNoFloor) - kHalfLog2PiE);
  }
  EXPECT_LT(err_large, err_small);
}

TEST(SampleEntropyMulti, IndependentNormalRows) {
  Eigen::MatrixXd x(2, 10000);
  const auto a = Normal(10000, 1.0, 7);
  const auto b = Normal(10000, 1.0, 8);
  for (int i = 0; i < 10000; ++i) {
    x(0, i) = a[i];
    x(1, i) = b[i];
  }
  EXPECT_NEAR(SampleEntropyMulti(x, HumanOptimality(1e6)), 2.0 * kHalfLog2PiE, 0.1);
}

TEST(SampleEntropyMulti, ConstantRowsGiveFloor) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(2, 10000, 0.3);
  const double floor = -std::log(1e6) + 1.0 + std::log(2.0 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(SampleEntropyMulti(x, HumanOptimality(1e6)), floor);
  EXPECT_NEAR(floor, -10.978, 5e-4);
}

TEST(SampleEntropyMulti, UniformRow) {
  const auto u = Uniform(10000, 9);
  const Eigen::MatrixXd x = Eigen::Map<const Eigen::MatrixXd>(u.data(), 1, 10000);
  EXPECT_NEAR(SampleEntropyMulti(x, HumanOptimality(1e6)), 0.0, 0.05);
}

TEST(SampleEntropyMulti, NeverBelowFloor) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> scale(-12.0, 1.0);
  const HumanOptimality beta(1e6);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd x(3, 60);
    for (int d = 0; d < 3; ++d) {
      const double s = std::exp(scale(rng));
      const auto v = Normal(60, s, 1000 + 3 * trial + d);
      for (int i = 0; i < 60; ++i) x(d, i) = v[i];
    }
    EXPECT_GE(SampleEntropyMulti(x, beta), 3 * DimensionFloor(beta));
  }
}

TEST(SampleEntropy, RejectsDimensionMismatch) {
  const SampleEntropy estimator(2, HumanOptimality(1e6));
  EXPECT_THROW(estimator(Eigen::MatrixXd::Zero(3, 50)), std::invalid_argument);
  EXPECT_NO_THROW(estimator(Eigen::MatrixXd::Zero(2, 50)));
}

TEST(SampleEntropy, MinimumSamples) {
  EXPECT_EQ(SampleEntropy(2, HumanOptimality(1e6), 3).MinimumSamples(), 7);
  // With the default spacing n must satisfy n >= 2 floor(sqrt(n)) + 1.
  const int n = SampleEntropy(2, HumanOptimality(1e6)).MinimumSamples();
  EXPECT_GE(n, 2 * DefaultSpacing(n) + 1);
  EXPECT_LT(n - 1, 2 * DefaultSpacing(n - 1) + 1);
}

TEST(SampleEntropy, FiftyRolloutsAreEnough) {
  EXPECT_LE(SampleEntropy(2, HumanOptimality(1e6)).MinimumSamples(), 50);
}

TEST(SampleEntropy, FastEnoughForTheControlLoop) {
  const auto x = Normal(10000, 1.0, 11);
  const auto start = std::chrono::steady_clock::now();
  constexpr int kCalls = 20;
  double sink = 0.0;
  for (int i = 0; i < kCalls; ++i) sink += SampleEntropy1d(x, 0, kNoFloor);
  const double per_call =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() /
      kCalls;
  EXPECT_TRUE(std::isfinite(sink));
  EXPECT_LT(per_call, 1e-3);
}

TEST(HumanOptimality, RejectsNonPositive) {
  EXPECT_THROW(HumanOptimality(0.0), std::invalid_argument);
  EXPECT_THROW(HumanOptimality(-1.0), std::invalid_argument);
  EXPECT_THROW(HumanOptimality(std::nan("")), std::invalid_argument);
}

TEST(GaussianEntropy, ClosedForm) {
  EXPECT_NEAR(GaussianEntropy(1, HumanOptimality(1.0)), 1.4189385332046727, 1e-15);
  EXPECT_NEAR(GaussianEntropy(2, HumanOptimality(1e6)), -10.977633491554929, 1e-12);
  EXPECT_NEAR(GaussianEntropy(2, HumanOptimality(1.0)), 2.8378770664093453, 1e-15);
}

TEST(GaussianEntropy, MonotoneInBetaLinearInDims) {
  const HumanOptimality beta(250.0);
  double previous = GaussianEntropy(2, HumanOptimality(0.1));
  for (double b : {1.0, 10.0, 1e3, 1e6}) {
    const double h = GaussianEntropy(2, HumanOptimality(b));
    EXPECT_LT(h, previous);
    previous = h;
  }
  for (int n = 1; n <= 6; ++n) {
    EXPECT_NEAR(GaussianEntropy(n, beta), n * GaussianEntropy(1, beta), 1e-12);
    EXPECT_NEAR(GaussianEntropy(n, beta), n * DimensionFloor(beta), 1e-12);
  }
  EXPECT_THROW(GaussianEntropy(0, beta), std::invalid_argument);
}

TEST(UniformEntropyUpper, Boxes) {
  EXPECT_DOUBLE_EQ(UniformEntropyUpper(ActionRanges({{0, 1}, {0, 1}})), 0.0);
  EXPECT_NEAR(UniformEntropyUpper(ActionRanges({{0, 2}, {0, 5}})), std::log(10.0),
              1e-15);
  EXPECT_NEAR(UniformEntropyUpper(ActionRanges({{-1, 1}})), std::log(2.0), 1e-15);
}

TEST(ActionRanges, RejectDegenerateRanges) {
  EXPECT_THROW(ActionRanges({{0, 0}}), std::invalid_argument);
  EXPECT_THROW(ActionRanges({{0, 1}, {2, 1}}), std::invalid_argument);
  EXPECT_TRUE(ActionRanges().empty());
}

}  // namespace
}  // namespace realm

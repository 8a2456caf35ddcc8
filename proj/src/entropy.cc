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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace realm {

namespace {

// 0.5 (1 + ln 2pi)
const double kHalfLogTwoPiE = 0.5 * (1.0 + std::log(2.0 * std::numbers::pi));

}  // namespace

HumanOptimality::HumanOptimality(double beta) : beta_(beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("beta must be positive and finite, got " +
                                std::to_string(beta));
  }
}

ActionRanges::ActionRanges(std::vector<ActionRange> ranges)
    : ranges_(std::move(ranges)) {
  for (std::size_t i = 0; i < ranges_.size(); ++i) {
    const ActionRange& r = ranges_[i];
    if (!std::isfinite(r.min) || !std::isfinite(r.max) || !(r.max > r.min)) {
      throw std::invalid_argument("degenerate action range in dimension " +
                                  std::to_string(i));
    }
  }
}

int DefaultSpacing(int sample_count) {
  return std::max(1, static_cast<int>(std::sqrt(static_cast<double>(
                         std::max(sample_count, 0)))));
}

double SampleEntropy1d(std::span<const double> samples, int spacing,
                       double floor) {
  const int n = static_cast<int>(samples.size());
  const int m = spacing > 0 ? spacing : DefaultSpacing(n);
  if (n < 2 * m + 1) {
    throw std::invalid_argument("sample entropy needs at least " +
                                std::to_string(2 * m + 1) + " samples, got " +
                                std::to_string(n));
  }
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());

  // Zero-based i; indices clamp to the ends of the order statistics.
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double spread = x[std::min(i + m, n - 1)] - x[std::max(i - m, 0)];
    if (!(spread > 0.0)) return floor;
    double c = 2.0;
    if (i < m) {
      c = 1.0 + static_cast<double>(i) / m;
    } else if (i >= n - m) {
      c = 1.0 + static_cast<double>(n - 1 - i) / m;
    }
    sum += std::log(spread / c);
  }
  const double h = sum / n + std::log(static_cast<double>(n) / m);
  if (!std::isfinite(h)) return floor;
  return std::max(h, floor);
}

double DimensionFloor(HumanOptimality beta) {
  return -0.5 * std::log(beta.beta()) + kHalfLogTwoPiE;
}

double GaussianEntropy(int action_dims, HumanOptimality beta) {
  if (action_dims < 1) {
    throw std::invalid_argument("action_dims must be >= 1");
  }
  // 0.5 ln(beta^-n) written without forming beta^-n, which underflows.
  return -0.5 * action_dims * std::log(beta.beta()) +
         action_dims * kHalfLogTwoPiE;
}

double UniformEntropyUpper(const ActionRanges& ranges) {
  if (ranges.empty()) {
    throw std::invalid_argument("uniform entropy needs at least one range");
  }
  double h = 0.0;
  for (const ActionRange& r : ranges.ranges()) h += std::log(r.max - r.min);
  return h;
}

double SampleEntropyMulti(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                          HumanOptimality beta, int spacing) {
  const double floor = DimensionFloor(beta);
  std::vector<double> row(samples.cols());
  double h = 0.0;
  for (Eigen::Index d = 0; d < samples.rows(); ++d) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) row[j] = samples(d, j);
    h += SampleEntropy1d(row, spacing, floor);
  }
  return h;
}

SampleEntropy::SampleEntropy(int action_dims, HumanOptimality beta,
                             int spacing)
    : action_dims_(action_dims),
      beta_(beta),
      spacing_(spacing),
      floor_(DimensionFloor(beta)) {
  if (action_dims < 1) {
    throw std::invalid_argument("action_dims must be >= 1");
  }
}

double SampleEntropy::operator()(
    const Eigen::Ref<const Eigen::MatrixXd>& samples) const {
  if (samples.rows() != action_dims_) {
    throw std::invalid_argument(
        "sample dimension mismatch: expected " + std::to_string(action_dims_) +
        " rows, got " + std::to_string(samples.rows()));
  }
  return SampleEntropyMulti(samples, beta_, spacing_);
}

int SampleEntropy::MinimumSamples() const {
  if (spacing_ > 0) return 2 * spacing_ + 1;
  // Smallest n with n >= 2 floor(sqrt(n)) + 1.
  int n = 1;
  while (n < 2 * DefaultSpacing(n) + 1) ++n;
  return n;
}

}  // namespace realm

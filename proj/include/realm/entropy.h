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

#ifndef REALM_ENTROPY_H_
#define REALM_ENTROPY_H_

#include <span>
#include <vector>

#include <Eigen/Core>

namespace realm {

// All entropies are differential entropies in nats.

// Noise level of a noisily-optimal human: inverse variance of the human's
// action error along each action dimension.
class HumanOptimality {
 public:
  explicit HumanOptimality(double beta);

  double beta() const { return beta_; }

 private:
  double beta_;
};

inline constexpr double kDefaultBeta = 1e6;  // sigma = 0.001

struct ActionRange {
  double min = 0.0;
  double max = 0.0;
};

// Per-dimension bounds on the policy's actions. An empty set means "not yet
// known" (to be derived from data); a non-empty set always has max > min.
class ActionRanges {
 public:
  ActionRanges() = default;
  explicit ActionRanges(std::vector<ActionRange> ranges);

  int dims() const { return static_cast<int>(ranges_.size()); }
  bool empty() const { return ranges_.empty(); }
  const ActionRange& operator[](int i) const { return ranges_[i]; }
  const std::vector<ActionRange>& ranges() const { return ranges_; }

 private:
  std::vector<ActionRange> ranges_;
};

// m = floor(sqrt(n)), at least 1.
int DefaultSpacing(int sample_count);

// Ebrahimi-corrected m-spacing estimate of a univariate sample. The result is
// clamped from below at `floor`; a sample with zero spacings (ties) evaluates
// to `floor` rather than -inf. spacing <= 0 selects DefaultSpacing(n).
// Throws std::invalid_argument when n < 2m + 1.
double SampleEntropy1d(std::span<const double> samples, int spacing,
                       double floor);

// Lowest per-dimension entropy a noisily-optimal human can achieve:
// -0.5 ln(beta) + 0.5 (1 + ln 2pi).
double DimensionFloor(HumanOptimality beta);

// Closed-form entropy of an isotropic Gaussian with variance 1/beta in
// `action_dims` dimensions.
double GaussianEntropy(int action_dims, HumanOptimality beta);

// ln prod_i (max_i - min_i): entropy of the uniform distribution over the box.
double UniformEntropyUpper(const ActionRanges& ranges);

// Multivariate sample entropy as the sum of per-dimension estimates, each
// floored at DimensionFloor(beta). Rows are action dimensions, columns are
// samples.
double SampleEntropyMulti(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                          HumanOptimality beta, int spacing = 0);

// Same estimator bound to a fixed action dimension; rejects samples whose row
// count differs.
class SampleEntropy {
 public:
  SampleEntropy(int action_dims, HumanOptimality beta, int spacing = 0);

  double operator()(const Eigen::Ref<const Eigen::MatrixXd>& samples) const;

  int action_dims() const { return action_dims_; }
  HumanOptimality beta() const { return beta_; }
  int spacing() const { return spacing_; }
  double dimension_floor() const { return floor_; }
  // Smallest sample count accepted by the estimator.
  int MinimumSamples() const;

 private:
  int action_dims_;
  HumanOptimality beta_;
  int spacing_;
  double floor_;
};

}  // namespace realm

#endif  // REALM_ENTROPY_H_

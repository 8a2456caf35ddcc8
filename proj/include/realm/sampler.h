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

#ifndef REALM_SAMPLER_H_
#define REALM_SAMPLER_H_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "realm/environment.h"
#include "realm/rollout_tensor.h"

namespace realm {

struct SamplerSettings {
  int rollouts = 50;
  int horizon = 16;
  // Probability that one rollout query collapses every junction in its window
  // onto a single branch.
  double p_collapse = 0.0;
  // Forecasts start at the agent's position and blend back onto the data
  // distribution over this many steps; 0 disables the blend.
  int pull_steps = 4;
  double noise_sigma = 0.001;
  // Per-trajectory amplitude factors are drawn from [1 - jitter, 1].
  double amplitude_jitter = 0.25;
};

struct AgentState {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  int t = 0;
};

// Generative model of the demonstration data for one environment: a
// backbone path plus the segment-specific variability and isotropic
// Gaussian action noise. Stands in for a trained stochastic policy.
class GroundTruthSampler {
 public:
  explicit GroundTruthSampler(Environment env, SamplerSettings settings = {});

  const Environment& environment() const { return env_; }
  const Backbone& backbone() const { return backbone_; }
  const SamplerSettings& settings() const { return settings_; }

  // Full demonstration of horizon_total steps. The tail repeats the action
  // at test_horizon - 1. Pure in (environment, seed).
  std::vector<Eigen::Vector2d> SampleTrajectory(std::uint64_t seed) const;

  // Forecast of settings().rollouts trajectories over steps t+1 .. t+horizon,
  // conditioned on the agent state. Steps past the test horizon repeat each
  // rollout's final action.
  RolloutTensor SampleRollouts(const AgentState& state,
                               std::uint64_t seed) const;

  // Posterior over the branches of `junction` given the agent state; uniform
  // before the junction is entered.
  std::vector<double> BranchPosterior(const UncertaintySegment& junction,
                                      const AgentState& state) const;

  // Noise-free position of branch `branch` of `junction` at step t.
  Eigen::Vector2d BranchPosition(const UncertaintySegment& junction, int branch,
                                 int t) const;

  // Per-dimension bounds over `count` sampled demonstrations (indices
  // 0..count-1 of the training stream).
  std::vector<std::pair<double, double>> TrainingBounds(int count) const;

 private:
  struct SegmentDraw {
    double factor_x = 1.0;
    double factor_y = 1.0;
    double phase_x = 0.0;
    double phase_y = 0.0;
    int branch = 0;
  };

  template <typename Rng>
  SegmentDraw DrawSegment(const UncertaintySegment& segment, Rng& rng) const;
  Eigen::Vector2d Offset(const UncertaintySegment& segment,
                         const SegmentDraw& draw, int t) const;
  const UncertaintySegment* Segment(int t) const;

  Environment env_;
  SamplerSettings settings_;
  Backbone backbone_;
  std::vector<int> segment_index_;  // per step, -1 outside segments
};

// Seed of training demonstration i; test demonstrations use the same stream
// starting past the training range.
std::uint64_t DemonstrationSeed(std::uint64_t master_seed, int index);

}  // namespace realm

#endif  // REALM_SAMPLER_H_

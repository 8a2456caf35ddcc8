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

#ifndef REALM_MECHANISMS_H_
#define REALM_MECHANISMS_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "realm/entropy.h"
#include "realm/rollout_tensor.h"

namespace realm {

// Declaration order is the fixed tie-break order of the arbiter.
enum class MechanismKind { kNoAssist, kDiscrete, kCorrections, kTeleop };

std::string_view ToString(MechanismKind kind);
MechanismKind ParseMechanismKind(std::string_view name);

// A human assistance mechanism. `arity` is the number of choices for
// discrete and the number of controlled dimensions for corrections; it is 0
// for the other kinds.
struct MechanismId {
  MechanismKind kind = MechanismKind::kNoAssist;
  int arity = 0;

  static MechanismId NoAssist() { return {MechanismKind::kNoAssist, 0}; }
  static MechanismId Teleop() { return {MechanismKind::kTeleop, 0}; }
  static MechanismId Discrete(int choices);
  static MechanismId Corrections(int dims);

  // "no_assist", "discrete(2)", "corrections(1)", "teleop".
  std::string Name() const;
  static MechanismId Parse(std::string_view name);

  auto operator<=>(const MechanismId&) const = default;
};

// k_m: total human input over the horizon.
double InputCount(const MechanismId& mechanism, int action_dims, int horizon);

struct ClusterMetadata {
  std::vector<int> assignments;     // per rollout
  std::vector<Eigen::MatrixXd> means;  // per cluster, n_a x T_r
  std::vector<int> sizes;
  // Clusters too small for the sample-entropy estimator; their entropy was
  // set to the floor.
  std::vector<bool> floored;
};

struct CorrectionMetadata {
  // Per forecast step: n_c x n_a, orthonormal rows (principal directions of
  // the rollout spread, strongest first).
  std::vector<Eigen::MatrixXd> directions;
  // Steps with zero spread, where a fixed basis stood in for the principal
  // directions.
  std::vector<bool> fallback;
};

struct MechanismEstimate {
  MechanismId mechanism;
  std::vector<double> per_step_entropy;  // length T_r
  double human_input = 0.0;              // k_m
  std::optional<ClusterMetadata> clusters;
  std::optional<CorrectionMetadata> corrections;
};

struct EstimatorOptions {
  double beta = kDefaultBeta;
  int spacing = 0;  // 0: floor(sqrt(n)) per call
  int kmeans_restarts = 10;
  int kmeans_max_iterations = 100;
  int n_synth = 0;  // 0: n_r
  std::uint64_t seed = 0;
};

MechanismEstimate EstimateNoAssist(const RolloutTensor& rollouts,
                                   HumanOptimality beta, int spacing = 0);

MechanismEstimate EstimateDiscrete(const RolloutTensor& rollouts, int choices,
                                   HumanOptimality beta,
                                   const EstimatorOptions& options = {});

MechanismEstimate EstimateTeleop(int action_dims, int horizon,
                                 HumanOptimality beta);

// Replaces the top `dims` principal directions of each step's spread with
// draws from the human noise model and keeps the residual spread along the
// remaining directions. Entropy is evaluated in the principal basis.
MechanismEstimate EstimateCorrections(const RolloutTensor& rollouts, int dims,
                                      HumanOptimality beta,
                                      const EstimatorOptions& options = {});

// Dispatch on mechanism kind.
MechanismEstimate Estimate(const MechanismId& mechanism,
                           const RolloutTensor& rollouts,
                           const EstimatorOptions& options);

}  // namespace realm

#endif  // REALM_MECHANISMS_H_

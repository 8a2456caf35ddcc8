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

#ifndef REALM_ARBITER_H_
#define REALM_ARBITER_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "realm/entropy.h"
#include "realm/mechanisms.h"
#include "realm/rollout_tensor.h"

namespace realm {

struct ArbiterConfig {
  std::vector<MechanismId> mechanisms;
  std::map<MechanismId, double> lambda;  // penalization in (0, 1]
  double beta = kDefaultBeta;
  ActionRanges ranges;  // empty: derive from training data before use
  int horizon = 16;     // T_r
  int teleop_consecutive = 3;
  int chunk_steps = 8;
  EstimatorOptions estimator;  // beta is kept in sync with `beta`

  int action_dims() const { return ranges.dims(); }
  double Lambda(const MechanismId& mechanism) const;
};

// {no_assist, discrete(2), corrections(1), teleop} with the penalizations
// reported for the 5-DOF manipulation task.
ArbiterConfig ManipulationArbiterConfig();

// Same mechanism set with penalizations tuned on two held-out Uncerpentine
// environments.
ArbiterConfig UncerpentineArbiterConfig();

struct OrderingViolation {
  MechanismId more_input;  // larger k_m ...
  MechanismId less_input;  // ... but not a strictly smaller lambda than this
};

struct ConfigReport {
  std::vector<OrderingViolation> violations;
  std::vector<std::string> problems;

  bool ok() const { return violations.empty() && problems.empty(); }
  std::string Describe() const;
};

// Checks every ordered pair for k_i > k_j => lambda_i < lambda_j, plus the
// scalar invariants (lambda in (0, 1], h_max > h_min, positive counters).
ConfigReport ValidateConfig(const ArbiterConfig& config);

struct MechanismValue {
  MechanismId mechanism;
  double value = 0.0;
  double human_input = 0.0;  // k_m, used for tie-breaking
};

// Penalized likelihood of a mechanism: lambda times the normalized entropy
// reduction between h_max and h_min, with entropies clamped to that range.
MechanismValue ComputeMechanismValue(const MechanismEstimate& estimate,
                                     const ArbiterConfig& config);

// Highest value wins; ties go to the smaller k_m, then to the kind order
// no_assist, discrete, corrections, teleop. Throws on an empty list.
MechanismId SelectMechanism(std::span<const MechanismValue> values);

struct HysteresisState {
  MechanismId current = MechanismId::NoAssist();
  int teleop_streak = 0;      // consecutive teleop candidates
  int chunk_remaining = 0;    // steps left to reuse the current forecast
  int chunk_offset = 0;       // index into the current forecast
  bool started = false;
};

struct ArbiterDecision {
  MechanismId selected;
  MechanismId candidate;  // argmax before hysteresis
  std::vector<MechanismValue> values;
  HysteresisState state;
  // True when the decision starts a new chunk and the fresh forecast should
  // be executed; false while actions come from the previous forecast.
  bool new_forecast = true;
};

// Teleop is emitted only after `teleop_consecutive` successive teleop
// candidates; until then the previous non-teleop decision persists. A
// decision that does not change keeps executing the same forecast for
// `chunk_steps` steps.
class Hysteresis {
 public:
  Hysteresis(int teleop_consecutive, int chunk_steps);

  ArbiterDecision Apply(const MechanismId& candidate);
  // Forces `mechanism` as the current decision with a fresh chunk.
  void Reset(const MechanismId& mechanism);

  const HysteresisState& state() const { return state_; }

 private:
  int teleop_consecutive_;
  int chunk_steps_;
  HysteresisState state_;
};

// Result of running every configured estimator on one rollout tensor.
struct Assessment {
  std::vector<MechanismEstimate> estimates;
  std::vector<MechanismValue> values;
  MechanismId best;
};

// Estimation + valuation + argmax (no hysteresis). The config must be valid
// and have ranges.
Assessment Assess(const RolloutTensor& rollouts, const ArbiterConfig& config,
                  std::uint64_t seed);

nlohmann::json ToJson(const ArbiterConfig& config);
// Reads {"arbiter": {...}}; missing fields keep their defaults.
ArbiterConfig ArbiterConfigFromJson(const nlohmann::json& json);
ArbiterConfig LoadArbiterConfig(const std::string& path);

}  // namespace realm

#endif  // REALM_ARBITER_H_

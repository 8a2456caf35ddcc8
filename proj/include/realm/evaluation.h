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

#ifndef REALM_EVALUATION_H_
#define REALM_EVALUATION_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "realm/arbiter.h"
#include "realm/environment.h"
#include "realm/rollout_tensor.h"
#include "realm/sampler.h"

namespace realm {

// Rows: actual {none, corrections, teleoperation}. Columns: estimated
// {no_assist, corrections, teleop, discrete}.
class ConfusionMatrix {
 public:
  static constexpr int kRows = 3;
  static constexpr int kCols = 4;

  // Row of a label; discrete labels have no row (returns -1).
  static int Row(GroundTruthLabel label);
  static int Column(MechanismKind kind);

  void Add(GroundTruthLabel actual, MechanismKind estimated);
  void Merge(const ConfusionMatrix& other);

  long Count(int row, int col) const { return counts_[row][col]; }
  long RowTotal(int row) const;
  long Total() const;
  long Errors() const;
  // Row-normalized frequency; 0 for an empty row.
  double Rate(int row, int col) const;
  // Rate(row, matching column).
  double Diagonal(int row) const;

  std::string ToCsv(bool normalized) const;
  nlohmann::json ToJson() const;

 private:
  std::array<std::array<long, kCols>, kRows> counts_{};
};

struct MarginPolicy {
  int margin_steps = 16;
};

// True if t lies within margin_steps of a label change: a change between
// steps b-1 and b excludes [b - margin, b + margin).
bool NearTransition(const Environment& env, int t, const MarginPolicy& margin);

enum class GateMode { kRobot, kHuman };

// Sum over forecast steps of the per-dimension unbiased sample variances.
double SummedActionVariance(const RolloutTensor& rollouts);

// Variance-gated teleoperation: the robot keeps control (executing the first
// rollout) iff the summed variance is at most gamma.
GateMode UATeleopGate(const RolloutTensor& rollouts, double gamma);

struct EvaluationOptions {
  int test_trajectories = 100;
  // Demonstrations used to derive action ranges when the config has none.
  int training_trajectories = 900;
  int margin_steps = -1;  // -1: the estimate horizon
  SamplerSettings sampler;  // horizon is overridden by the config's
  std::uint64_t seed = 0;
  bool baseline = false;
  double gamma = 0.3;
  int threads = 0;  // 0: hardware concurrency
};

struct StepRecord {
  int trajectory = 0;
  int t = 0;
  GroundTruthLabel label = GroundTruthLabel::kNone;
  MechanismKind estimated = MechanismKind::kNoAssist;
  bool near_transition = false;
  GateMode gate = GateMode::kRobot;
  double seconds = 0.0;  // estimation + arbitration
};

struct JunctionReport {
  int start_t = 0;
  int end_t = 0;
  int trajectories = 0;
  int detected = 0;
};

struct GateCounts {
  long teleop_steps = 0;
  long teleop_human = 0;
  long certain_steps = 0;
  long certain_robot = 0;

  double HumanOnTeleop() const;
  double RobotOnCertain() const;
};

struct BaselineStats {
  GateCounts raw;
  GateCounts filtered;  // steps away from label transitions
};

struct TimingStats {
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
  long samples = 0;
};

TimingStats Percentiles(std::vector<double> seconds);

struct EvaluationResult {
  ConfusionMatrix raw;
  ConfusionMatrix filtered;
  std::vector<JunctionReport> junctions;
  std::optional<BaselineStats> baseline;
  TimingStats timing;
  std::vector<StepRecord> records;
  std::vector<std::string> failures;
  int margin_steps = 0;
  ActionRanges ranges;

  int JunctionsSeen() const;
  int JunctionsDetected() const;
  double DetectionRate() const;  // 1 when there are no junctions
};

// Runs the arbiter (no hysteresis) at every test step of every test
// trajectory and scores the decisions against the ground-truth labels.
// Discrete-labelled steps are left out of the matrices; junctions are scored
// as detected iff a discrete decision occurs in the horizon-length window
// before the junction starts.
EvaluationResult EvaluateEnvironment(const Environment& env,
                                     const ArbiterConfig& config,
                                     const EvaluationOptions& options);

// Recounts a matrix from per-step records; `filtered` drops steps near
// transitions.
ConfusionMatrix TallyRecords(std::span<const StepRecord> records, bool filtered);

// Share of raw-matrix errors that lie near a label transition.
double BoundaryErrorFraction(std::span<const StepRecord> records);

// Pooled results over a suite of environments.
struct SuiteSummary {
  ConfusionMatrix raw;
  ConfusionMatrix filtered;
  int junctions_seen = 0;
  int junctions_detected = 0;
  TimingStats timing;
  double boundary_error_fraction = 1.0;
  std::optional<BaselineStats> baseline;
  long failures = 0;

  double DetectionRate() const;
};

SuiteSummary Summarize(std::span<const EvaluationResult> results);

nlohmann::json ToJson(const TimingStats& timing);
nlohmann::json ToJson(const BaselineStats& stats);
// Per-step records are left out.
nlohmann::json ToJson(const EvaluationResult& result);
nlohmann::json ToJson(const SuiteSummary& summary);

// Action ranges from training demonstrations, used when a config has none.
ActionRanges DeriveRanges(const GroundTruthSampler& sampler, int trajectories);

}  // namespace realm

#endif  // REALM_EVALUATION_H_

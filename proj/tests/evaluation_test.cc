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

#include "realm/evaluation.h"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "realm/session_log.h"
#include "test_util.h"

namespace realm {
namespace {

using testing::MakeTensor;

Environment OnlyJunction(std::uint64_t seed) {
  GenerationConfig config;
  config.teleop.count_min = config.teleop.count_max = 0;
  config.corrective.count_min = config.corrective.count_max = 0;
  return GenerateEnvironment(seed, config);
}

Environment NoSegments(std::uint64_t seed) {
  GenerationConfig config;
  config.teleop.count_min = config.teleop.count_max = 0;
  config.corrective.count_min = config.corrective.count_max = 0;
  config.junction.count_min = config.junction.count_max = 0;
  return GenerateEnvironment(seed, config);
}

EvaluationOptions Quick(int trajectories, std::uint64_t seed = 1) {
  EvaluationOptions options;
  options.test_trajectories = trajectories;
  options.training_trajectories = 300;
  options.seed = seed;
  return options;
}

TEST(ConfusionMatrix, RowsAreNormalized) {
  ConfusionMatrix m;
  m.Add(GroundTruthLabel::kNone, MechanismKind::kNoAssist);
  m.Add(GroundTruthLabel::kNone, MechanismKind::kNoAssist);
  m.Add(GroundTruthLabel::kNone, MechanismKind::kTeleop);
  m.Add(GroundTruthLabel::kCorrections, MechanismKind::kDiscrete);
  EXPECT_EQ(m.Total(), 4);
  EXPECT_EQ(m.Errors(), 2);
  EXPECT_NEAR(m.Diagonal(0), 2.0 / 3.0, 1e-15);
  for (int r = 0; r < 2; ++r) {
    double sum = 0.0;
    for (int c = 0; c < ConfusionMatrix::kCols; ++c) sum += m.Rate(r, c);
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
  EXPECT_EQ(m.RowTotal(2), 0);
  EXPECT_EQ(m.Rate(2, 2), 0.0);
  EXPECT_EQ(ConfusionMatrix::Row(GroundTruthLabel::kDiscrete), -1);
  EXPECT_THROW(m.Add(GroundTruthLabel::kDiscrete, MechanismKind::kNoAssist),
               std::invalid_argument);
}

TEST(ConfusionMatrix, MergeAndCsv) {
  ConfusionMatrix a, b;
  a.Add(GroundTruthLabel::kTeleoperation, MechanismKind::kTeleop);
  b.Add(GroundTruthLabel::kTeleoperation, MechanismKind::kCorrections);
  a.Merge(b);
  EXPECT_EQ(a.Count(2, 2), 1);
  EXPECT_EQ(a.Count(2, 1), 1);
  const std::string csv = a.ToCsv(false);
  EXPECT_NE(csv.find("no_assist"), std::string::npos);
  EXPECT_NE(csv.find("teleoperation,0,1,1,0"), std::string::npos) << csv;
}

TEST(UATeleopGate, IdenticalRolloutsStayWithTheRobot) {
  const RolloutTensor tensor = MakeTensor(2, 20, 16, [](int d, int, int t) { return d + 0.1 * t; });
  EXPECT_NEAR(SummedActionVariance(tensor), 0.0, 1e-20);
  EXPECT_EQ(UATeleopGate(tensor, 1e-9), GateMode::kRobot);
}

TEST(UATeleopGate, ThresholdArithmetic) {
  // Two rollouts at +-a give an unbiased variance of 2 a^2 = 0.01 per step and
  // dimension, so the sum over 16 steps and 2 dimensions is 0.32.
  const double a = std::sqrt(0.005);
  const RolloutTensor tensor =
      MakeTensor(2, 2, 16, [&](int, int n, int) { return n == 0 ? a : -a; });
  EXPECT_NEAR(SummedActionVariance(tensor), 0.32, 1e-12);
  EXPECT_EQ(UATeleopGate(tensor, 0.3), GateMode::kHuman);
  EXPECT_EQ(UATeleopGate(tensor, 0.5), GateMode::kRobot);
}

SessionRecord Record(MechanismId mode, bool decision = false) {
  SessionRecord r;
  r.mode = mode;
  r.discrete_decision = decision;
  r.position = Eigen::Vector2d::Zero();
  return r;
}

TEST(InputMetric, Examples) {
  SessionLog idle;
  for (int i = 0; i < 100; ++i) idle.records.push_back(Record(MechanismId::NoAssist()));
  EXPECT_EQ(InputMetric(idle), 0.0);

  SessionLog mixed;
  for (int i = 0; i < 10; ++i) mixed.records.push_back(Record(MechanismId::Corrections(1)));
  mixed.records.push_back(Record(MechanismId::Discrete(2), true));
  mixed.records.push_back(Record(MechanismId::Discrete(2), true));
  EXPECT_EQ(InputMetric(mixed), 12.0);

  SessionLog teleop;
  for (int i = 0; i < 10; ++i) teleop.records.push_back(Record(MechanismId::Teleop()));
  EXPECT_EQ(InputMetric(teleop, ManipulationInputWeights()), 50.0);
  EXPECT_EQ(InputMetric(teleop), 20.0);
}

TEST(InputMetric, RejectedCyclesAreFree) {
  SessionLog log;
  SessionRecord r = Record(MechanismId::Teleop());
  r.accepted = false;
  log.records.push_back(r);
  EXPECT_EQ(InputMetric(log), 0.0);
}

TEST(InputMetric, UnknownModeInLogIsAnError) {
  std::istringstream in(
      R"({"type":"header","seed":1})" "\n"
      R"({"type":"step","cycle":0,"t":0,"mode":"hover","accepted":true,"discrete_decision":false,"pos":[0,0]})" "\n");
  EXPECT_THROW(ParseSessionLog(in), std::invalid_argument);
}

TEST(EvaluateEnvironment, CertaintyEverywhereIsNoAssist) {
  const Environment env = NoSegments(101);
  const EvaluationResult r = EvaluateEnvironment(env, UncerpentineArbiterConfig(), Quick(10));
  EXPECT_TRUE(r.failures.empty());
  EXPECT_EQ(r.raw.RowTotal(0), 10L * env.test_horizon());
  EXPECT_GE(r.raw.Diagonal(0), 0.95);
  EXPECT_EQ(r.JunctionsSeen(), 0);
  EXPECT_EQ(r.DetectionRate(), 1.0);
}

TEST(EvaluateEnvironment, JunctionIsAnticipated) {
  const Environment env = OnlyJunction(102);
  ASSERT_EQ(env.segments.size(), 1u);
  const EvaluationResult r = EvaluateEnvironment(env, UncerpentineArbiterConfig(), Quick(100));
  EXPECT_EQ(r.JunctionsSeen(), 100);
  EXPECT_EQ(r.DetectionRate(), 1.0);
}

TEST(EvaluateEnvironment, ModeCollapseHidesTheJunction) {
  const Environment env = OnlyJunction(102);
  EvaluationOptions options = Quick(30);
  options.sampler.p_collapse = 1.0;
  const EvaluationResult r = EvaluateEnvironment(env, UncerpentineArbiterConfig(), options);
  EXPECT_LE(r.DetectionRate(), 0.1);
}

class FullEnvironment : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    EvaluationOptions options = Quick(6, 5);
    options.baseline = true;
    result_ = new EvaluationResult(
        EvaluateEnvironment(GenerateEnvironment(103), UncerpentineArbiterConfig(), options));
  }
  static void TearDownTestSuite() { delete result_; }
  static EvaluationResult* result_;
};
EvaluationResult* FullEnvironment::result_ = nullptr;

TEST_F(FullEnvironment, FilteringOnlyRemovesBoundaryConfusion) {
  const EvaluationResult& r = *result_;
  EXPECT_EQ(r.margin_steps, 16);
  for (int row = 0; row < ConfusionMatrix::kRows; ++row) {
    if (r.raw.RowTotal(row) == 0) continue;
    EXPECT_GE(r.filtered.Diagonal(row), r.raw.Diagonal(row)) << row;
    EXPECT_LE(r.filtered.RowTotal(row), r.raw.RowTotal(row));
  }
}

TEST_F(FullEnvironment, MatricesRecountFromRecords) {
  const EvaluationResult& r = *result_;
  const ConfusionMatrix raw = TallyRecords(r.records, false);
  const ConfusionMatrix filtered = TallyRecords(r.records, true);
  for (int row = 0; row < ConfusionMatrix::kRows; ++row) {
    for (int col = 0; col < ConfusionMatrix::kCols; ++col) {
      EXPECT_EQ(raw.Count(row, col), r.raw.Count(row, col));
      EXPECT_EQ(filtered.Count(row, col), r.filtered.Count(row, col));
    }
  }
  const double fraction = BoundaryErrorFraction(r.records);
  EXPECT_GE(fraction, 0.0);
  EXPECT_LE(fraction, 1.0);
}

TEST_F(FullEnvironment, ReportsBaselineAndTiming) {
  const EvaluationResult& r = *result_;
  ASSERT_TRUE(r.baseline.has_value());
  EXPECT_GT(r.baseline->raw.certain_steps, 0);
  EXPECT_GE(r.baseline->raw.teleop_steps, r.baseline->filtered.teleop_steps);
  EXPECT_GT(r.timing.samples, 0);
  EXPECT_LE(r.timing.p50, r.timing.p99);
  const nlohmann::json json = ToJson(r);
  EXPECT_TRUE(json.contains("raw"));
  EXPECT_TRUE(json.contains("filtered"));
  EXPECT_TRUE(json.contains("timing"));
}

TEST(EvaluateEnvironment, DeterministicAcrossThreadCounts) {
  const Environment env = GenerateEnvironment(104);
  EvaluationOptions one = Quick(3, 9);
  one.threads = 1;
  EvaluationOptions many = one;
  many.threads = 3;
  const EvaluationResult a = EvaluateEnvironment(env, UncerpentineArbiterConfig(), one);
  const EvaluationResult b = EvaluateEnvironment(env, UncerpentineArbiterConfig(), many);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].estimated, b.records[i].estimated) << i;
  }
}

TEST(Summarize, PoolsEnvironments) {
  std::vector<EvaluationResult> results;
  results.push_back(EvaluateEnvironment(OnlyJunction(105), UncerpentineArbiterConfig(), Quick(2)));
  results.push_back(EvaluateEnvironment(OnlyJunction(106), UncerpentineArbiterConfig(), Quick(2)));
  const SuiteSummary s = Summarize(results);
  EXPECT_EQ(s.junctions_seen, 4);
  EXPECT_EQ(s.raw.Total(), results[0].raw.Total() + results[1].raw.Total());
  EXPECT_EQ(s.timing.samples, results[0].timing.samples + results[1].timing.samples);
  EXPECT_TRUE(ToJson(s).contains("detection_rate"));
}

}  // namespace
}  // namespace realm

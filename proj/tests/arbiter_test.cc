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

#include "realm/arbiter.h"

#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.h"

namespace realm {
namespace {

using testing::RandomTensor;

ArbiterConfig UnitBoxConfig(int n_a = 2, int horizon = 16) {
  ArbiterConfig config = UncerpentineArbiterConfig();
  config.horizon = horizon;
  config.ranges = ActionRanges(std::vector<ActionRange>(n_a, {0.0, 1.0}));
  return config;
}

MechanismEstimate Constant(const MechanismId& m, int horizon, double h) {
  MechanismEstimate e;
  e.mechanism = m;
  e.per_step_entropy.assign(horizon, h);
  return e;
}

MechanismValue Value(const MechanismId& m, double v) {
  return {m, v, InputCount(m, 2, 16)};
}

TEST(ValidateConfig, ManipulationDefaultsAreConsistent) {
  ArbiterConfig config = ManipulationArbiterConfig();
  config.ranges = ActionRanges(std::vector<ActionRange>(5, {-1.0, 1.0}));
  EXPECT_EQ(config.horizon, 12);
  const ConfigReport report = ValidateConfig(config);
  EXPECT_TRUE(report.ok()) << report.Describe();
  EXPECT_EQ(InputCount(MechanismId::Discrete(2), 5, 12), 2.0);
  EXPECT_EQ(InputCount(MechanismId::Corrections(1), 5, 12), 12.0);
  EXPECT_EQ(InputCount(MechanismId::Teleop(), 5, 12), 60.0);
}

TEST(ValidateConfig, ReportsTeleopAboveDiscrete) {
  ArbiterConfig config = UnitBoxConfig();
  config.lambda[MechanismId::Teleop()] = 0.96;
  const ConfigReport report = ValidateConfig(config);
  ASSERT_FALSE(report.ok());
  EXPECT_TRUE(report.problems.empty());
  // 0.96 > 0.954 (discrete) and > 0.885 (corrections), both needing less input.
  ASSERT_EQ(report.violations.size(), 2u);
  const bool lists_pair = std::ranges::any_of(report.violations, [](const auto& v) {
    return v.more_input == MechanismId::Teleop() &&
           v.less_input == MechanismId::Discrete(2);
  });
  EXPECT_TRUE(lists_pair);
  EXPECT_NE(report.Describe().find("teleop"), std::string::npos);
  EXPECT_NE(report.Describe().find("discrete(2)"), std::string::npos);
}

TEST(ValidateConfig, SingleMechanismIsVacuouslyOk) {
  ArbiterConfig config = UnitBoxConfig();
  config.mechanisms = {MechanismId::NoAssist()};
  EXPECT_TRUE(ValidateConfig(config).ok());
}

TEST(ValidateConfig, EqualLambdaForDifferentInputIsAViolation) {
  ArbiterConfig config = UnitBoxConfig();
  config.lambda[MechanismId::Corrections(1)] = 0.954;
  const ConfigReport report = ValidateConfig(config);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].more_input, MechanismId::Corrections(1));
  EXPECT_EQ(report.violations[0].less_input, MechanismId::Discrete(2));
}

TEST(ValidateConfig, ScalarProblems) {
  ArbiterConfig config = UnitBoxConfig();
  config.ranges = ActionRanges();
  EXPECT_FALSE(ValidateConfig(config).ok());

  config = UnitBoxConfig();
  config.lambda[MechanismId::NoAssist()] = 1.5;
  EXPECT_FALSE(ValidateConfig(config).problems.empty());

  config = UnitBoxConfig();
  config.lambda.erase(MechanismId::Teleop());
  EXPECT_FALSE(ValidateConfig(config).problems.empty());

  config = UnitBoxConfig();
  config.mechanisms.push_back(MechanismId::NoAssist());
  EXPECT_FALSE(ValidateConfig(config).problems.empty());

  config = UnitBoxConfig();
  config.chunk_steps = 0;
  EXPECT_FALSE(ValidateConfig(config).problems.empty());

  // A box narrower than the human noise leaves no room between the bounds.
  config = UnitBoxConfig();
  config.ranges = ActionRanges({{0.0, 1e-4}, {0.0, 1e-4}});
  EXPECT_FALSE(ValidateConfig(config).problems.empty());

  config = UnitBoxConfig();
  config.mechanisms.push_back(MechanismId::Corrections(2));
  config.lambda[MechanismId::Corrections(2)] = 0.87;
  EXPECT_FALSE(ValidateConfig(config).problems.empty());
}

TEST(MechanismValue, EndpointsAndMidpoint) {
  ArbiterConfig config = UnitBoxConfig();
  const double h_min = GaussianEntropy(2, HumanOptimality(config.beta));
  const double h_max = UniformEntropyUpper(config.ranges);
  EXPECT_EQ(h_max, 0.0);
  const MechanismId d = MechanismId::Discrete(2);
  EXPECT_EQ(ComputeMechanismValue(Constant(d, 16, h_min), config).value, 0.954);
  EXPECT_EQ(ComputeMechanismValue(Constant(d, 16, h_max), config).value, 0.0);
  config.lambda[d] = 0.9;
  EXPECT_NEAR(ComputeMechanismValue(Constant(d, 16, 0.5 * (h_min + h_max)), config).value,
              0.45, 1e-12);
}

TEST(MechanismValue, ClampsOutOfRangeEntropies) {
  const ArbiterConfig config = UnitBoxConfig();
  const MechanismId none = MechanismId::NoAssist();
  EXPECT_EQ(ComputeMechanismValue(Constant(none, 16, -100.0), config).value, 1.0);
  EXPECT_EQ(ComputeMechanismValue(Constant(none, 16, 5.0), config).value, 0.0);
}

TEST(MechanismValue, RejectsHorizonMismatch) {
  const ArbiterConfig config = UnitBoxConfig();
  EXPECT_THROW(ComputeMechanismValue(Constant(MechanismId::NoAssist(), 12, 0.0), config),
               std::invalid_argument);
}

// Straight transcription of the penalized likelihood, written independently
// of the library.
double ReferenceValue(const std::vector<double>& h, double lambda, double h_min,
                      double h_max) {
  double sum = 0.0;
  for (double x : h) {
    const double clamped = x < h_min ? h_min : (x > h_max ? h_max : x);
    sum += (h_max - clamped) / (h_max - h_min);
  }
  return lambda * sum / static_cast<double>(h.size());
}

TEST(MechanismValue, MatchesIndependentReimplementation) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-14.0, 2.0);
  std::uniform_real_distribution<double> width(0.05, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    ArbiterConfig config = UnitBoxConfig();
    config.ranges = ActionRanges({{0.0, width(rng)}, {-1.0, -1.0 + width(rng)}});
    const double h_min = GaussianEntropy(2, HumanOptimality(config.beta));
    const double h_max = UniformEntropyUpper(config.ranges);
    for (const MechanismId& m : config.mechanisms) {
      MechanismEstimate e;
      e.mechanism = m;
      for (int t = 0; t < 16; ++t) e.per_step_entropy.push_back(u(rng));
      const MechanismValue v = ComputeMechanismValue(e, config);
      const double lambda = config.Lambda(m);
      EXPECT_NEAR(v.value, ReferenceValue(e.per_step_entropy, lambda, h_min, h_max),
                  1e-12);
      EXPECT_GE(v.value, 0.0);
      EXPECT_LE(v.value, lambda);
      EXPECT_EQ(v.human_input, InputCount(m, 2, 16));
    }
  }
}

TEST(MechanismValue, LoweringOneStepRaisesOnlyThatValue) {
  const ArbiterConfig config = UnitBoxConfig();
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> inside(-10.0, -1.0);
  std::uniform_int_distribution<int> step(0, 15);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<MechanismEstimate> estimates;
    for (const MechanismId& m : config.mechanisms) {
      MechanismEstimate e;
      e.mechanism = m;
      for (int t = 0; t < 16; ++t) e.per_step_entropy.push_back(inside(rng));
      estimates.push_back(e);
    }
    std::vector<double> before;
    for (const auto& e : estimates) before.push_back(ComputeMechanismValue(e, config).value);
    const int changed = trial % static_cast<int>(estimates.size());
    estimates[changed].per_step_entropy[step(rng)] -= 0.5;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
      const double after = ComputeMechanismValue(estimates[i], config).value;
      if (static_cast<int>(i) == changed) {
        EXPECT_GT(after, before[i]);
      } else {
        EXPECT_EQ(after, before[i]);
      }
    }
  }
}

TEST(SelectMechanism, Argmax) {
  const std::vector<MechanismValue> values = {Value(MechanismId::NoAssist(), 0.2),
                                              Value(MechanismId::Discrete(2), 0.9),
                                              Value(MechanismId::Teleop(), 0.7)};
  EXPECT_EQ(SelectMechanism(values), MechanismId::Discrete(2));
}

TEST(SelectMechanism, TiesPreferLessInput) {
  const std::vector<MechanismValue> values = {Value(MechanismId::Corrections(1), 0.8),
                                              Value(MechanismId::NoAssist(), 0.8)};
  EXPECT_EQ(SelectMechanism(values), MechanismId::NoAssist());
}

TEST(SelectMechanism, EqualInputFallsBackToKindOrder) {
  const std::vector<MechanismValue> values = {{MechanismId::Teleop(), 0.5, 3.0},
                                              {MechanismId::Corrections(1), 0.5, 3.0},
                                              {MechanismId::Discrete(3), 0.5, 3.0}};
  EXPECT_EQ(SelectMechanism(values), MechanismId::Discrete(3));
}

TEST(SelectMechanism, SingleAndEmpty) {
  const std::vector<MechanismValue> one = {Value(MechanismId::Teleop(), 0.1)};
  EXPECT_EQ(SelectMechanism(one), MechanismId::Teleop());
  EXPECT_THROW(SelectMechanism({}), std::invalid_argument);
}

std::vector<MechanismId> Feed(Hysteresis& h, const std::vector<MechanismId>& candidates) {
  std::vector<MechanismId> out;
  for (const MechanismId& c : candidates) out.push_back(h.Apply(c).selected);
  return out;
}

TEST(Hysteresis, TwoTeleopCandidatesNeverEmitTeleop) {
  Hysteresis h(3, 8);
  const MechanismId t = MechanismId::Teleop(), n = MechanismId::NoAssist();
  for (const MechanismId& s : Feed(h, {t, t, n})) EXPECT_NE(s, t);
}

TEST(Hysteresis, TeleopOnTheThirdConsecutiveCandidate) {
  Hysteresis h(3, 8);
  const MechanismId t = MechanismId::Teleop(), n = MechanismId::NoAssist();
  EXPECT_EQ(Feed(h, {t, t, t}), (std::vector<MechanismId>{n, n, t}));
}

TEST(Hysteresis, InterruptedStreakStartsOver) {
  Hysteresis h(3, 8);
  const MechanismId t = MechanismId::Teleop(), c = MechanismId::Corrections(1);
  EXPECT_EQ(Feed(h, {c, t, t, c, t, t, t}),
            (std::vector<MechanismId>{c, c, c, c, c, c, t}));
}

TEST(Hysteresis, ExitFromTeleopIsImmediate) {
  Hysteresis h(3, 8);
  const MechanismId t = MechanismId::Teleop(), d = MechanismId::Discrete(2);
  EXPECT_EQ(Feed(h, {t, t, t, d}).back(), d);
}

TEST(Hysteresis, ConstantCandidateReusesOneForecastPerChunk) {
  Hysteresis h(3, 8);
  std::vector<bool> fresh;
  std::vector<int> offsets;
  for (int i = 0; i < 24; ++i) {
    const ArbiterDecision d = h.Apply(MechanismId::NoAssist());
    EXPECT_EQ(d.selected, MechanismId::NoAssist());
    fresh.push_back(d.new_forecast);
    offsets.push_back(d.state.chunk_offset);
  }
  for (int i = 0; i < 24; ++i) {
    EXPECT_EQ(fresh[i], i % 8 == 0) << i;
    EXPECT_EQ(offsets[i], i % 8) << i;
  }
}

TEST(Hysteresis, ChangeStartsANewChunk) {
  Hysteresis h(3, 8);
  h.Apply(MechanismId::NoAssist());
  h.Apply(MechanismId::NoAssist());
  const ArbiterDecision d = h.Apply(MechanismId::Corrections(1));
  EXPECT_TRUE(d.new_forecast);
  EXPECT_EQ(d.state.chunk_offset, 0);
}

TEST(Hysteresis, StableCandidatesAreNeverOverridden) {
  std::mt19937_64 rng(31);
  const std::vector<MechanismId> kinds = {MechanismId::NoAssist(), MechanismId::Discrete(2),
                                          MechanismId::Corrections(1), MechanismId::Teleop()};
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_int_distribution<int> noise_len(0, 5);
  for (int trial = 0; trial < 200; ++trial) {
    Hysteresis h(3, 8);
    for (int i = noise_len(rng); i > 0; --i) h.Apply(kinds[pick(rng)]);
    const MechanismId stable = kinds[pick(rng)];
    for (int i = 0; i < 8; ++i) h.Apply(stable);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(h.Apply(stable).selected, stable);
  }
}

TEST(Hysteresis, ResetForcesDecision) {
  Hysteresis h(3, 8);
  h.Apply(MechanismId::Teleop());
  h.Apply(MechanismId::Teleop());
  h.Reset(MechanismId::NoAssist());
  EXPECT_EQ(h.state().teleop_streak, 0);
  EXPECT_EQ(h.Apply(MechanismId::Teleop()).selected, MechanismId::NoAssist());
  EXPECT_THROW(Hysteresis(0, 8), std::invalid_argument);
}

TEST(Assess, PicksTheLargestValue) {
  ArbiterConfig config = UnitBoxConfig();
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Assessment a = Assess(RandomTensor(rng), config, trial);
    ASSERT_EQ(a.values.size(), 4u);
    double best = -1.0;
    for (const MechanismValue& v : a.values) best = std::max(best, v.value);
    const auto chosen = std::ranges::find_if(
        a.values, [&](const MechanismValue& v) { return v.mechanism == a.best; });
    ASSERT_NE(chosen, a.values.end());
    EXPECT_EQ(chosen->value, best);
  }
}

TEST(Assess, Deterministic) {
  const ArbiterConfig config = UnitBoxConfig();
  std::mt19937_64 rng(42);
  const RolloutTensor tensor = RandomTensor(rng);
  const Assessment a = Assess(tensor, config, 7);
  const Assessment b = Assess(tensor, config, 7);
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    EXPECT_EQ(a.values[i].value, b.values[i].value);
  }
}

TEST(Assess, RejectsShapeMismatch) {
  const ArbiterConfig config = UnitBoxConfig(2, 12);
  std::mt19937_64 rng(43);
  EXPECT_THROW(Assess(RandomTensor(rng), config, 0), std::invalid_argument);
}

TEST(ArbiterConfigJson, RoundTrip) {
  ArbiterConfig config = UnitBoxConfig();
  config.ranges = ActionRanges({{-0.25, 1.5}, {0.0, 2.0}});
  config.chunk_steps = 5;
  config.estimator.n_synth = 80;
  const ArbiterConfig back = ArbiterConfigFromJson(ToJson(config));
  EXPECT_EQ(back.mechanisms, config.mechanisms);
  EXPECT_EQ(back.lambda, config.lambda);
  EXPECT_EQ(back.horizon, config.horizon);
  EXPECT_EQ(back.chunk_steps, 5);
  EXPECT_EQ(back.estimator.n_synth, 80);
  ASSERT_EQ(back.ranges.dims(), 2);
  EXPECT_EQ(back.ranges[0].min, -0.25);
  EXPECT_EQ(back.ranges[1].max, 2.0);
  EXPECT_EQ(ToJson(back), ToJson(config));
}

TEST(ArbiterConfigJson, MissingFieldsKeepDefaults) {
  const ArbiterConfig config =
      ArbiterConfigFromJson(nlohmann::json::parse(R"({"arbiter": {"horizon": 12}})"));
  EXPECT_EQ(config.horizon, 12);
  EXPECT_EQ(config.mechanisms.size(), 4u);
  EXPECT_EQ(config.teleop_consecutive, 3);
  EXPECT_EQ(config.chunk_steps, 8);
}

TEST(ArbiterConfigJson, Malformed) {
  EXPECT_THROW(ArbiterConfigFromJson(nlohmann::json::parse(R"({"x": 1})")),
               std::invalid_argument);
  EXPECT_THROW(ArbiterConfigFromJson(nlohmann::json::parse(
                   R"({"arbiter": {"mechanisms": ["hover"]}})")),
               std::invalid_argument);
  EXPECT_THROW(ArbiterConfigFromJson(nlohmann::json::parse(
                   R"({"arbiter": {"ranges": [[0, 1, 2]]}})")),
               std::invalid_argument);
}

}  // namespace
}  // namespace realm

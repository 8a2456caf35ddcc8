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
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "realm/random.h"

namespace realm {

namespace {

std::vector<MechanismId> DefaultMechanisms() {
  return {MechanismId::NoAssist(), MechanismId::Discrete(2),
          MechanismId::Corrections(1), MechanismId::Teleop()};
}

}  // namespace

double ArbiterConfig::Lambda(const MechanismId& mechanism) const {
  auto it = lambda.find(mechanism);
  if (it == lambda.end()) {
    throw std::invalid_argument("no penalization for " + mechanism.Name());
  }
  return it->second;
}

ArbiterConfig ManipulationArbiterConfig() {
  ArbiterConfig config;
  config.mechanisms = DefaultMechanisms();
  config.lambda = {{MechanismId::NoAssist(), 1.0},
                   {MechanismId::Teleop(), 0.862},
                   {MechanismId::Discrete(2), 0.954},
                   {MechanismId::Corrections(1), 0.885}};
  config.horizon = 12;
  return config;
}

ArbiterConfig UncerpentineArbiterConfig() {
  ArbiterConfig config;
  config.mechanisms = DefaultMechanisms();
  config.lambda = {{MechanismId::NoAssist(), 1.0},
                   {MechanismId::Teleop(), 0.862},
                   {MechanismId::Discrete(2), 0.954},
                   {MechanismId::Corrections(1), 0.885}};
  config.horizon = 16;
  return config;
}

std::string ConfigReport::Describe() const {
  std::ostringstream out;
  for (const OrderingViolation& v : violations) {
    out << "penalization ordering violated: " << v.more_input.Name()
        << " needs more input than " << v.less_input.Name()
        << " but its lambda is not smaller\n";
  }
  for (const std::string& p : problems) out << p << "\n";
  return out.str();
}

ConfigReport ValidateConfig(const ArbiterConfig& config) {
  ConfigReport report;
  auto problem = [&report](std::string message) {
    report.problems.push_back(std::move(message));
  };
  if (config.mechanisms.empty()) problem("no mechanisms configured");
  if (config.horizon < 1) problem("horizon must be >= 1");
  if (config.teleop_consecutive < 1) problem("teleop_consecutive must be >= 1");
  if (config.chunk_steps < 1) problem("chunk_steps must be >= 1");
  if (config.ranges.empty()) problem("action ranges are not set");
  if (!(config.beta > 0.0)) problem("beta must be positive");

  std::set<MechanismId> seen;
  for (const MechanismId& m : config.mechanisms) {
    if (!seen.insert(m).second) problem("duplicate mechanism " + m.Name());
    auto it = config.lambda.find(m);
    if (it == config.lambda.end()) {
      problem("no penalization for " + m.Name());
    } else if (!(it->second > 0.0 && it->second <= 1.0)) {
      problem("penalization for " + m.Name() + " must be in (0, 1]");
    }
    if (m.kind == MechanismKind::kCorrections && !config.ranges.empty() &&
        m.arity >= config.action_dims()) {
      problem(m.Name() + " needs fewer dimensions than the action space");
    }
  }
  if (!report.problems.empty()) return report;

  const HumanOptimality beta(config.beta);
  const int n_a = config.action_dims();
  if (!(UniformEntropyUpper(config.ranges) > GaussianEntropy(n_a, beta))) {
    problem("h_max from the action ranges must exceed the human floor h_min");
  }
  for (const MechanismId& a : config.mechanisms) {
    for (const MechanismId& b : config.mechanisms) {
      if (InputCount(a, n_a, config.horizon) > InputCount(b, n_a, config.horizon) &&
          !(config.Lambda(a) < config.Lambda(b))) {
        report.violations.push_back({a, b});
      }
    }
  }
  return report;
}

MechanismValue ComputeMechanismValue(const MechanismEstimate& estimate,
                                     const ArbiterConfig& config) {
  const int horizon = config.horizon;
  if (static_cast<int>(estimate.per_step_entropy.size()) != horizon) {
    throw std::invalid_argument("estimate horizon does not match config");
  }
  const int n_a = config.action_dims();
  const double h_min = GaussianEntropy(n_a, HumanOptimality(config.beta));
  const double h_max = UniformEntropyUpper(config.ranges);
  // Normalizing per step keeps both ends of the range exact.
  double reduction = 0.0;
  for (double h : estimate.per_step_entropy) {
    reduction += (h_max - std::clamp(h, h_min, h_max)) / (h_max - h_min);
  }
  const double lambda = config.Lambda(estimate.mechanism);
  return {estimate.mechanism, lambda * (reduction / horizon),
          InputCount(estimate.mechanism, n_a, horizon)};
}

MechanismId SelectMechanism(std::span<const MechanismValue> values) {
  if (values.empty()) throw std::invalid_argument("no mechanism values");
  const MechanismValue* best = &values.front();
  for (const MechanismValue& v : values.subspan(1)) {
    if (v.value != best->value) {
      if (v.value > best->value) best = &v;
    } else if (v.human_input != best->human_input) {
      if (v.human_input < best->human_input) best = &v;
    } else if (v.mechanism < best->mechanism) {
      best = &v;
    }
  }
  return best->mechanism;
}

Hysteresis::Hysteresis(int teleop_consecutive, int chunk_steps)
    : teleop_consecutive_(teleop_consecutive), chunk_steps_(chunk_steps) {
  if (teleop_consecutive < 1 || chunk_steps < 1) {
    throw std::invalid_argument("hysteresis parameters must be >= 1");
  }
}

ArbiterDecision Hysteresis::Apply(const MechanismId& candidate) {
  MechanismId effective = candidate;
  if (candidate.kind == MechanismKind::kTeleop) {
    ++state_.teleop_streak;
    if (state_.current.kind != MechanismKind::kTeleop &&
        state_.teleop_streak < teleop_consecutive_) {
      effective = state_.current;
    }
  } else {
    state_.teleop_streak = 0;
  }

  bool fresh = true;
  if (!state_.started || effective != state_.current) {
    state_.current = effective;
    state_.chunk_offset = 0;
    state_.chunk_remaining = chunk_steps_ - 1;
    state_.started = true;
  } else if (state_.chunk_remaining > 0) {
    --state_.chunk_remaining;
    ++state_.chunk_offset;
    fresh = false;
  } else {
    state_.chunk_offset = 0;
    state_.chunk_remaining = chunk_steps_ - 1;
  }

  ArbiterDecision decision;
  decision.selected = state_.current;
  decision.candidate = candidate;
  decision.state = state_;
  decision.new_forecast = fresh;
  return decision;
}

void Hysteresis::Reset(const MechanismId& mechanism) {
  state_.current = mechanism;
  state_.teleop_streak = 0;
  state_.chunk_offset = 0;
  state_.chunk_remaining = chunk_steps_ - 1;
  state_.started = true;
}

Assessment Assess(const RolloutTensor& rollouts, const ArbiterConfig& config,
                  std::uint64_t seed) {
  if (rollouts.horizon() != config.horizon) {
    throw std::invalid_argument("rollout horizon does not match config");
  }
  if (rollouts.action_dims() != config.action_dims()) {
    throw std::invalid_argument("rollout dimension does not match config");
  }
  Assessment assessment;
  assessment.estimates.reserve(config.mechanisms.size());
  assessment.values.reserve(config.mechanisms.size());
  EstimatorOptions options = config.estimator;
  options.beta = config.beta;
  for (std::size_t i = 0; i < config.mechanisms.size(); ++i) {
    options.seed = MixSeed(seed, i);
    assessment.estimates.push_back(
        Estimate(config.mechanisms[i], rollouts, options));
    assessment.values.push_back(
        ComputeMechanismValue(assessment.estimates.back(), config));
  }
  assessment.best = SelectMechanism(assessment.values);
  return assessment;
}

nlohmann::json ToJson(const ArbiterConfig& config) {
  nlohmann::json mechanisms = nlohmann::json::array();
  nlohmann::json lambda = nlohmann::json::object();
  for (const MechanismId& m : config.mechanisms) {
    mechanisms.push_back(m.Name());
    if (auto it = config.lambda.find(m); it != config.lambda.end()) {
      lambda[m.Name()] = it->second;
    }
  }
  nlohmann::json arbiter = {
      {"mechanisms", mechanisms},
      {"lambda", lambda},
      {"beta", config.beta},
      {"horizon", config.horizon},
      {"teleop_consecutive", config.teleop_consecutive},
      {"chunk_steps", config.chunk_steps},
      {"estimator",
       {{"spacing", config.estimator.spacing},
        {"kmeans_restarts", config.estimator.kmeans_restarts},
        {"kmeans_max_iterations", config.estimator.kmeans_max_iterations},
        {"n_synth", config.estimator.n_synth}}}};
  if (!config.ranges.empty()) {
    nlohmann::json ranges = nlohmann::json::array();
    for (const ActionRange& r : config.ranges.ranges()) ranges.push_back({r.min, r.max});
    arbiter["ranges"] = ranges;
  }
  return {{"arbiter", arbiter}};
}

ArbiterConfig ArbiterConfigFromJson(const nlohmann::json& json) {
  ArbiterConfig config = UncerpentineArbiterConfig();
  try {
    const nlohmann::json& a = json.at("arbiter");
    if (a.contains("mechanisms")) {
      config.mechanisms.clear();
      for (const auto& name : a.at("mechanisms")) {
        config.mechanisms.push_back(MechanismId::Parse(name.get<std::string>()));
      }
    }
    if (a.contains("lambda")) {
      config.lambda.clear();
      for (const auto& [name, value] : a.at("lambda").items()) {
        config.lambda[MechanismId::Parse(name)] = value.get<double>();
      }
    }
    config.beta = a.value("beta", config.beta);
    config.horizon = a.value("horizon", config.horizon);
    config.teleop_consecutive =
        a.value("teleop_consecutive", config.teleop_consecutive);
    config.chunk_steps = a.value("chunk_steps", config.chunk_steps);
    if (a.contains("ranges")) {
      std::vector<ActionRange> ranges;
      for (const auto& r : a.at("ranges")) {
        if (!r.is_array() || r.size() != 2) {
          throw std::invalid_argument("range must be [min, max]");
        }
        ranges.push_back({r[0].get<double>(), r[1].get<double>()});
      }
      config.ranges = ActionRanges(std::move(ranges));
    }
    if (a.contains("estimator")) {
      const nlohmann::json& e = a.at("estimator");
      EstimatorOptions& o = config.estimator;
      o.spacing = e.value("spacing", o.spacing);
      o.kmeans_restarts = e.value("kmeans_restarts", o.kmeans_restarts);
      o.kmeans_max_iterations =
          e.value("kmeans_max_iterations", o.kmeans_max_iterations);
      o.n_synth = e.value("n_synth", o.n_synth);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed arbiter config: ") +
                                e.what());
  }
  config.estimator.beta = config.beta;
  return config;
}

ArbiterConfig LoadArbiterConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open arbiter config " + path);
  nlohmann::json json;
  try {
    in >> json;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed arbiter config " + path + ": " +
                                e.what());
  }
  return ArbiterConfigFromJson(json);
}

}  // namespace realm

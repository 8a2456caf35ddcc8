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

#include "realm/session.h"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "realm/evaluation.h"
#include "realm/random.h"

namespace realm {

namespace {

constexpr std::uint64_t kAssessStream = 0x617373;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

Eigen::VectorXd ParseVector(const nlohmann::json& json, const char* what) {
  std::vector<double> values;
  if (json.is_number()) {
    values.push_back(json.get<double>());
  } else if (json.is_array()) {
    for (const auto& v : json) {
      if (!v.is_number()) throw BadInput(std::string(what) + " must be numeric");
      values.push_back(v.get<double>());
    }
  } else {
    throw BadInput(std::string(what) + " must be a number or a list");
  }
  if (values.empty()) throw BadInput(std::string(what) + " must not be empty");
  Eigen::VectorXd out = Eigen::Map<const Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size()));
  if (!out.allFinite()) throw BadInput(std::string(what) + " must be finite");
  return out;
}

std::vector<double> ToList(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

nlohmann::json ToJson(const SamplerSettings& s) {
  return {{"rollouts", s.rollouts},       {"horizon", s.horizon},
          {"p_collapse", s.p_collapse},   {"pull_steps", s.pull_steps},
          {"noise_sigma", s.noise_sigma}, {"amplitude_jitter", s.amplitude_jitter}};
}

SamplerSettings SamplerSettingsFromJson(const nlohmann::json& j) {
  SamplerSettings s;
  s.rollouts = j.value("rollouts", s.rollouts);
  s.horizon = j.value("horizon", s.horizon);
  s.p_collapse = j.value("p_collapse", s.p_collapse);
  s.pull_steps = j.value("pull_steps", s.pull_steps);
  s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
  s.amplitude_jitter = j.value("amplitude_jitter", s.amplitude_jitter);
  return s;
}

ArbiterConfig Prepared(ArbiterConfig config, const Environment& env,
                       const SessionSettings& settings) {
  if (config.ranges.empty()) {
    SamplerSettings sampler = settings.sampler;
    sampler.horizon = config.horizon;
    config.ranges =
        DeriveRanges(GroundTruthSampler(env, sampler), settings.training_trajectories);
  }
  const ConfigReport report = ValidateConfig(config);
  if (!report.ok()) {
    throw std::invalid_argument("invalid arbiter config: " + report.Describe());
  }
  if (config.action_dims() != 2) {
    throw std::invalid_argument("sessions run in the 2D benchmark");
  }
  if (config.chunk_steps > config.horizon) {
    throw std::invalid_argument("chunk_steps must not exceed the horizon");
  }
  return config;
}

SamplerSettings WithHorizon(SamplerSettings settings, int horizon) {
  settings.horizon = horizon;
  return settings;
}

}  // namespace

nlohmann::json ToJson(const SessionSettings& s) {
  return {{"seed", s.seed},
          {"sampler", ToJson(s.sampler)},
          {"training_trajectories", s.training_trajectories},
          {"max_cycles", s.max_cycles},
          {"teleop_max_step", s.teleop_max_step},
          {"correction_limit", s.correction_limit},
          {"preview_rollouts", s.preview_rollouts},
          {"weights",
           {{"no_assist", s.weights.no_assist},
            {"correction_per_dim", s.weights.correction_per_dim},
            {"teleop", s.weights.teleop}}}};
}

SessionSettings SessionSettingsFromJson(const nlohmann::json& j) {
  SessionSettings s;
  try {
    s.seed = j.value("seed", s.seed);
    if (j.contains("sampler")) s.sampler = SamplerSettingsFromJson(j.at("sampler"));
    s.training_trajectories =
        j.value("training_trajectories", s.training_trajectories);
    s.max_cycles = j.value("max_cycles", s.max_cycles);
    s.teleop_max_step = j.value("teleop_max_step", s.teleop_max_step);
    s.correction_limit = j.value("correction_limit", s.correction_limit);
    s.preview_rollouts = j.value("preview_rollouts", s.preview_rollouts);
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      s.weights.no_assist = w.value("no_assist", s.weights.no_assist);
      s.weights.correction_per_dim =
          w.value("correction_per_dim", s.weights.correction_per_dim);
      s.weights.teleop = w.value("teleop", s.weights.teleop);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed session settings: ") +
                                e.what());
  }
  return s;
}

HumanInput ParseHumanInput(const nlohmann::json& json) {
  if (!json.is_object() || !json.contains("kind") || !json.at("kind").is_string()) {
    throw BadInput("input needs a string 'kind'");
  }
  const std::string kind = json.at("kind").get<std::string>();
  const nlohmann::json payload = json.value("payload", nlohmann::json());
  if (kind == "discrete") {
    const nlohmann::json& index =
        payload.is_object() && payload.contains("index") ? payload.at("index")
                                                         : payload;
    if (!index.is_number_integer()) {
      throw BadInput("discrete payload must be an integer index");
    }
    return DiscreteChoice{index.get<int>()};
  }
  if (kind == "correction") {
    return CorrectionDelta{ParseVector(payload, "correction payload")};
  }
  if (kind == "teleop") {
    if (!payload.is_array()) throw BadInput("teleop payload must be a position");
    return TeleopAction{ParseVector(payload, "teleop payload")};
  }
  if (kind == "handback") return Handback{};
  throw BadInput("unknown input kind '" + kind + "'");
}

nlohmann::json ToJson(const HumanInput& input) {
  return std::visit(
      Overloaded{
          [](const DiscreteChoice& c) -> nlohmann::json {
            return {{"kind", "discrete"}, {"payload", c.index}};
          },
          [](const CorrectionDelta& c) -> nlohmann::json {
            return {{"kind", "correction"}, {"payload", ToList(c.delta)}};
          },
          [](const TeleopAction& a) -> nlohmann::json {
            return {{"kind", "teleop"}, {"payload", ToList(a.target)}};
          },
          [](const Handback&) -> nlohmann::json { return {{"kind", "handback"}}; },
      },
      input);
}

std::string_view InputKind(const HumanInput& input) {
  static constexpr std::string_view kNames[] = {"discrete", "correction",
                                                "teleop", "handback"};
  return kNames[input.index()];
}

std::string_view Banner(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kNoAssist:
      return "white";
    case MechanismKind::kTeleop:
      return "green";
    case MechanismKind::kCorrections:
      return "yellow";
    case MechanismKind::kDiscrete:
      return "red";
  }
  return "white";
}

nlohmann::json ToJson(const Frame& frame) {
  nlohmann::json values = nlohmann::json::object();
  for (const MechanismValue& v : frame.values) values[v.mechanism.Name()] = v.value;
  nlohmann::json rollouts = nlohmann::json::array();
  for (const Eigen::MatrixXd& r : frame.rollouts) {
    nlohmann::json line = nlohmann::json::array();
    for (Eigen::Index k = 0; k < r.cols(); ++k) {
      line.push_back(ToList(r.col(k)));
    }
    rollouts.push_back(std::move(line));
  }
  nlohmann::json prompt = {{"kind", frame.prompt.kind}};
  if (frame.prompt.kind == "discrete") prompt["n_choices"] = frame.prompt.n_choices;
  if (frame.prompt.kind == "correction" && frame.prompt.axes.rows() > 0) {
    prompt["axis"] = ToList(frame.prompt.axes.row(0).transpose());
    nlohmann::json axes = nlohmann::json::array();
    for (Eigen::Index i = 0; i < frame.prompt.axes.rows(); ++i) {
      axes.push_back(ToList(frame.prompt.axes.row(i).transpose()));
    }
    prompt["axes"] = std::move(axes);
  }
  return {{"type", "frame"},
          {"cycle", frame.cycle},
          {"t", frame.t},
          {"pos", {frame.position.x(), frame.position.y()}},
          {"mode", frame.mode.Name()},
          {"candidate", frame.candidate.Name()},
          {"banner", Banner(frame.mode.kind)},
          {"values", std::move(values)},
          {"rollouts", std::move(rollouts)},
          {"prompt", std::move(prompt)},
          {"committed", frame.committed},
          {"input_metric", frame.input_metric},
          {"estimation_ms", frame.estimation_seconds * 1e3},
          {"done", frame.done}};
}

Session::Session(Environment env, ArbiterConfig config, SessionSettings settings,
                 std::optional<std::string> log_path)
    : settings_(settings),
      config_(Prepared(std::move(config), env, settings)),
      sampler_(std::move(env), WithHorizon(settings.sampler, config_.horizon)),
      hysteresis_(config_.teleop_consecutive, config_.chunk_steps) {
  if (settings_.max_cycles < 1 || !(settings_.teleop_max_step > 0.0) ||
      !(settings_.correction_limit > 0.0) || settings_.preview_rollouts < 0) {
    throw std::invalid_argument("invalid session settings");
  }
  position_ = Backbone(sampler_.environment()).Position(0);
  log_.header = {{"version", 1},
                 {"seed", settings_.seed},
                 {"environment", ToJson(sampler_.environment())},
                 {"config", ToJson(config_)},
                 {"settings", ToJson(settings_)}};
  if (log_path) {
    writer_ = std::make_unique<SessionLogWriter>(*log_path);
    writer_->WriteHeader(log_.header);
  }
}

std::optional<std::string> Session::log_path() const {
  if (!writer_) return std::nullopt;
  return writer_->path();
}

std::optional<Rejection> Session::Validate(const HumanInput& input) const {
  auto mismatch = [&]() {
    return Rejection{"mode_mismatch", std::string(InputKind(input)) +
                                          " input while mode is " + mode_.Name()};
  };
  const bool teleop = mode_.kind == MechanismKind::kTeleop;
  if (const auto* c = std::get_if<DiscreteChoice>(&input)) {
    if (!awaiting_choice_) return mismatch();
    const int n = static_cast<int>(pending_clusters_->means.size());
    if (c->index < 0 || c->index >= n) {
      return Rejection{"bad_input", "discrete index " + std::to_string(c->index) +
                                        " outside [0, " + std::to_string(n) + ")"};
    }
  } else if (const auto* d = std::get_if<CorrectionDelta>(&input)) {
    if (mode_.kind != MechanismKind::kCorrections) return mismatch();
    if (d->delta.size() != mode_.arity || !d->delta.allFinite()) {
      return Rejection{"bad_input", "correction needs " +
                                        std::to_string(mode_.arity) +
                                        " finite values"};
    }
  } else if (const auto* a = std::get_if<TeleopAction>(&input)) {
    if (!teleop) return mismatch();
    if (a->target.size() != config_.action_dims() || !a->target.allFinite()) {
      return Rejection{"bad_input", "teleop target needs " +
                                        std::to_string(config_.action_dims()) +
                                        " finite values"};
    }
    for (int i = 0; i < config_.action_dims(); ++i) {
      if (a->target[i] < config_.ranges[i].min ||
          a->target[i] > config_.ranges[i].max) {
        return Rejection{"bad_input", "teleop target outside the action range"};
      }
    }
  } else if (!teleop) {
    return mismatch();
  }
  return std::nullopt;
}

void Session::Record(const std::optional<HumanInput>& input, bool accepted,
                     bool decision) {
  SessionRecord record;
  record.cycle = cycle_;
  record.t = t_;
  record.mode = mode_;
  if (input) record.input = ToJson(*input);
  record.accepted = accepted;
  record.discrete_decision = decision;
  record.position = position_;
  if (writer_) writer_->WriteRecord(record);
  log_.records.push_back(std::move(record));
}

StepResult Session::Step(const std::optional<HumanInput>& input) {
  if (done_) throw std::logic_error("session finished");
  if (input) {
    if (std::optional<Rejection> rejection = Validate(*input)) {
      Record(input, false, false);
      return {std::nullopt, std::move(rejection)};
    }
  }
  bool decision = false;
  Frame frame = Advance(input, &decision);
  Record(input, true, decision);
  ++cycle_;
  const int test_horizon = sampler_.environment().test_horizon();
  if (t_ >= test_horizon || cycle_ >= settings_.max_cycles) done_ = true;
  frame.done = done_;
  frame.input_metric = input_metric();
  last_frame_ = frame;
  return {std::move(frame), std::nullopt};
}

Eigen::MatrixXd Session::ApplyDiscreteChoice(int index) {
  if (!awaiting_choice_) throw std::logic_error("no discrete prompt pending");
  const int n = static_cast<int>(pending_clusters_->means.size());
  if (index < 0 || index >= n) {
    throw std::out_of_range("discrete index " + std::to_string(index) +
                            " outside [0, " + std::to_string(n) + ")");
  }
  Step(DiscreteChoice{index});
  return committed_;
}

Frame Session::MakeFrame(const RolloutTensor* preview) const {
  Frame frame;
  frame.cycle = cycle_;
  frame.t = t_;
  frame.position = position_;
  frame.mode = mode_;
  frame.candidate = candidate_;
  frame.values = values_;
  frame.estimation_seconds = estimation_seconds_;
  frame.committed = committed_step_ >= 0;
  if (preview != nullptr && settings_.preview_rollouts > 0) {
    const int n = preview->rollouts();
    const int shown = std::min(n, settings_.preview_rollouts);
    for (int i = 0; i < shown; ++i) {
      frame.rollouts.push_back(preview->Rollout(i * n / shown));
    }
  }
  if (awaiting_choice_) {
    frame.prompt.kind = "discrete";
    frame.prompt.n_choices = static_cast<int>(pending_clusters_->means.size());
  } else if (mode_.kind == MechanismKind::kCorrections) {
    frame.prompt.kind = "correction";
    frame.prompt.axes = correction_axes_;
  } else if (mode_.kind == MechanismKind::kTeleop) {
    frame.prompt.kind = "teleop";
  }
  return frame;
}

Frame Session::Advance(const std::optional<HumanInput>& input, bool* decision) {
  if (awaiting_choice_) {
    const auto* choice = input ? std::get_if<DiscreteChoice>(&*input) : nullptr;
    if (choice == nullptr) return MakeFrame(forecast_ ? &*forecast_ : nullptr);
    committed_ = pending_clusters_->means[choice->index];
    committed_step_ = 0;
    awaiting_choice_ = false;
    pending_clusters_.reset();
    *decision = true;
  }
  if (committed_step_ >= 0) {
    // Execute the chosen path for the full horizon before re-arbitrating.
    position_ = committed_.col(committed_step_);
    ++t_;
    Frame frame = MakeFrame(forecast_ ? &*forecast_ : nullptr);
    if (++committed_step_ >= committed_.cols()) {
      committed_step_ = -1;
      hysteresis_.Reset(MechanismId::NoAssist());
      force_fresh_ = true;
    }
    return frame;
  }

  const std::uint64_t cycle_seed = MixSeed(settings_.seed, cycle_);
  RolloutTensor rollouts = sampler_.SampleRollouts({position_, t_}, cycle_seed);
  const auto start = std::chrono::steady_clock::now();
  Assessment assessment =
      Assess(rollouts, config_, MixSeed(cycle_seed, kAssessStream));
  estimation_seconds_ =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  candidate_ = assessment.best;
  values_ = assessment.values;

  MechanismId next = mode_;
  bool fresh = force_fresh_;
  if (mode_.kind == MechanismKind::kTeleop) {
    // Teleoperation is handed back only on request, and only when the robot
    // no longer wants it.
    const bool handback = input && std::holds_alternative<Handback>(*input);
    if (handback && candidate_.kind != MechanismKind::kTeleop) {
      hysteresis_.Reset(candidate_);
      next = candidate_;
      fresh = true;
    }
  } else {
    const ArbiterDecision d = hysteresis_.Apply(candidate_);
    next = d.selected;
    fresh = fresh || d.new_forecast;
  }
  force_fresh_ = false;

  auto estimate_of = [&assessment](const MechanismId& m) -> MechanismEstimate& {
    for (MechanismEstimate& e : assessment.estimates) {
      if (e.mechanism == m) return e;
    }
    throw std::logic_error("no estimate for " + m.Name());
  };
  if (next != mode_ || fresh) {
    if (next.kind == MechanismKind::kCorrections && next != mode_) {
      // The axes stay fixed for the whole corrective episode.
      correction_axes_ = estimate_of(next).corrections->directions.front();
    }
    if (next.kind == MechanismKind::kCorrections) {
      correction_offset_ = Eigen::VectorXd::Zero(next.arity);
    }
  }
  if (fresh || next != mode_) {
    forecast_ = rollouts;
    plan_ = rollouts.Rollout(0);
    chunk_step_ = 0;
  } else {
    chunk_step_ = std::min<int>(chunk_step_ + 1, static_cast<int>(plan_.cols()) - 1);
  }
  mode_ = next;

  switch (mode_.kind) {
    case MechanismKind::kNoAssist:
      position_ = plan_.col(chunk_step_);
      ++t_;
      break;
    case MechanismKind::kCorrections: {
      if (const auto* d = input ? std::get_if<CorrectionDelta>(&*input) : nullptr) {
        correction_offset_ = (correction_offset_ + d->delta)
                                 .cwiseMax(-settings_.correction_limit)
                                 .cwiseMin(settings_.correction_limit);
      }
      position_ = plan_.col(chunk_step_) +
                  correction_axes_.transpose() * correction_offset_;
      ++t_;
      break;
    }
    case MechanismKind::kTeleop: {
      if (const auto* a = input ? std::get_if<TeleopAction>(&*input) : nullptr) {
        Eigen::Vector2d move = a->target - position_;
        const double length = move.norm();
        if (length > settings_.teleop_max_step) {
          move *= settings_.teleop_max_step / length;
        }
        position_ += move;
      }
      ++t_;
      break;
    }
    case MechanismKind::kDiscrete:
      // Pause in place until the operator picks a cluster.
      pending_clusters_ = std::move(estimate_of(mode_).clusters);
      awaiting_choice_ = true;
      break;
  }
  return MakeFrame(&rollouts);
}

nlohmann::json Session::Finish(bool interrupted) {
  if (log_.summary) return *log_.summary;
  nlohmann::json steps = nlohmann::json::object();
  for (MechanismKind kind : {MechanismKind::kNoAssist, MechanismKind::kDiscrete,
                             MechanismKind::kCorrections, MechanismKind::kTeleop}) {
    steps[std::string(ToString(kind))] = log_.Steps(kind);
  }
  nlohmann::json summary = {{"type", "summary"},
                            {"cycles", cycle_},
                            {"t", t_},
                            {"steps", steps},
                            {"discrete_decisions", log_.DiscreteDecisions()},
                            {"input_metric", input_metric()},
                            {"done", done_},
                            {"interrupted", interrupted}};
  if (writer_) writer_->WriteSummary(summary);
  log_.summary = summary;
  return summary;
}

ReplayResult ReplaySession(const SessionLog& log) {
  const nlohmann::json& header = log.header;
  Session session(EnvironmentFromJson(header.at("environment")),
                  ArbiterConfigFromJson(header.at("config")),
                  SessionSettingsFromJson(header.at("settings")));
  ReplayResult result;
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const SessionRecord& logged = log.records[i];
    std::optional<HumanInput> input;
    if (logged.input) input = ParseHumanInput(*logged.input);
    if (session.done()) {
      result.first_mismatch = static_cast<int>(i);
      break;
    }
    session.Step(input);
    const SessionRecord& now = session.log().records.back();
    const bool same = now.cycle == logged.cycle && now.t == logged.t &&
                      now.mode == logged.mode && now.accepted == logged.accepted &&
                      now.discrete_decision == logged.discrete_decision &&
                      now.position.size() == logged.position.size() &&
                      (now.position.array() == logged.position.array()).all();
    if (!same && result.first_mismatch < 0) {
      result.first_mismatch = static_cast<int>(i);
    }
  }
  result.replayed = session.log();
  result.identical = result.first_mismatch < 0 &&
                     result.replayed.records.size() == log.records.size();
  return result;
}

}  // namespace realm

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

#ifndef REALM_SESSION_H_
#define REALM_SESSION_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "realm/arbiter.h"
#include "realm/environment.h"
#include "realm/sampler.h"
#include "realm/session_log.h"

namespace realm {

struct SessionSettings {
  std::uint64_t seed = 0;
  SamplerSettings sampler;  // horizon follows the arbiter config
  // Demonstrations used to derive action ranges when the config has none.
  int training_trajectories = 900;
  int max_cycles = 5000;
  double teleop_max_step = 0.02;   // rate limit on teleop targets
  double correction_limit = 0.15;  // clamp on the per-chunk correction offset
  int preview_rollouts = 20;
  InputWeights weights;
};

nlohmann::json ToJson(const SessionSettings& settings);
SessionSettings SessionSettingsFromJson(const nlohmann::json& json);

struct DiscreteChoice {
  int index = 0;
};
// One scalar per controlled dimension, along the cached correction axes.
struct CorrectionDelta {
  Eigen::VectorXd delta;
};
// Absolute target position.
struct TeleopAction {
  Eigen::VectorXd target;
};
struct Handback {};

using HumanInput =
    std::variant<DiscreteChoice, CorrectionDelta, TeleopAction, Handback>;

// Thrown for inputs that cannot be understood or violate their invariants.
class BadInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Wire form: {"kind": "discrete"|"correction"|"teleop"|"handback",
// "payload": ...}. Discrete payloads are an index, corrections a number or a
// list of numbers, teleop a position list; handback takes none.
HumanInput ParseHumanInput(const nlohmann::json& json);
nlohmann::json ToJson(const HumanInput& input);
std::string_view InputKind(const HumanInput& input);

// white: robot autonomous, green: teleoperation, yellow: corrections,
// red: discrete choice.
std::string_view Banner(MechanismKind kind);

struct Prompt {
  std::string kind = "none";  // none | discrete | correction | teleop
  int n_choices = 0;
  Eigen::MatrixXd axes;  // correction axes, one per row
};

struct Frame {
  int cycle = 0;
  int t = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  MechanismId mode;
  MechanismId candidate;
  std::vector<MechanismValue> values;
  std::vector<Eigen::MatrixXd> rollouts;  // preview, n_a x T_r each
  Prompt prompt;
  bool done = false;
  bool committed = false;  // executing a chosen discrete path
  double input_metric = 0.0;
  double estimation_seconds = 0.0;
};

nlohmann::json ToJson(const Frame& frame);

struct Rejection {
  std::string code;  // bad_input | mode_mismatch
  std::string message;
};

struct StepResult {
  std::optional<Frame> frame;
  std::optional<Rejection> rejection;

  bool ok() const { return frame.has_value(); }
};

// The live loop. Each accepted Step is one control cycle: sample a forecast,
// arbitrate, apply the human input for the active mode, and log the cycle.
// Inputs that do not match the active mode are rejected without touching the
// state. Single-threaded; the owner serializes calls.
class Session {
 public:
  Session(Environment env, ArbiterConfig config, SessionSettings settings,
          std::optional<std::string> log_path = std::nullopt);
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  StepResult Step(const std::optional<HumanInput>& input = std::nullopt);

  // Commits to cluster `index` of the pending discrete prompt and executes
  // its first action; returns the committed path (n_a x T_r). Throws
  // std::logic_error without a pending prompt, std::out_of_range for a bad
  // index.
  Eigen::MatrixXd ApplyDiscreteChoice(int index);

  // Writes the summary line (once) and returns it.
  nlohmann::json Finish(bool interrupted = false);

  bool done() const { return done_; }
  bool awaiting_choice() const { return awaiting_choice_; }
  int t() const { return t_; }
  int cycle() const { return cycle_; }
  const Eigen::Vector2d& position() const { return position_; }
  const MechanismId& mode() const { return mode_; }
  const ArbiterConfig& config() const { return config_; }
  const Environment& environment() const { return sampler_.environment(); }
  const SessionLog& log() const { return log_; }
  const std::optional<Frame>& last_frame() const { return last_frame_; }
  std::optional<std::string> log_path() const;
  double input_metric() const { return InputMetric(log_, settings_.weights); }

 private:
  std::optional<Rejection> Validate(const HumanInput& input) const;
  Frame Advance(const std::optional<HumanInput>& input, bool* decision);
  Frame MakeFrame(const RolloutTensor* preview) const;
  void Record(const std::optional<HumanInput>& input, bool accepted,
              bool decision);

  SessionSettings settings_;
  ArbiterConfig config_;
  GroundTruthSampler sampler_;
  Hysteresis hysteresis_;
  SessionLog log_;
  std::unique_ptr<SessionLogWriter> writer_;

  Eigen::Vector2d position_;
  int t_ = 0;
  int cycle_ = 0;
  bool done_ = false;
  MechanismId mode_ = MechanismId::NoAssist();
  MechanismId candidate_ = MechanismId::NoAssist();
  std::vector<MechanismValue> values_;
  double estimation_seconds_ = 0.0;

  // Current chunk: the forecast being executed and the step within it.
  Eigen::MatrixXd plan_;
  int chunk_step_ = 0;
  bool force_fresh_ = true;
  std::optional<RolloutTensor> forecast_;

  Eigen::MatrixXd correction_axes_;  // cached at corrections entry
  Eigen::VectorXd correction_offset_;

  bool awaiting_choice_ = false;
  std::optional<ClusterMetadata> pending_clusters_;
  Eigen::MatrixXd committed_;  // chosen cluster mean
  int committed_step_ = -1;    // -1: not executing a choice

  std::optional<Frame> last_frame_;
};

struct ReplayResult {
  SessionLog replayed;
  bool identical = false;
  int first_mismatch = -1;  // record index, -1 when identical
};

// Rebuilds the session from the log header and feeds it the logged inputs.
ReplayResult ReplaySession(const SessionLog& log);

}  // namespace realm

#endif  // REALM_SESSION_H_

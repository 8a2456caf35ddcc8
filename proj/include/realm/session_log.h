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

#ifndef REALM_SESSION_LOG_H_
#define REALM_SESSION_LOG_H_

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "realm/mechanisms.h"

namespace realm {

// One cycle of a live session. Rejected inputs are logged too (they leave the
// session state unchanged) so that a replay sees exactly what the operator
// sent.
struct SessionRecord {
  int cycle = 0;
  int t = 0;
  MechanismId mode;
  std::optional<nlohmann::json> input;  // wire form of the human input
  bool accepted = true;
  bool discrete_decision = false;
  Eigen::VectorXd position;
};

struct SessionLog {
  nlohmann::json header = nlohmann::json::object();
  std::vector<SessionRecord> records;
  std::optional<nlohmann::json> summary;

  int DiscreteDecisions() const;
  // Accepted cycles spent in `kind` (any arity).
  int Steps(MechanismKind kind) const;
};

// Per-mode weights of the input metric. Corrections are weighted per
// controlled dimension; discrete pauses cost nothing beyond the decision
// itself.
struct InputWeights {
  double no_assist = 0.0;
  double correction_per_dim = 1.0;
  double teleop = 2.0;  // n_a for the 2D benchmark
};

// Weighting of the 5-DOF manipulation task (3 Cartesian, yaw, gripper).
InputWeights ManipulationInputWeights();

// Control-timesteps of human input: sum of mode weights over accepted cycles
// plus the number of discrete decisions.
double InputMetric(const SessionLog& log, const InputWeights& weights = {});

nlohmann::json ToJson(const SessionRecord& record);
// Throws std::invalid_argument on malformed records or unknown modes.
SessionRecord SessionRecordFromJson(const nlohmann::json& json);

// Line-delimited log: a header line, one line per record, an optional
// summary line.
SessionLog ParseSessionLog(std::istream& in);
SessionLog LoadSessionLog(const std::string& path);

// Appends log lines to a file as they happen, flushing each line.
class SessionLogWriter {
 public:
  explicit SessionLogWriter(const std::string& path);

  void WriteHeader(const nlohmann::json& header);
  void WriteRecord(const SessionRecord& record);
  void WriteSummary(const nlohmann::json& summary);
  const std::string& path() const { return path_; }

 private:
  void WriteLine(const nlohmann::json& line);

  std::string path_;
  std::ofstream out_;
};

// session-<UTC timestamp>-<seed>.log
std::string SessionLogFileName(std::uint64_t seed);

}  // namespace realm

#endif  // REALM_SESSION_LOG_H_

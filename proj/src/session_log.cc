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

#include "realm/session_log.h"

#include <chrono>
#include <ctime>
#include <stdexcept>

namespace realm {

int SessionLog::DiscreteDecisions() const {
  int count = 0;
  for (const SessionRecord& r : records) count += r.discrete_decision ? 1 : 0;
  return count;
}

int SessionLog::Steps(MechanismKind kind) const {
  int count = 0;
  for (const SessionRecord& r : records) {
    if (r.accepted && r.mode.kind == kind) ++count;
  }
  return count;
}

InputWeights ManipulationInputWeights() {
  InputWeights weights;
  weights.teleop = 5.0;
  return weights;
}

double InputMetric(const SessionLog& log, const InputWeights& weights) {
  double total = 0.0;
  for (const SessionRecord& r : log.records) {
    if (!r.accepted) continue;
    switch (r.mode.kind) {
      case MechanismKind::kNoAssist:
        total += weights.no_assist;
        break;
      case MechanismKind::kCorrections:
        total += weights.correction_per_dim * r.mode.arity;
        break;
      case MechanismKind::kTeleop:
        total += weights.teleop;
        break;
      case MechanismKind::kDiscrete:
        break;
    }
    if (r.discrete_decision) total += 1.0;
  }
  return total;
}

nlohmann::json ToJson(const SessionRecord& record) {
  nlohmann::json json = {
      {"type", "step"},
      {"cycle", record.cycle},
      {"t", record.t},
      {"mode", record.mode.Name()},
      {"accepted", record.accepted},
      {"discrete_decision", record.discrete_decision},
      {"pos", std::vector<double>(record.position.data(),
                                  record.position.data() + record.position.size())},
  };
  json["input"] = record.input.value_or(nullptr);
  return json;
}

SessionRecord SessionRecordFromJson(const nlohmann::json& json) {
  try {
    SessionRecord record;
    record.cycle = json.at("cycle").get<int>();
    record.t = json.at("t").get<int>();
    record.mode = MechanismId::Parse(json.at("mode").get<std::string>());
    record.accepted = json.at("accepted").get<bool>();
    record.discrete_decision = json.at("discrete_decision").get<bool>();
    const auto pos = json.at("pos").get<std::vector<double>>();
    record.position = Eigen::Map<const Eigen::VectorXd>(
        pos.data(), static_cast<Eigen::Index>(pos.size()));
    if (json.contains("input") && !json.at("input").is_null()) {
      record.input = json.at("input");
    }
    return record;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed session record: ") +
                                e.what());
  }
}

SessionLog ParseSessionLog(std::istream& in) {
  SessionLog log;
  std::string line;
  int number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    nlohmann::json json;
    try {
      json = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("session log line " + std::to_string(number) +
                                  ": " + e.what());
    }
    const std::string type = json.value("type", "");
    if (type == "header") {
      log.header = json;
      have_header = true;
    } else if (type == "step") {
      log.records.push_back(SessionRecordFromJson(json));
    } else if (type == "summary") {
      log.summary = json;
    } else {
      throw std::invalid_argument("session log line " + std::to_string(number) +
                                  ": unknown record type '" + type + "'");
    }
  }
  if (!have_header) throw std::invalid_argument("session log has no header");
  return log;
}

SessionLog LoadSessionLog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open session log " + path);
  return ParseSessionLog(in);
}

SessionLogWriter::SessionLogWriter(const std::string& path)
    : path_(path), out_(path, std::ios::out | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot write session log " + path);
}

void SessionLogWriter::WriteLine(const nlohmann::json& line) {
  out_ << line.dump() << '\n';
  out_.flush();
}

void SessionLogWriter::WriteHeader(const nlohmann::json& header) {
  nlohmann::json line = header;
  line["type"] = "header";
  WriteLine(line);
}

void SessionLogWriter::WriteRecord(const SessionRecord& record) {
  WriteLine(ToJson(record));
}

void SessionLogWriter::WriteSummary(const nlohmann::json& summary) {
  nlohmann::json line = summary;
  line["type"] = "summary";
  WriteLine(line);
}

std::string SessionLogFileName(std::uint64_t seed) {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%SZ", &utc);
  return "session-" + std::string(stamp) + "-" + std::to_string(seed) + ".log";
}

}  // namespace realm

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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "realm/random.h"

namespace realm {

namespace {

constexpr std::uint64_t kAssessStream = 0x617373;  // "ass"

const char* const kRowNames[] = {"none", "corrections", "teleoperation"};
const char* const kColumnNames[] = {"no_assist", "corrections", "teleop",
                                    "discrete"};

}  // namespace

int ConfusionMatrix::Row(GroundTruthLabel label) {
  switch (label) {
    case GroundTruthLabel::kNone:
      return 0;
    case GroundTruthLabel::kCorrections:
      return 1;
    case GroundTruthLabel::kTeleoperation:
      return 2;
    case GroundTruthLabel::kDiscrete:
      return -1;
  }
  return -1;
}

int ConfusionMatrix::Column(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kNoAssist:
      return 0;
    case MechanismKind::kCorrections:
      return 1;
    case MechanismKind::kTeleop:
      return 2;
    case MechanismKind::kDiscrete:
      return 3;
  }
  return 0;
}

void ConfusionMatrix::Add(GroundTruthLabel actual, MechanismKind estimated) {
  const int row = Row(actual);
  if (row < 0) {
    throw std::invalid_argument("discrete labels are scored separately");
  }
  ++counts_[row][Column(estimated)];
}

void ConfusionMatrix::Merge(const ConfusionMatrix& other) {
  for (int r = 0; r < kRows; ++r) {
    for (int c = 0; c < kCols; ++c) counts_[r][c] += other.counts_[r][c];
  }
}

long ConfusionMatrix::RowTotal(int row) const {
  long total = 0;
  for (long v : counts_[row]) total += v;
  return total;
}

long ConfusionMatrix::Total() const {
  long total = 0;
  for (int r = 0; r < kRows; ++r) total += RowTotal(r);
  return total;
}

long ConfusionMatrix::Errors() const {
  long correct = 0;
  for (int r = 0; r < kRows; ++r) correct += counts_[r][r];
  return Total() - correct;
}

double ConfusionMatrix::Rate(int row, int col) const {
  const long total = RowTotal(row);
  return total > 0 ? static_cast<double>(counts_[row][col]) / total : 0.0;
}

double ConfusionMatrix::Diagonal(int row) const { return Rate(row, row); }

std::string ConfusionMatrix::ToCsv(bool normalized) const {
  std::ostringstream out;
  out << "actual";
  for (const char* c : kColumnNames) out << ',' << c;
  out << '\n';
  out << std::setprecision(6);
  for (int r = 0; r < kRows; ++r) {
    out << kRowNames[r];
    for (int c = 0; c < kCols; ++c) {
      out << ',';
      if (normalized) {
        out << Rate(r, c);
      } else {
        out << counts_[r][c];
      }
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::json ConfusionMatrix::ToJson() const {
  nlohmann::json rows = nlohmann::json::object();
  for (int r = 0; r < kRows; ++r) {
    nlohmann::json counts = nlohmann::json::object();
    nlohmann::json rates = nlohmann::json::object();
    for (int c = 0; c < kCols; ++c) {
      counts[kColumnNames[c]] = counts_[r][c];
      rates[kColumnNames[c]] = Rate(r, c);
    }
    rows[kRowNames[r]] = {{"counts", counts}, {"rates", rates}};
  }
  return rows;
}

bool NearTransition(const Environment& env, int t, const MarginPolicy& margin) {
  if (margin.margin_steps <= 0) return false;
  for (const UncertaintySegment& s : env.segments) {
    for (int boundary : {s.start_t, s.end_t}) {
      if (boundary <= 0 || boundary >= env.test_horizon()) continue;
      if (GroundTruthLabelAt(env, boundary - 1) ==
          GroundTruthLabelAt(env, boundary)) {
        continue;
      }
      if (t >= boundary - margin.margin_steps &&
          t < boundary + margin.margin_steps) {
        return true;
      }
    }
  }
  return false;
}

double SummedActionVariance(const RolloutTensor& rollouts) {
  const int n = rollouts.rollouts();
  if (n < 2) return 0.0;
  double total = 0.0;
  for (int t = 0; t < rollouts.horizon(); ++t) {
    const auto step = rollouts.Step(t);
    const Eigen::VectorXd mean = step.rowwise().mean();
    total += (step.colwise() - mean).squaredNorm() / (n - 1);
  }
  return total;
}

GateMode UATeleopGate(const RolloutTensor& rollouts, double gamma) {
  return SummedActionVariance(rollouts) <= gamma ? GateMode::kRobot
                                                 : GateMode::kHuman;
}

double GateCounts::HumanOnTeleop() const {
  return teleop_steps > 0 ? static_cast<double>(teleop_human) / teleop_steps
                          : 1.0;
}

double GateCounts::RobotOnCertain() const {
  return certain_steps > 0 ? static_cast<double>(certain_robot) / certain_steps
                           : 1.0;
}

TimingStats Percentiles(std::vector<double> seconds) {
  TimingStats stats;
  stats.samples = static_cast<long>(seconds.size());
  if (seconds.empty()) return stats;
  std::sort(seconds.begin(), seconds.end());
  auto at = [&seconds](double q) {
    const std::size_t i = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(seconds.size())));
    return seconds[std::min(seconds.size() - 1, i > 0 ? i - 1 : 0)];
  };
  stats.p50 = at(0.50);
  stats.p90 = at(0.90);
  stats.p99 = at(0.99);
  stats.max = seconds.back();
  return stats;
}

int EvaluationResult::JunctionsSeen() const {
  int total = 0;
  for (const JunctionReport& j : junctions) total += j.trajectories;
  return total;
}

int EvaluationResult::JunctionsDetected() const {
  int total = 0;
  for (const JunctionReport& j : junctions) total += j.detected;
  return total;
}

double EvaluationResult::DetectionRate() const {
  const int seen = JunctionsSeen();
  return seen > 0 ? static_cast<double>(JunctionsDetected()) / seen : 1.0;
}

ActionRanges DeriveRanges(const GroundTruthSampler& sampler, int trajectories) {
  std::vector<ActionRange> ranges;
  for (const auto& [lo, hi] : sampler.TrainingBounds(std::max(trajectories, 1))) {
    ranges.push_back({lo, hi});
  }
  return ActionRanges(std::move(ranges));
}

ConfusionMatrix TallyRecords(std::span<const StepRecord> records,
                             bool filtered) {
  ConfusionMatrix matrix;
  for (const StepRecord& r : records) {
    if (ConfusionMatrix::Row(r.label) < 0) continue;
    if (filtered && r.near_transition) continue;
    matrix.Add(r.label, r.estimated);
  }
  return matrix;
}

double BoundaryErrorFraction(std::span<const StepRecord> records) {
  long errors = 0;
  long boundary = 0;
  for (const StepRecord& r : records) {
    const int row = ConfusionMatrix::Row(r.label);
    if (row < 0 || ConfusionMatrix::Column(r.estimated) == row) continue;
    ++errors;
    if (r.near_transition) ++boundary;
  }
  return errors > 0 ? static_cast<double>(boundary) / errors : 1.0;
}

EvaluationResult EvaluateEnvironment(const Environment& env,
                                     const ArbiterConfig& base_config,
                                     const EvaluationOptions& options) {
  SamplerSettings settings = options.sampler;
  settings.horizon = base_config.horizon;
  const GroundTruthSampler sampler(env, settings);

  ArbiterConfig config = base_config;
  if (config.ranges.empty()) {
    config.ranges = DeriveRanges(sampler, options.training_trajectories);
  }
  const ConfigReport report = ValidateConfig(config);
  if (!report.ok()) {
    throw std::invalid_argument("invalid arbiter config: " + report.Describe());
  }

  EvaluationResult result;
  result.ranges = config.ranges;
  result.margin_steps =
      options.margin_steps >= 0 ? options.margin_steps : config.horizon;
  const MarginPolicy margin{result.margin_steps};
  const int test_horizon = env.test_horizon();

  std::vector<GroundTruthLabel> labels(test_horizon);
  std::vector<bool> near(test_horizon);
  for (int t = 0; t < test_horizon; ++t) {
    labels[t] = GroundTruthLabelAt(env, t);
    near[t] = NearTransition(env, t, margin);
  }

  const int n_test = options.test_trajectories;
  std::vector<std::vector<StepRecord>> per_trajectory(n_test);
  std::vector<std::string> failures(n_test);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < n_test; i = next++) {
      try {
        const std::vector<Eigen::Vector2d> path = sampler.SampleTrajectory(
            DemonstrationSeed(options.seed, options.training_trajectories + i));
        std::vector<StepRecord>& records = per_trajectory[i];
        records.reserve(test_horizon);
        for (int t = 0; t < test_horizon; ++t) {
          const std::uint64_t step_seed = MixSeed(
              options.seed, static_cast<std::uint64_t>(i),
              static_cast<std::uint64_t>(t));
          const RolloutTensor rollouts =
              sampler.SampleRollouts({path[t], t}, step_seed);
          const auto start = std::chrono::steady_clock::now();
          const Assessment assessment =
              Assess(rollouts, config, MixSeed(step_seed, kAssessStream));
          const auto stop = std::chrono::steady_clock::now();
          StepRecord record;
          record.trajectory = i;
          record.t = t;
          record.label = labels[t];
          record.estimated = assessment.best.kind;
          record.near_transition = near[t];
          record.seconds = std::chrono::duration<double>(stop - start).count();
          if (options.baseline) record.gate = UATeleopGate(rollouts, options.gamma);
          records.push_back(record);
        }
      } catch (const std::exception& e) {
        failures[i] = "trajectory " + std::to_string(i) + ": " + e.what();
        per_trajectory[i].clear();
      }
    }
  };
  const int threads = std::max(
      1, options.threads > 0 ? options.threads
                             : static_cast<int>(std::thread::hardware_concurrency()));
  {
    std::vector<std::jthread> pool;
    for (int k = 1; k < std::min(threads, n_test); ++k) pool.emplace_back(worker);
    worker();
  }

  for (std::size_t i = 0; i < per_trajectory.size(); ++i) {
    if (!failures[i].empty()) result.failures.push_back(failures[i]);
    result.records.insert(result.records.end(), per_trajectory[i].begin(),
                          per_trajectory[i].end());
  }
  result.raw = TallyRecords(result.records, false);
  result.filtered = TallyRecords(result.records, true);

  std::vector<double> seconds;
  seconds.reserve(result.records.size());
  for (const StepRecord& r : result.records) seconds.push_back(r.seconds);
  result.timing = Percentiles(std::move(seconds));

  for (const UncertaintySegment& s : env.segments) {
    if (s.kind != SegmentKind::kDiscreteJunction) continue;
    JunctionReport junction{s.start_t, s.end_t, 0, 0};
    for (const auto& records : per_trajectory) {
      if (records.empty()) continue;
      ++junction.trajectories;
      const int from = std::max(0, s.start_t - config.horizon);
      for (int t = from; t < s.start_t; ++t) {
        if (records[t].estimated == MechanismKind::kDiscrete) {
          ++junction.detected;
          break;
        }
      }
    }
    result.junctions.push_back(junction);
  }

  if (options.baseline) {
    BaselineStats stats;
    for (const StepRecord& r : result.records) {
      for (GateCounts* counts : {&stats.raw, &stats.filtered}) {
        if (counts == &stats.filtered && r.near_transition) continue;
        if (r.label == GroundTruthLabel::kTeleoperation) {
          ++counts->teleop_steps;
          if (r.gate == GateMode::kHuman) ++counts->teleop_human;
        } else if (r.label == GroundTruthLabel::kNone) {
          ++counts->certain_steps;
          if (r.gate == GateMode::kRobot) ++counts->certain_robot;
        }
      }
    }
    result.baseline = stats;
  }
  return result;
}

double SuiteSummary::DetectionRate() const {
  return junctions_seen > 0
             ? static_cast<double>(junctions_detected) / junctions_seen
             : 1.0;
}

SuiteSummary Summarize(std::span<const EvaluationResult> results) {
  SuiteSummary summary;
  std::vector<double> seconds;
  std::vector<StepRecord> all;
  for (const EvaluationResult& r : results) {
    summary.raw.Merge(r.raw);
    summary.filtered.Merge(r.filtered);
    summary.junctions_seen += r.JunctionsSeen();
    summary.junctions_detected += r.JunctionsDetected();
    summary.failures += static_cast<long>(r.failures.size());
    all.insert(all.end(), r.records.begin(), r.records.end());
    if (r.baseline) {
      if (!summary.baseline) summary.baseline.emplace();
      for (auto [into, from] :
           {std::pair{&summary.baseline->raw, &r.baseline->raw},
            std::pair{&summary.baseline->filtered, &r.baseline->filtered}}) {
        into->teleop_steps += from->teleop_steps;
        into->teleop_human += from->teleop_human;
        into->certain_steps += from->certain_steps;
        into->certain_robot += from->certain_robot;
      }
    }
  }
  seconds.reserve(all.size());
  for (const StepRecord& r : all) seconds.push_back(r.seconds);
  summary.timing = Percentiles(std::move(seconds));
  summary.boundary_error_fraction = BoundaryErrorFraction(all);
  return summary;
}

nlohmann::json ToJson(const TimingStats& timing) {
  return {{"p50_ms", timing.p50 * 1e3},
          {"p90_ms", timing.p90 * 1e3},
          {"p99_ms", timing.p99 * 1e3},
          {"max_ms", timing.max * 1e3},
          {"samples", timing.samples}};
}

namespace {

nlohmann::json GateJson(const GateCounts& g) {
  return {{"teleop_steps", g.teleop_steps},
          {"human_on_teleop", g.HumanOnTeleop()},
          {"certain_steps", g.certain_steps},
          {"robot_on_certain", g.RobotOnCertain()}};
}

nlohmann::json AccuracyJson(const ConfusionMatrix& m) {
  return {{"none", m.Diagonal(0)},
          {"corrections", m.Diagonal(1)},
          {"teleoperation", m.Diagonal(2)}};
}

}  // namespace

nlohmann::json ToJson(const BaselineStats& stats) {
  return {{"raw", GateJson(stats.raw)}, {"filtered", GateJson(stats.filtered)}};
}

nlohmann::json ToJson(const EvaluationResult& result) {
  nlohmann::json junctions = nlohmann::json::array();
  for (const JunctionReport& j : result.junctions) {
    junctions.push_back({{"start_t", j.start_t},
                         {"end_t", j.end_t},
                         {"trajectories", j.trajectories},
                         {"detected", j.detected}});
  }
  nlohmann::json ranges = nlohmann::json::array();
  for (const ActionRange& r : result.ranges.ranges()) ranges.push_back({r.min, r.max});
  nlohmann::json json = {
      {"margin_steps", result.margin_steps},
      {"ranges", ranges},
      {"raw", result.raw.ToJson()},
      {"filtered", result.filtered.ToJson()},
      {"accuracy", {{"raw", AccuracyJson(result.raw)},
                    {"filtered", AccuracyJson(result.filtered)}}},
      {"junctions", junctions},
      {"detection_rate", result.DetectionRate()},
      {"boundary_error_fraction", BoundaryErrorFraction(result.records)},
      {"timing", ToJson(result.timing)},
      {"failures", result.failures}};
  if (result.baseline) json["baseline"] = ToJson(*result.baseline);
  return json;
}

nlohmann::json ToJson(const SuiteSummary& summary) {
  nlohmann::json json = {
      {"raw", summary.raw.ToJson()},
      {"filtered", summary.filtered.ToJson()},
      {"accuracy", {{"raw", AccuracyJson(summary.raw)},
                    {"filtered", AccuracyJson(summary.filtered)}}},
      {"junctions_seen", summary.junctions_seen},
      {"junctions_detected", summary.junctions_detected},
      {"detection_rate", summary.DetectionRate()},
      {"boundary_error_fraction", summary.boundary_error_fraction},
      {"timing", ToJson(summary.timing)},
      {"failures", summary.failures}};
  if (summary.baseline) json["baseline"] = ToJson(*summary.baseline);
  return json;
}

}  // namespace realm

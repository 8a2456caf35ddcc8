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

#ifndef REALM_ENVIRONMENT_H_
#define REALM_ENVIRONMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace realm {

enum class SegmentKind { kTeleop2d, kCorrective1d, kDiscreteJunction };

enum class GroundTruthLabel { kNone, kCorrections, kTeleoperation, kDiscrete };

std::string_view ToString(SegmentKind kind);
SegmentKind ParseSegmentKind(std::string_view name);
std::string_view ToString(GroundTruthLabel label);

// Sinusoidal kinds use amplitude (coordinate units) and frequency (cycles per
// segment); junctions use branch_count and branch_offset (lateral distance
// between the outermost branch and the backbone).
struct SegmentParams {
  double amplitude = 0.0;
  double frequency = 0.0;
  int branch_count = 0;
  double branch_offset = 0.0;
};

struct UncertaintySegment {
  SegmentKind kind = SegmentKind::kTeleop2d;
  int start_t = 0;
  int end_t = 0;  // exclusive
  SegmentParams params;

  bool Contains(int t) const { return t >= start_t && t < end_t; }
  int length() const { return end_t - start_t; }
};

struct Environment {
  std::uint64_t seed = 0;
  std::vector<Eigen::Vector2d> control_points;
  std::vector<UncertaintySegment> segments;  // sorted by start_t
  int horizon_total = 600;
  int tail_repeat = 100;

  int test_horizon() const { return horizon_total - tail_repeat; }

  // Throws std::invalid_argument on overlapping or out-of-range segments,
  // invalid parameters, or fewer than two control points.
  void Validate() const;
};

struct SegmentKindConfig {
  int count_min = 1;
  int count_max = 1;
  int length_min = 50;
  int length_max = 70;
  double amplitude_min = 0.0;
  double amplitude_max = 0.0;
  double frequency_min = 0.0;
  double frequency_max = 0.0;
  int branch_count = 2;
  double branch_offset_min = 0.0;
  double branch_offset_max = 0.0;
};

struct GenerationConfig {
  int control_points_min = 4;
  int control_points_max = 8;
  // Control points are drawn in [box_min, box_max]^2.
  double box_min = 0.15;
  double box_max = 0.85;
  double min_point_separation = 0.25;
  int horizon_total = 600;
  int tail_repeat = 100;
  // Steps of certainty kept before the first segment, between segments and
  // after the last one.
  int min_gap = 24;
  SegmentKindConfig teleop{1, 2, 50, 70, 0.20, 0.28, 1.0, 2.0, 0, 0.0, 0.0};
  SegmentKindConfig corrective{1, 2, 50, 70, 0.12, 0.20, 1.0, 2.0, 0, 0.0,
                               0.0};
  SegmentKindConfig junction{1, 1, 40, 50, 0.0, 0.0, 0.0, 0.0, 2, 0.12, 0.18};
};

// Deterministic in (seed, config). Throws std::invalid_argument when the
// requested segments cannot fit without overlap.
Environment GenerateEnvironment(std::uint64_t seed,
                                const GenerationConfig& config = {});

// Per-step label from segment membership; throws std::out_of_range outside
// [0, test_horizon).
GroundTruthLabel GroundTruthLabelAt(const Environment& env, int t);

// Segment active at t, if any.
const UncertaintySegment* SegmentAt(const Environment& env, int t);

// Arc-length parametrized backbone sampled once per step over the whole
// horizon; the tail repeats the final position.
class Backbone {
 public:
  explicit Backbone(const Environment& env);

  int steps() const { return static_cast<int>(positions_.size()); }
  const Eigen::Vector2d& Position(int t) const { return positions_[Clamp(t)]; }
  // Unit left normal of the path direction at t.
  const Eigen::Vector2d& Normal(int t) const { return normals_[Clamp(t)]; }

 private:
  int Clamp(int t) const;

  std::vector<Eigen::Vector2d> positions_;
  std::vector<Eigen::Vector2d> normals_;
};

nlohmann::json ToJson(const Environment& env);
Environment EnvironmentFromJson(const nlohmann::json& json);
std::string SerializeEnvironment(const Environment& env);
Environment LoadEnvironment(const std::string& path);
void SaveEnvironment(const Environment& env, const std::string& path);

}  // namespace realm

#endif  // REALM_ENVIRONMENT_H_

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

#include "realm/environment.h"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "realm/random.h"

namespace realm {

namespace {

constexpr std::uint64_t kGenerationStream = 0x656e76;  // "env"
constexpr int kDenseSamplesPerPiece = 200;

Eigen::Vector2d CubicBezier(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
                            const Eigen::Vector2d& p2, const Eigen::Vector2d& p3,
                            double s) {
  const double u = 1.0 - s;
  return u * u * u * p0 + 3.0 * u * u * s * p1 + 3.0 * u * s * s * p2 +
         s * s * s * p3;
}

// Dense polyline of the Bezier chain through the control points. Interior
// handles follow the Catmull-Rom tangents so the chain is C1.
std::vector<Eigen::Vector2d> DenseChain(
    const std::vector<Eigen::Vector2d>& points) {
  const int k = static_cast<int>(points.size());
  std::vector<Eigen::Vector2d> dense;
  dense.reserve(static_cast<std::size_t>(k - 1) * kDenseSamplesPerPiece + 1);
  for (int i = 0; i + 1 < k; ++i) {
    const Eigen::Vector2d& prev = points[std::max(i - 1, 0)];
    const Eigen::Vector2d& p0 = points[i];
    const Eigen::Vector2d& p3 = points[i + 1];
    const Eigen::Vector2d& next = points[std::min(i + 2, k - 1)];
    const Eigen::Vector2d p1 = p0 + (p3 - prev) / 6.0;
    const Eigen::Vector2d p2 = p3 - (next - p0) / 6.0;
    for (int j = 0; j < kDenseSamplesPerPiece; ++j) {
      dense.push_back(CubicBezier(p0, p1, p2, p3,
                                  static_cast<double>(j) / kDenseSamplesPerPiece));
    }
  }
  dense.push_back(points.back());
  return dense;
}

void CheckKindConfig(const SegmentKindConfig& c, std::string_view name) {
  if (c.count_min < 0 || c.count_max < c.count_min || c.length_min < 1 ||
      c.length_max < c.length_min) {
    throw std::invalid_argument("invalid " + std::string(name) +
                                " segment counts or lengths");
  }
}

}  // namespace

std::string_view ToString(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::kTeleop2d:
      return "teleop2d";
    case SegmentKind::kCorrective1d:
      return "corrective1d";
    case SegmentKind::kDiscreteJunction:
      return "discrete_junction";
  }
  return "unknown";
}

SegmentKind ParseSegmentKind(std::string_view name) {
  if (name == "teleop2d") return SegmentKind::kTeleop2d;
  if (name == "corrective1d") return SegmentKind::kCorrective1d;
  if (name == "discrete_junction") return SegmentKind::kDiscreteJunction;
  throw std::invalid_argument("unknown segment kind '" + std::string(name) +
                              "'");
}

std::string_view ToString(GroundTruthLabel label) {
  switch (label) {
    case GroundTruthLabel::kNone:
      return "none";
    case GroundTruthLabel::kCorrections:
      return "corrections";
    case GroundTruthLabel::kTeleoperation:
      return "teleoperation";
    case GroundTruthLabel::kDiscrete:
      return "discrete";
  }
  return "unknown";
}

void Environment::Validate() const {
  if (control_points.size() < 2) {
    throw std::invalid_argument("environment needs at least 2 control points");
  }
  for (const Eigen::Vector2d& p : control_points) {
    if (!p.allFinite()) {
      throw std::invalid_argument("non-finite control point");
    }
  }
  if (tail_repeat < 0 || horizon_total <= tail_repeat) {
    throw std::invalid_argument("horizon_total must exceed tail_repeat");
  }
  int previous_end = 0;
  for (const UncertaintySegment& s : segments) {
    if (s.end_t <= s.start_t) {
      throw std::invalid_argument("segment end_t must exceed start_t");
    }
    if (s.start_t < 0 || s.end_t > test_horizon()) {
      throw std::invalid_argument("segment outside the test horizon");
    }
    if (s.start_t < previous_end) {
      throw std::invalid_argument("segments overlap or are unsorted");
    }
    previous_end = s.end_t;
    if (s.kind == SegmentKind::kDiscreteJunction) {
      if (s.params.branch_count < 2 || !(s.params.branch_offset > 0.0)) {
        throw std::invalid_argument(
            "junction needs branch_count >= 2 and positive branch_offset");
      }
    } else if (!(s.params.amplitude > 0.0) || !(s.params.frequency > 0.0)) {
      throw std::invalid_argument(
          "sinusoidal segment needs positive amplitude and frequency");
    }
  }
}

Environment GenerateEnvironment(std::uint64_t seed,
                                const GenerationConfig& config) {
  CheckKindConfig(config.teleop, "teleop2d");
  CheckKindConfig(config.corrective, "corrective1d");
  CheckKindConfig(config.junction, "discrete_junction");
  if (config.control_points_min < 2 ||
      config.control_points_max < config.control_points_min) {
    throw std::invalid_argument("invalid control point counts");
  }
  const int test_horizon = config.horizon_total - config.tail_repeat;
  if (test_horizon < 1) {
    throw std::invalid_argument("horizon_total must exceed tail_repeat");
  }

  const std::pair<SegmentKind, const SegmentKindConfig*> kinds[] = {
      {SegmentKind::kTeleop2d, &config.teleop},
      {SegmentKind::kCorrective1d, &config.corrective},
      {SegmentKind::kDiscreteJunction, &config.junction}};

  // Pigeonhole: the smallest admissible set of segments must fit.
  long min_steps = config.min_gap;
  for (const auto& [kind, c] : kinds) {
    min_steps += static_cast<long>(c->count_min) * (c->length_min + config.min_gap);
  }
  if (min_steps > test_horizon) {
    throw std::invalid_argument(
        "infeasible environment config: segments need at least " +
        std::to_string(min_steps) + " steps but the test horizon has " +
        std::to_string(test_horizon));
  }

  Rng rng(MixSeed(seed, kGenerationStream));
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto uniform_int = [&rng](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  Environment env;
  env.seed = seed;
  env.horizon_total = config.horizon_total;
  env.tail_repeat = config.tail_repeat;

  const int point_count =
      uniform_int(config.control_points_min, config.control_points_max);
  for (int i = 0; i < point_count; ++i) {
    Eigen::Vector2d p;
    for (int attempt = 0; attempt < 100; ++attempt) {
      p = {uniform(config.box_min, config.box_max),
           uniform(config.box_min, config.box_max)};
      if (env.control_points.empty() ||
          (p - env.control_points.back()).norm() >=
              config.min_point_separation) {
        break;
      }
    }
    env.control_points.push_back(p);
  }

  struct Draft {
    UncertaintySegment segment;
    int min_length;
  };
  std::vector<Draft> drafts;
  std::vector<int> optional_slots;  // drafts beyond count_min, droppable
  for (const auto& [kind, c] : kinds) {
    const int count = uniform_int(c->count_min, c->count_max);
    for (int i = 0; i < count; ++i) {
      UncertaintySegment s;
      s.kind = kind;
      s.end_t = uniform_int(c->length_min, c->length_max);  // length for now
      if (kind == SegmentKind::kDiscreteJunction) {
        s.params.branch_count = c->branch_count;
        s.params.branch_offset = uniform(c->branch_offset_min, c->branch_offset_max);
      } else {
        s.params.amplitude = uniform(c->amplitude_min, c->amplitude_max);
        s.params.frequency = uniform(c->frequency_min, c->frequency_max);
      }
      if (i >= c->count_min) optional_slots.push_back(static_cast<int>(drafts.size()));
      drafts.push_back({s, c->length_min});
    }
  }

  auto used_steps = [&]() {
    long total = config.min_gap;
    for (const Draft& d : drafts) total += d.segment.end_t + config.min_gap;
    return total;
  };
  // Shrink toward minimum lengths, then drop optional segments, until the
  // draft fits. Feasibility of the minimal set was checked above.
  while (used_steps() > test_horizon) {
    bool shrunk = false;
    for (Draft& d : drafts) {
      if (d.segment.end_t > d.min_length && used_steps() > test_horizon) {
        --d.segment.end_t;
        shrunk = true;
      }
    }
    if (!shrunk) {
      drafts.erase(drafts.begin() + optional_slots.back());
      optional_slots.pop_back();
    }
  }

  std::shuffle(drafts.begin(), drafts.end(), rng);
  const int slack = test_horizon - static_cast<int>(used_steps());
  const int k = static_cast<int>(drafts.size());
  std::vector<int> cuts(k);
  for (int& cut : cuts) cut = uniform_int(0, slack);
  std::sort(cuts.begin(), cuts.end());

  int cursor = config.min_gap;
  for (int i = 0; i < k; ++i) {
    const int extra = cuts[i] - (i > 0 ? cuts[i - 1] : 0);
    UncertaintySegment s = drafts[i].segment;
    const int length = s.end_t;
    s.start_t = cursor + extra;
    s.end_t = s.start_t + length;
    cursor = s.end_t + config.min_gap;
    env.segments.push_back(s);
  }
  env.Validate();
  return env;
}

const UncertaintySegment* SegmentAt(const Environment& env, int t) {
  for (const UncertaintySegment& s : env.segments) {
    if (s.Contains(t)) return &s;
  }
  return nullptr;
}

GroundTruthLabel GroundTruthLabelAt(const Environment& env, int t) {
  if (t < 0 || t >= env.test_horizon()) {
    throw std::out_of_range("label step " + std::to_string(t) +
                            " outside [0, " +
                            std::to_string(env.test_horizon()) + ")");
  }
  const UncertaintySegment* s = SegmentAt(env, t);
  if (s == nullptr) return GroundTruthLabel::kNone;
  switch (s->kind) {
    case SegmentKind::kTeleop2d:
      return GroundTruthLabel::kTeleoperation;
    case SegmentKind::kCorrective1d:
      return GroundTruthLabel::kCorrections;
    case SegmentKind::kDiscreteJunction:
      return GroundTruthLabel::kDiscrete;
  }
  return GroundTruthLabel::kNone;
}

Backbone::Backbone(const Environment& env) {
  env.Validate();
  const std::vector<Eigen::Vector2d> dense = DenseChain(env.control_points);
  std::vector<double> arc(dense.size(), 0.0);
  for (std::size_t i = 1; i < dense.size(); ++i) {
    arc[i] = arc[i - 1] + (dense[i] - dense[i - 1]).norm();
  }
  const double length = arc.back();
  const int moving = env.test_horizon();
  positions_.reserve(env.horizon_total);
  normals_.reserve(env.horizon_total);
  for (int t = 0; t < moving; ++t) {
    const double s = moving > 1 ? length * t / (moving - 1) : 0.0;
    auto it = std::upper_bound(arc.begin(), arc.end(), s);
    std::size_t hi = std::min<std::size_t>(
        std::max<std::ptrdiff_t>(it - arc.begin(), 1), dense.size() - 1);
    const std::size_t lo = hi - 1;
    const double span = arc[hi] - arc[lo];
    const double w = span > 0.0 ? std::clamp((s - arc[lo]) / span, 0.0, 1.0) : 0.0;
    positions_.push_back((1.0 - w) * dense[lo] + w * dense[hi]);
    Eigen::Vector2d tangent = dense[hi] - dense[lo];
    if (tangent.norm() == 0.0) tangent = {1.0, 0.0};
    tangent.normalize();
    normals_.emplace_back(-tangent.y(), tangent.x());
  }
  for (int t = moving; t < env.horizon_total; ++t) {
    positions_.push_back(positions_.back());
    normals_.push_back(normals_.back());
  }
}

int Backbone::Clamp(int t) const {
  return std::clamp(t, 0, static_cast<int>(positions_.size()) - 1);
}

nlohmann::json ToJson(const Environment& env) {
  nlohmann::json points = nlohmann::json::array();
  for (const Eigen::Vector2d& p : env.control_points) {
    points.push_back({p.x(), p.y()});
  }
  nlohmann::json segments = nlohmann::json::array();
  for (const UncertaintySegment& s : env.segments) {
    nlohmann::json params;
    if (s.kind == SegmentKind::kDiscreteJunction) {
      params = {{"branch_count", s.params.branch_count},
                {"branch_offset", s.params.branch_offset}};
    } else {
      params = {{"amplitude", s.params.amplitude},
                {"frequency", s.params.frequency}};
    }
    segments.push_back({{"kind", std::string(ToString(s.kind))},
                        {"start_t", s.start_t},
                        {"end_t", s.end_t},
                        {"params", params}});
  }
  return {{"seed", env.seed},
          {"control_points", points},
          {"segments", segments},
          {"horizon_total", env.horizon_total},
          {"tail_repeat", env.tail_repeat}};
}

Environment EnvironmentFromJson(const nlohmann::json& json) {
  Environment env;
  try {
    env.seed = json.at("seed").get<std::uint64_t>();
    for (const auto& p : json.at("control_points")) {
      if (!p.is_array() || p.size() != 2) {
        throw std::invalid_argument("control point must be [x, y]");
      }
      env.control_points.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    for (const auto& js : json.at("segments")) {
      UncertaintySegment s;
      s.kind = ParseSegmentKind(js.at("kind").get<std::string>());
      s.start_t = js.at("start_t").get<int>();
      s.end_t = js.at("end_t").get<int>();
      const auto& params = js.at("params");
      if (s.kind == SegmentKind::kDiscreteJunction) {
        s.params.branch_count = params.at("branch_count").get<int>();
        s.params.branch_offset = params.at("branch_offset").get<double>();
      } else {
        s.params.amplitude = params.at("amplitude").get<double>();
        s.params.frequency = params.at("frequency").get<double>();
      }
      env.segments.push_back(s);
    }
    env.horizon_total = json.at("horizon_total").get<int>();
    env.tail_repeat = json.at("tail_repeat").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed environment: ") +
                                e.what());
  }
  std::sort(env.segments.begin(), env.segments.end(),
            [](const auto& a, const auto& b) { return a.start_t < b.start_t; });
  env.Validate();
  return env;
}

std::string SerializeEnvironment(const Environment& env) {
  return ToJson(env).dump(2) + "\n";
}

Environment LoadEnvironment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open environment file " + path);
  nlohmann::json json;
  try {
    in >> json;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed environment file " + path + ": " +
                                e.what());
  }
  return EnvironmentFromJson(json);
}

void SaveEnvironment(const Environment& env, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write environment file " + path);
  out << SerializeEnvironment(env);
  if (!out) throw std::runtime_error("failed writing environment file " + path);
}

}  // namespace realm

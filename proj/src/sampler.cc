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

#include "realm/sampler.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "realm/random.h"

namespace realm {

namespace {

constexpr std::uint64_t kTrajectoryStream = 0x74726a;  // "trj"
constexpr std::uint64_t kRolloutStream = 0x726f6c;     // "rol"
constexpr double kJunctionRamp = 0.3;  // fraction of the junction spent diverging
constexpr int kSinusoidRamp = 8;

double Smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

// Envelope of the sinusoidal kinds: ramps in and out over a few steps.
double SinusoidEnvelope(const UncertaintySegment& s, int t) {
  const double ramp = std::max(1, std::min(kSinusoidRamp, s.length() / 4));
  return Smoothstep(std::min((t - s.start_t + 1) / ramp, (s.end_t - t) / ramp));
}

// Lateral profile of a junction: diverge, hold, rejoin.
double JunctionProfile(const UncertaintySegment& s, int t) {
  const double u = static_cast<double>(t - s.start_t) / s.length();
  return Smoothstep(std::min(u, 1.0 - u) / kJunctionRamp);
}

double BranchLateral(const UncertaintySegment& s, int branch) {
  const int b = s.params.branch_count;
  return s.params.branch_offset * (2.0 * branch / (b - 1) - 1.0);
}

}  // namespace

std::uint64_t DemonstrationSeed(std::uint64_t master_seed, int index) {
  return MixSeed(master_seed, static_cast<std::uint64_t>(index));
}

GroundTruthSampler::GroundTruthSampler(Environment env, SamplerSettings settings)
    : env_(std::move(env)), settings_(settings), backbone_(env_) {
  if (settings_.rollouts < 1 || settings_.horizon < 1) {
    throw std::invalid_argument("sampler needs positive rollouts and horizon");
  }
  if (!(settings_.noise_sigma >= 0.0) || settings_.p_collapse < 0.0 ||
      settings_.p_collapse > 1.0 || settings_.pull_steps < 0) {
    throw std::invalid_argument("invalid sampler settings");
  }
  segment_index_.assign(env_.horizon_total, -1);
  for (std::size_t i = 0; i < env_.segments.size(); ++i) {
    const UncertaintySegment& s = env_.segments[i];
    for (int t = s.start_t; t < s.end_t; ++t) segment_index_[t] = static_cast<int>(i);
  }
}

const UncertaintySegment* GroundTruthSampler::Segment(int t) const {
  if (t < 0 || t >= static_cast<int>(segment_index_.size())) return nullptr;
  const int i = segment_index_[t];
  return i < 0 ? nullptr : &env_.segments[i];
}

template <typename Rng>
GroundTruthSampler::SegmentDraw GroundTruthSampler::DrawSegment(
    const UncertaintySegment& segment, Rng& rng) const {
  std::uniform_real_distribution<double> factor(
      1.0 - settings_.amplitude_jitter, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  SegmentDraw draw;
  switch (segment.kind) {
    case SegmentKind::kTeleop2d:
      draw.factor_x = factor(rng);
      draw.factor_y = factor(rng);
      draw.phase_x = phase(rng);
      draw.phase_y = phase(rng);
      break;
    case SegmentKind::kCorrective1d:
      draw.factor_x = factor(rng);
      draw.phase_x = phase(rng);
      break;
    case SegmentKind::kDiscreteJunction:
      draw.branch = std::uniform_int_distribution<int>(
          0, segment.params.branch_count - 1)(rng);
      break;
  }
  return draw;
}

Eigen::Vector2d GroundTruthSampler::Offset(const UncertaintySegment& s,
                                           const SegmentDraw& draw,
                                           int t) const {
  const double u = static_cast<double>(t - s.start_t) / s.length();
  const double omega = 2.0 * std::numbers::pi * s.params.frequency;
  switch (s.kind) {
    case SegmentKind::kTeleop2d: {
      const double a = s.params.amplitude * SinusoidEnvelope(s, t);
      return {a * draw.factor_x * std::sin(omega * u + draw.phase_x),
              a * draw.factor_y * std::sin(omega * u + draw.phase_y)};
    }
    case SegmentKind::kCorrective1d: {
      const double a = s.params.amplitude * SinusoidEnvelope(s, t);
      return a * draw.factor_x * std::sin(omega * u + draw.phase_x) *
             backbone_.Normal(t);
    }
    case SegmentKind::kDiscreteJunction:
      return JunctionProfile(s, t) * BranchLateral(s, draw.branch) *
             backbone_.Normal(t);
  }
  return Eigen::Vector2d::Zero();
}

Eigen::Vector2d GroundTruthSampler::BranchPosition(
    const UncertaintySegment& junction, int branch, int t) const {
  Eigen::Vector2d p = backbone_.Position(t);
  if (junction.Contains(t)) {
    p += JunctionProfile(junction, t) * BranchLateral(junction, branch) *
         backbone_.Normal(t);
  }
  return p;
}

std::vector<double> GroundTruthSampler::BranchPosterior(
    const UncertaintySegment& junction, const AgentState& state) const {
  const int b = junction.params.branch_count;
  std::vector<double> weights(b, 1.0 / b);
  if (state.t < junction.start_t || state.t >= junction.end_t) return weights;
  const double sigma = std::max(settings_.noise_sigma, 1e-12);
  std::vector<double> log_w(b);
  for (int i = 0; i < b; ++i) {
    const double d2 =
        (state.position - BranchPosition(junction, i, state.t)).squaredNorm();
    log_w[i] = -d2 / (2.0 * sigma * sigma);
  }
  const double top = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  for (int i = 0; i < b; ++i) total += weights[i] = std::exp(log_w[i] - top);
  for (double& w : weights) w /= total;
  return weights;
}

std::vector<Eigen::Vector2d> GroundTruthSampler::SampleTrajectory(
    std::uint64_t seed) const {
  Rng rng(MixSeed(env_.seed, seed, kTrajectoryStream));
  std::vector<SegmentDraw> draws;
  draws.reserve(env_.segments.size());
  for (const UncertaintySegment& s : env_.segments) {
    draws.push_back(DrawSegment(s, rng));
  }
  std::normal_distribution<double> noise(0.0, settings_.noise_sigma);
  const int moving = env_.test_horizon();
  std::vector<Eigen::Vector2d> path;
  path.reserve(env_.horizon_total);
  for (int t = 0; t < moving; ++t) {
    Eigen::Vector2d p = backbone_.Position(t);
    const int i = segment_index_[t];
    if (i >= 0) p += Offset(env_.segments[i], draws[i], t);
    p.x() += noise(rng);
    p.y() += noise(rng);
    path.push_back(p);
  }
  path.resize(env_.horizon_total, path.back());
  return path;
}

RolloutTensor GroundTruthSampler::SampleRollouts(const AgentState& state,
                                                 std::uint64_t seed) const {
  const int moving = env_.test_horizon();
  if (state.t < 0 || state.t >= moving) {
    throw std::out_of_range("rollout state step " + std::to_string(state.t) +
                            " outside [0, " + std::to_string(moving) + ")");
  }
  if (!state.position.allFinite()) {
    throw std::invalid_argument("agent position must be finite");
  }
  const int n_r = settings_.rollouts;
  const int horizon = settings_.horizon;
  Rng rng(MixSeed(env_.seed, seed, kRolloutStream));

  // Segments touched by the forecast window, with branch weights for
  // junctions.
  const int first = state.t + 1;
  const int last = std::min(state.t + horizon, moving - 1);
  std::vector<std::size_t> active;
  std::vector<std::vector<double>> weights(env_.segments.size());
  for (std::size_t i = 0; i < env_.segments.size(); ++i) {
    const UncertaintySegment& s = env_.segments[i];
    const bool touches = s.start_t <= last && s.end_t > first;
    const bool inside = s.Contains(state.t);
    if (!touches && !inside) continue;
    active.push_back(i);
    if (s.kind == SegmentKind::kDiscreteJunction) {
      weights[i] = BranchPosterior(s, state);
    }
  }

  auto pick = [&rng](const std::vector<double>& w) {
    return std::discrete_distribution<int>(w.begin(), w.end())(rng);
  };
  const bool collapse =
      std::bernoulli_distribution(settings_.p_collapse)(rng);
  std::vector<int> collapsed_branch(env_.segments.size(), 0);
  if (collapse) {
    for (std::size_t i : active) {
      if (!weights[i].empty()) collapsed_branch[i] = pick(weights[i]);
    }
  }

  // Center of the data distribution at the current step; the forecast is
  // shifted by the agent's deviation from it, decaying over pull_steps.
  Eigen::Vector2d center = backbone_.Position(state.t);
  if (const UncertaintySegment* s = Segment(state.t);
      s != nullptr && s->kind == SegmentKind::kDiscreteJunction) {
    const std::vector<double> w = BranchPosterior(*s, state);
    center.setZero();
    for (int b = 0; b < s->params.branch_count; ++b) {
      center += w[b] * BranchPosition(*s, b, state.t);
    }
  }
  const Eigen::Vector2d deviation = state.position - center;

  std::normal_distribution<double> noise(0.0, settings_.noise_sigma);
  RolloutTensor tensor(2, n_r, horizon);
  std::vector<SegmentDraw> draws(env_.segments.size());
  for (int n = 0; n < n_r; ++n) {
    for (std::size_t i : active) {
      draws[i] = DrawSegment(env_.segments[i], rng);
      if (!weights[i].empty()) {
        draws[i].branch = collapse ? collapsed_branch[i] : pick(weights[i]);
      }
    }
    Eigen::Vector2d final_action = Eigen::Vector2d::Zero();
    for (int j = 0; j < horizon; ++j) {
      const int t = state.t + 1 + j;
      Eigen::Vector2d p;
      if (t < moving) {
        p = backbone_.Position(t);
        const int i = segment_index_[t];
        if (i >= 0) p += Offset(env_.segments[i], draws[i], t);
        p.x() += noise(rng);
        p.y() += noise(rng);
        if (settings_.pull_steps > 0) {
          const double blend =
              std::max(0.0, 1.0 - static_cast<double>(j + 1) /
                                      (settings_.pull_steps + 1));
          p += blend * deviation;
        }
        if (t == moving - 1) final_action = p;
      } else {
        if (j == 0) final_action = state.position;
        p = final_action;
      }
      tensor(0, n, j) = p.x();
      tensor(1, n, j) = p.y();
    }
  }
  return tensor;
}

std::vector<std::pair<double, double>> GroundTruthSampler::TrainingBounds(
    int count) const {
  std::vector<std::pair<double, double>> bounds(
      2, {std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()});
  for (int i = 0; i < count; ++i) {
    for (const Eigen::Vector2d& p : SampleTrajectory(DemonstrationSeed(env_.seed, i))) {
      for (int d = 0; d < 2; ++d) {
        bounds[d].first = std::min(bounds[d].first, p[d]);
        bounds[d].second = std::max(bounds[d].second, p[d]);
      }
    }
  }
  return bounds;
}

}  // namespace realm

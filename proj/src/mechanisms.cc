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

#include "realm/mechanisms.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/SVD>

#include "realm/kmeans.h"
#include "realm/random.h"

namespace realm {

namespace {

void RequireSamples(const RolloutTensor& rollouts, int spacing) {
  const int n = rollouts.rollouts();
  const int m = spacing > 0 ? spacing : DefaultSpacing(n);
  if (n < 2 * m + 1) {
    throw std::invalid_argument("estimator needs at least " +
                                std::to_string(2 * m + 1) + " rollouts, got " +
                                std::to_string(n));
  }
}

bool EnoughSamples(int n, int spacing) {
  const int m = spacing > 0 ? spacing : DefaultSpacing(n);
  return n >= 2 * m + 1;
}

}  // namespace

std::string_view ToString(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kNoAssist:
      return "no_assist";
    case MechanismKind::kDiscrete:
      return "discrete";
    case MechanismKind::kCorrections:
      return "corrections";
    case MechanismKind::kTeleop:
      return "teleop";
  }
  return "unknown";
}

MechanismKind ParseMechanismKind(std::string_view name) {
  if (name == "no_assist") return MechanismKind::kNoAssist;
  if (name == "discrete") return MechanismKind::kDiscrete;
  if (name == "corrections") return MechanismKind::kCorrections;
  if (name == "teleop") return MechanismKind::kTeleop;
  throw std::invalid_argument("unknown mechanism kind '" + std::string(name) +
                              "'");
}

MechanismId MechanismId::Discrete(int choices) {
  if (choices < 2) {
    throw std::invalid_argument("discrete mechanism needs at least 2 choices");
  }
  return {MechanismKind::kDiscrete, choices};
}

MechanismId MechanismId::Corrections(int dims) {
  if (dims < 1) {
    throw std::invalid_argument("corrections need at least 1 dimension");
  }
  return {MechanismKind::kCorrections, dims};
}

std::string MechanismId::Name() const {
  std::string name(ToString(kind));
  if (kind == MechanismKind::kDiscrete || kind == MechanismKind::kCorrections) {
    name += "(" + std::to_string(arity) + ")";
  }
  return name;
}

MechanismId MechanismId::Parse(std::string_view name) {
  const std::size_t open = name.find('(');
  if (open == std::string_view::npos) {
    const MechanismKind kind = ParseMechanismKind(name);
    if (kind == MechanismKind::kDiscrete) return Discrete(2);
    if (kind == MechanismKind::kCorrections) return Corrections(1);
    return {kind, 0};
  }
  if (name.back() != ')') {
    throw std::invalid_argument("malformed mechanism name '" +
                                std::string(name) + "'");
  }
  const MechanismKind kind = ParseMechanismKind(name.substr(0, open));
  int arity = 0;
  try {
    arity = std::stoi(std::string(name.substr(open + 1, name.size() - open - 2)));
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed mechanism arity in '" +
                                std::string(name) + "'");
  }
  switch (kind) {
    case MechanismKind::kDiscrete:
      return Discrete(arity);
    case MechanismKind::kCorrections:
      return Corrections(arity);
    default:
      throw std::invalid_argument("mechanism '" + std::string(name) +
                                  "' takes no arity");
  }
}

double InputCount(const MechanismId& mechanism, int action_dims, int horizon) {
  switch (mechanism.kind) {
    case MechanismKind::kNoAssist:
      return 0.0;
    case MechanismKind::kDiscrete:
      return mechanism.arity;
    case MechanismKind::kCorrections:
      return static_cast<double>(mechanism.arity) * horizon;
    case MechanismKind::kTeleop:
      return static_cast<double>(action_dims) * horizon;
  }
  return 0.0;
}

MechanismEstimate EstimateNoAssist(const RolloutTensor& rollouts,
                                   HumanOptimality beta, int spacing) {
  RequireSamples(rollouts, spacing);
  MechanismEstimate estimate;
  estimate.mechanism = MechanismId::NoAssist();
  estimate.per_step_entropy.reserve(rollouts.horizon());
  for (int t = 0; t < rollouts.horizon(); ++t) {
    estimate.per_step_entropy.push_back(
        SampleEntropyMulti(rollouts.Step(t), beta, spacing));
  }
  return estimate;
}

MechanismEstimate EstimateDiscrete(const RolloutTensor& rollouts, int choices,
                                   HumanOptimality beta,
                                   const EstimatorOptions& options) {
  const MechanismId mechanism = MechanismId::Discrete(choices);
  const int n_r = rollouts.rollouts();
  const int n_a = rollouts.action_dims();
  const int horizon = rollouts.horizon();
  if (choices > n_r) {
    throw std::invalid_argument("more discrete choices than rollouts");
  }

  const KMeansResult km = KMeans(rollouts.flattened(), choices,
                                 {options.kmeans_restarts,
                                  options.kmeans_max_iterations, options.seed});

  ClusterMetadata meta;
  meta.assignments = km.assignments;
  meta.sizes = km.sizes;
  meta.floored.assign(choices, false);
  const double cluster_floor = n_a * DimensionFloor(beta);

  MechanismEstimate estimate;
  estimate.mechanism = mechanism;
  estimate.human_input = InputCount(mechanism, n_a, horizon);
  estimate.per_step_entropy.assign(horizon, 0.0);

  for (int c = 0; c < choices; ++c) {
    meta.means.push_back(km.centroids.col(c).reshaped(n_a, horizon));
    const int size = km.sizes[c];
    if (size == 0) continue;
    const double weight = static_cast<double>(size) / n_r;
    if (!EnoughSamples(size, options.spacing)) {
      meta.floored[c] = true;
      for (double& h : estimate.per_step_entropy) h += weight * cluster_floor;
      continue;
    }
    Eigen::MatrixXd members(rollouts.flattened().rows(), size);
    for (int j = 0, col = 0; j < n_r; ++j) {
      if (km.assignments[j] == c) members.col(col++) = rollouts.flattened().col(j);
    }
    for (int t = 0; t < horizon; ++t) {
      estimate.per_step_entropy[t] +=
          weight * SampleEntropyMulti(members.middleRows(t * n_a, n_a), beta,
                                      options.spacing);
    }
  }
  estimate.clusters = std::move(meta);
  return estimate;
}

MechanismEstimate EstimateTeleop(int action_dims, int horizon,
                                 HumanOptimality beta) {
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  MechanismEstimate estimate;
  estimate.mechanism = MechanismId::Teleop();
  estimate.human_input =
      InputCount(estimate.mechanism, action_dims, horizon);
  estimate.per_step_entropy.assign(horizon, GaussianEntropy(action_dims, beta));
  return estimate;
}

MechanismEstimate EstimateCorrections(const RolloutTensor& rollouts, int dims,
                                      HumanOptimality beta,
                                      const EstimatorOptions& options) {
  const int n_a = rollouts.action_dims();
  const int n_r = rollouts.rollouts();
  const int horizon = rollouts.horizon();
  if (dims < 1 || dims >= n_a) {
    throw std::invalid_argument(
        "corrections need 1 <= n_c < n_a, got n_c=" + std::to_string(dims) +
        " with n_a=" + std::to_string(n_a));
  }
  if (n_r < 2) throw std::invalid_argument("corrections need n_r >= 2");
  const int n_synth = options.n_synth > 0 ? options.n_synth : n_r;
  if (!EnoughSamples(n_synth, options.spacing)) {
    throw std::invalid_argument("too few synthetic correction samples");
  }
  RequireSamples(rollouts, options.spacing);

  const MechanismId mechanism = MechanismId::Corrections(dims);
  const double floor = DimensionFloor(beta);
  const double human_sigma = 1.0 / std::sqrt(beta.beta());

  MechanismEstimate estimate;
  estimate.mechanism = mechanism;
  estimate.human_input = InputCount(mechanism, n_a, horizon);
  estimate.per_step_entropy.reserve(horizon);
  CorrectionMetadata meta;
  meta.directions.reserve(horizon);
  meta.fallback.reserve(horizon);

  std::vector<double> coordinate;
  for (int t = 0; t < horizon; ++t) {
    const Eigen::MatrixXd centered =
        rollouts.Step(t).colwise() - rollouts.Step(t).rowwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeFullU);
    Eigen::MatrixXd basis = svd.matrixU();  // columns: principal directions
    const bool degenerate = !(svd.singularValues()(0) > 1e-12);
    if (degenerate) {
      basis = Eigen::MatrixXd::Identity(n_a, n_a);
    } else {
      // Sign convention: largest-magnitude component positive.
      for (int k = 0; k < n_a; ++k) {
        Eigen::Index top = 0;
        basis.col(k).cwiseAbs().maxCoeff(&top);
        if (basis(top, k) < 0.0) basis.col(k) *= -1.0;
      }
    }

    Rng rng(MixSeed(options.seed, static_cast<std::uint64_t>(t)));
    std::normal_distribution<double> human(0.0, human_sigma);
    double h = 0.0;
    for (int k = 0; k < n_a; ++k) {
      if (k < dims) {
        coordinate.resize(n_synth);
        for (double& v : coordinate) v = human(rng);
      } else {
        coordinate.resize(n_r);
        const Eigen::RowVectorXd residual = basis.col(k).transpose() * centered;
        for (int j = 0; j < n_r; ++j) coordinate[j] = residual[j];
      }
      h += SampleEntropy1d(coordinate, options.spacing, floor);
    }
    estimate.per_step_entropy.push_back(h);
    meta.directions.push_back(basis.leftCols(dims).transpose());
    meta.fallback.push_back(degenerate);
  }
  estimate.corrections = std::move(meta);
  return estimate;
}

MechanismEstimate Estimate(const MechanismId& mechanism,
                           const RolloutTensor& rollouts,
                           const EstimatorOptions& options) {
  const HumanOptimality beta(options.beta);
  switch (mechanism.kind) {
    case MechanismKind::kNoAssist:
      return EstimateNoAssist(rollouts, beta, options.spacing);
    case MechanismKind::kDiscrete:
      return EstimateDiscrete(rollouts, mechanism.arity, beta, options);
    case MechanismKind::kCorrections:
      return EstimateCorrections(rollouts, mechanism.arity, beta, options);
    case MechanismKind::kTeleop:
      return EstimateTeleop(rollouts.action_dims(), rollouts.horizon(), beta);
  }
  throw std::invalid_argument("unknown mechanism");
}

}  // namespace realm

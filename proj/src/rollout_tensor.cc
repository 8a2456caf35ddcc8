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

#include "realm/rollout_tensor.h"

#include <stdexcept>
#include <string>

namespace realm {

RolloutTensor::RolloutTensor(int action_dims, int rollouts, int horizon)
    : action_dims_(action_dims),
      rollouts_(rollouts),
      horizon_(horizon),
      data_(Eigen::MatrixXd::Zero(
          static_cast<Eigen::Index>(action_dims) * horizon, rollouts)) {
  if (action_dims < 1 || rollouts < 1 || horizon < 1) {
    throw std::invalid_argument("rollout tensor dimensions must be positive");
  }
}

RolloutTensor::RolloutTensor(int action_dims, int rollouts, int horizon,
                             Eigen::MatrixXd data)
    : action_dims_(action_dims),
      rollouts_(rollouts),
      horizon_(horizon),
      data_(std::move(data)) {
  if (action_dims < 1 || rollouts < 1 || horizon < 1) {
    throw std::invalid_argument("rollout tensor dimensions must be positive");
  }
  if (data_.rows() != static_cast<Eigen::Index>(action_dims) * horizon ||
      data_.cols() != rollouts) {
    throw std::invalid_argument(
        "rollout data has shape " + std::to_string(data_.rows()) + "x" +
        std::to_string(data_.cols()) + ", expected " +
        std::to_string(action_dims * horizon) + "x" + std::to_string(rollouts));
  }
  CheckFinite();
}

Eigen::MatrixXd RolloutTensor::Rollout(int n) const {
  return data_.col(n).reshaped(action_dims_, horizon_);
}

void RolloutTensor::CheckFinite() const {
  if (!data_.allFinite()) {
    throw std::invalid_argument("rollout tensor contains non-finite actions");
  }
}

}  // namespace realm

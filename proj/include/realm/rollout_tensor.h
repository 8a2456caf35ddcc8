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

#ifndef REALM_ROLLOUT_TENSOR_H_
#define REALM_ROLLOUT_TENSOR_H_

#include <Eigen/Core>

namespace realm {

// n_a x n_r x T_r sample of forecasted absolute actions. Stored as a
// (n_a * T_r) x n_r matrix: column n is rollout n flattened step-major, so a
// single forecast step is a contiguous n_a-row block.
class RolloutTensor {
 public:
  RolloutTensor() = default;
  RolloutTensor(int action_dims, int rollouts, int horizon);
  // Takes ownership of `data`; throws if the shape is wrong or any entry is
  // not finite.
  RolloutTensor(int action_dims, int rollouts, int horizon,
                Eigen::MatrixXd data);

  int action_dims() const { return action_dims_; }
  int rollouts() const { return rollouts_; }
  int horizon() const { return horizon_; }

  double& operator()(int dim, int rollout, int step) {
    return data_(step * action_dims_ + dim, rollout);
  }
  double operator()(int dim, int rollout, int step) const {
    return data_(step * action_dims_ + dim, rollout);
  }

  // Actions of every rollout at forecast step t (n_a x n_r).
  auto Step(int t) const {
    return data_.middleRows(static_cast<Eigen::Index>(t) * action_dims_,
                            action_dims_);
  }
  // Rollout n as an n_a x T_r matrix.
  Eigen::MatrixXd Rollout(int n) const;

  const Eigen::MatrixXd& flattened() const { return data_; }

  // Throws std::invalid_argument if any entry is NaN or infinite.
  void CheckFinite() const;

 private:
  int action_dims_ = 0;
  int rollouts_ = 0;
  int horizon_ = 0;
  Eigen::MatrixXd data_;
};

}  // namespace realm

#endif  // REALM_ROLLOUT_TENSOR_H_

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

#include <limits>

#include <gtest/gtest.h>

namespace realm {
namespace {

TEST(RolloutTensor, IndexingLayout) {
  RolloutTensor tensor(2, 3, 4);
  for (int d = 0; d < 2; ++d) {
    for (int n = 0; n < 3; ++n) {
      for (int t = 0; t < 4; ++t) tensor(d, n, t) = 100 * d + 10 * n + t;
    }
  }
  const auto step = tensor.Step(2);
  ASSERT_EQ(step.rows(), 2);
  ASSERT_EQ(step.cols(), 3);
  EXPECT_EQ(step(1, 2), 122);
  const Eigen::MatrixXd rollout = tensor.Rollout(1);
  ASSERT_EQ(rollout.rows(), 2);
  ASSERT_EQ(rollout.cols(), 4);
  EXPECT_EQ(rollout(0, 3), 13);
  EXPECT_EQ(rollout(1, 0), 110);
  EXPECT_EQ(tensor.flattened().rows(), 8);
}

TEST(RolloutTensor, RejectsBadShapeOrValues) {
  EXPECT_THROW(RolloutTensor(2, 3, 4, Eigen::MatrixXd::Zero(6, 3)),
               std::invalid_argument);
  Eigen::MatrixXd data = Eigen::MatrixXd::Zero(8, 3);
  data(5, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(RolloutTensor(2, 3, 4, data), std::invalid_argument);
  data(5, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(RolloutTensor(2, 3, 4, data), std::invalid_argument);
  EXPECT_THROW(RolloutTensor(0, 3, 4), std::invalid_argument);
}

TEST(RolloutTensor, CheckFiniteAfterMutation) {
  RolloutTensor tensor(1, 2, 2);
  EXPECT_NO_THROW(tensor.CheckFinite());
  tensor(0, 1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(tensor.CheckFinite(), std::invalid_argument);
}

}  // namespace
}  // namespace realm

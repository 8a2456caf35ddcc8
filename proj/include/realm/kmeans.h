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

#ifndef REALM_KMEANS_H_
#define REALM_KMEANS_H_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace realm {

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 100;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  std::vector<int> assignments;  // one per point
  Eigen::MatrixXd centroids;     // features x k
  std::vector<int> sizes;
  double objective = 0.0;  // sum of squared distances to assigned centroids
  int iterations = 0;      // of the winning restart
};

// Lloyd's algorithm over the columns of `points` (features x n) with
// `restarts` seeded restarts. Each restart seeds its first centroid from a
// random point and the rest by farthest-point selection; the restart with the
// lowest objective wins. Ties keep the earliest restart, so the result is
// deterministic for a fixed seed.
KMeansResult KMeans(const Eigen::Ref<const Eigen::MatrixXd>& points, int k,
                    const KMeansOptions& options = {});

}  // namespace realm

#endif  // REALM_KMEANS_H_

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

#include "realm/kmeans.h"

#include <limits>
#include <random>
#include <stdexcept>

#include "realm/random.h"

namespace realm {

namespace {

struct Run {
  std::vector<int> assignments;
  Eigen::MatrixXd centroids;
  double objective;
  int iterations;
};

Run Lloyd(const Eigen::Ref<const Eigen::MatrixXd>& points, int k, int first,
          int max_iterations) {
  const Eigen::Index n = points.cols();
  Eigen::MatrixXd centroids(points.rows(), k);
  centroids.col(0) = points.col(first);

  // Farthest-point seeding.
  Eigen::VectorXd nearest =
      (points.colwise() - centroids.col(0)).colwise().squaredNorm().transpose();
  for (int c = 1; c < k; ++c) {
    Eigen::Index far = 0;
    nearest.maxCoeff(&far);
    centroids.col(c) = points.col(far);
    nearest = nearest.cwiseMin(
        (points.colwise() - centroids.col(c)).colwise().squaredNorm().transpose());
  }

  std::vector<int> assignments(n, -1);
  Eigen::VectorXd distance(n);
  int iteration = 0;
  for (; iteration < max_iterations; ++iteration) {
    bool changed = false;
    for (Eigen::Index j = 0; j < n; ++j) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (points.col(j) - centroids.col(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      distance[j] = best_d;
      if (assignments[j] != best) {
        assignments[j] = best;
        changed = true;
      }
    }
    if (!changed) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(points.rows(), k);
    std::vector<int> sizes(k, 0);
    for (Eigen::Index j = 0; j < n; ++j) {
      sums.col(assignments[j]) += points.col(j);
      ++sizes[assignments[j]];
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[c] > 0) {
        centroids.col(c) = sums.col(c) / sizes[c];
        continue;
      }
      // Empty cluster: move it onto the point worst served by its centroid.
      Eigen::Index far = 0;
      distance.maxCoeff(&far);
      centroids.col(c) = points.col(far);
      distance[far] = 0.0;
      assignments[far] = -1;  // forces another assignment pass
    }
  }

  double objective = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (assignments[j] < 0) {
      // Left unassigned by an empty-cluster move on the last iteration.
      Eigen::Index best = 0;
      (centroids.colwise() - points.col(j)).colwise().squaredNorm().minCoeff(&best);
      assignments[j] = static_cast<int>(best);
    }
    objective += (points.col(j) - centroids.col(assignments[j])).squaredNorm();
  }
  return {std::move(assignments), std::move(centroids), objective, iteration};
}

}  // namespace

KMeansResult KMeans(const Eigen::Ref<const Eigen::MatrixXd>& points, int k,
                    const KMeansOptions& options) {
  const Eigen::Index n = points.cols();
  if (k < 1) throw std::invalid_argument("k-means needs k >= 1");
  if (n < k) {
    throw std::invalid_argument("k-means needs at least k points");
  }
  if (options.restarts < 1 || options.max_iterations < 1) {
    throw std::invalid_argument("k-means needs restarts and iterations >= 1");
  }

  Rng rng(options.seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
  Run best{{}, {}, std::numeric_limits<double>::infinity(), 0};
  for (int r = 0; r < options.restarts; ++r) {
    Run run = Lloyd(points, k, pick(rng), options.max_iterations);
    if (run.objective < best.objective) best = std::move(run);
  }

  KMeansResult result;
  result.sizes.assign(k, 0);
  for (int a : best.assignments) ++result.sizes[a];
  result.assignments = std::move(best.assignments);
  result.centroids = std::move(best.centroids);
  result.objective = best.objective;
  result.iterations = best.iterations;
  return result;
}

}  // namespace realm

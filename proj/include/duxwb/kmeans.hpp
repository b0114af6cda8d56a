// Copyright 2026 The duxwb Authors
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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace duxwb {

struct ClusterModel {
  std::vector<std::vector<double>> centroids;
  std::vector<int> assignment;
  std::vector<double> inertia_history;  // after each Lloyd iteration
  double inertia = 0.0;
  std::size_t reseeded = 0;  // empty clusters restarted from the farthest point

  int nearest(std::span<const double> x) const;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

/// k-means++ seeding followed by Lloyd iterations until assignments stop
/// changing (or max_iter). Deterministic for a given seed.
ClusterModel kmeans(const std::vector<std::vector<double>>& points, int k, std::uint64_t seed, int max_iter = 300);

}  // namespace duxwb

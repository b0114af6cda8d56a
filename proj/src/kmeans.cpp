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

#include "duxwb/kmeans.hpp"

#include <cmath>
#include <limits>

#include "duxwb/core.hpp"
#include "duxwb/rng.hpp"

namespace duxwb {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

int ClusterModel::nearest(std::span<const double> x) const {
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(x, centroids[c]);
    if (d < bd) {
      bd = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

ClusterModel kmeans(const std::vector<std::vector<double>>& points, int k, std::uint64_t seed, int max_iter) {
  const std::size_t n = points.size();
  if (k < 1) throw Error("kmeans: k must be >= 1");
  if (n < static_cast<std::size_t>(k)) throw Error("kmeans: fewer points than clusters");
  const std::size_t dim = points[0].size();
  for (const auto& p : points)
    if (p.size() != dim) throw Error("kmeans: points have different dimensions");

  Rng rng(mix_seed(seed, 0x63A45));
  ClusterModel m;
  m.centroids.push_back(points[rng.below(n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], m.centroids[0]);
  while (m.centroids.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        r -= d2[i];
        if (r < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    m.centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], m.centroids.back()));
  }

  m.assignment.assign(n, -1);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = m.nearest(points[i]);
      if (c != m.assignment[i]) {
        m.assignment[i] = c;
        changed = true;
      }
    }
    std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
    for (int a : m.assignment) ++count[static_cast<std::size_t>(a)];
    for (int c = 0; c < k; ++c) {
      if (count[static_cast<std::size_t>(c)] > 0) continue;
      // Restart the empty cluster at the point farthest from its centroid,
      // taking it from a cluster that keeps at least one member.
      std::size_t far = n;
      double fd = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (count[static_cast<std::size_t>(m.assignment[i])] < 2) continue;
        const double d = squared_distance(points[i], m.centroids[static_cast<std::size_t>(m.assignment[i])]);
        if (d > fd) {
          fd = d;
          far = i;
        }
      }
      if (far == n) continue;
      --count[static_cast<std::size_t>(m.assignment[far])];
      m.assignment[far] = c;
      count[static_cast<std::size_t>(c)] = 1;
      m.centroids[static_cast<std::size_t>(c)] = points[far];
      ++m.reseeded;
      changed = true;
    }
    std::vector<std::vector<double>> sum(static_cast<std::size_t>(k), std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < dim; ++j) sum[static_cast<std::size_t>(m.assignment[i])][j] += points[i][j];
    for (int c = 0; c < k; ++c) {
      const auto cnt = count[static_cast<std::size_t>(c)];
      if (cnt == 0) continue;
      for (std::size_t j = 0; j < dim; ++j)
        m.centroids[static_cast<std::size_t>(c)][j] = sum[static_cast<std::size_t>(c)][j] / static_cast<double>(cnt);
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      inertia += squared_distance(points[i], m.centroids[static_cast<std::size_t>(m.assignment[i])]);
    m.inertia = inertia;
    m.inertia_history.push_back(inertia);
    if (!changed) break;
  }
  return m;
}

}  // namespace duxwb

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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "duxwb/core.hpp"

namespace duxwb {
namespace {

using Vec3 = std::array<double, 3>;

Vec3 column(const Mat3& a, int j) { return {a(0, j), a(1, j), a(2, j)}; }

void set_column(Mat3& a, int j, const Vec3& v) {
  for (int i = 0; i < 3; ++i) a(i, j) = v[static_cast<std::size_t>(i)];
}

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross3(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 normalize3(const Vec3& v) {
  const double n = std::sqrt(dot3(v, v));
  return {v[0] / n, v[1] / n, v[2] / n};
}

// Unit vector orthogonal to u (unit).
Vec3 any_orthogonal(const Vec3& u) {
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(u[static_cast<std::size_t>(i)]) < std::abs(u[static_cast<std::size_t>(k)])) k = i;
  Vec3 e{0.0, 0.0, 0.0};
  e[static_cast<std::size_t>(k)] = 1.0;
  const double d = dot3(e, u);
  return normalize3({e[0] - d * u[0], e[1] - d * u[1], e[2] - d * u[2]});
}

}  // namespace

Svd3 svd3(const Mat3& input) {
  Mat3 a = input;
  Mat3 v = Mat3::identity();

  // One-sided Jacobi: rotate column pairs until all are mutually orthogonal.
  for (int sweep = 0; sweep < 64; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        const Vec3 ap = column(a, p), aq = column(a, q);
        const double alpha = dot3(ap, ap), beta = dot3(aq, aq), gamma = dot3(ap, aq);
        if (gamma == 0.0 || std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < 3; ++i) {
          const double x = a(i, p), y = a(i, q);
          a(i, p) = c * x - s * y;
          a(i, q) = s * x + c * y;
          const double vx = v(i, p), vy = v(i, q);
          v(i, p) = c * vx - s * vy;
          v(i, q) = s * vx + c * vy;
        }
      }
    if (!rotated) break;
  }

  std::array<double, 3> sigma{};
  for (int j = 0; j < 3; ++j) {
    const Vec3 col = column(a, j);
    sigma[static_cast<std::size_t>(j)] = std::sqrt(dot3(col, col));
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return sigma[static_cast<std::size_t>(x)] > sigma[static_cast<std::size_t>(y)];
  });

  Svd3 out;
  for (int j = 0; j < 3; ++j) {
    const int src = order[static_cast<std::size_t>(j)];
    out.s[static_cast<std::size_t>(j)] = sigma[static_cast<std::size_t>(src)];
    set_column(out.v, j, column(v, src));
  }
  const double tol = kRankTolerance * out.s[0];
  out.rank = 0;
  for (int j = 0; j < 3; ++j)
    if (out.s[static_cast<std::size_t>(j)] > tol && out.s[static_cast<std::size_t>(j)] > 0.0) ++out.rank;

  std::array<Vec3, 3> u{};
  for (int j = 0; j < out.rank; ++j) {
    const Vec3 col = column(a, order[static_cast<std::size_t>(j)]);
    const double s = out.s[static_cast<std::size_t>(j)];
    u[static_cast<std::size_t>(j)] = {col[0] / s, col[1] / s, col[2] / s};
  }
  if (out.rank == 0) {
    u = {Vec3{1.0, 0.0, 0.0}, Vec3{0.0, 1.0, 0.0}, Vec3{0.0, 0.0, 1.0}};
  } else if (out.rank == 1) {
    u[1] = any_orthogonal(u[0]);
    u[2] = cross3(u[0], u[1]);
  } else if (out.rank == 2) {
    u[2] = normalize3(cross3(u[0], u[1]));
  }
  for (int j = 0; j < 3; ++j) set_column(out.u, j, u[static_cast<std::size_t>(j)]);
  return out;
}

}  // namespace duxwb

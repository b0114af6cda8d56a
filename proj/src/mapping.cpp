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

#include "duxwb/def_feature.hpp"
#include "duxwb/kernels.hpp"

namespace duxwb {

std::array<double, 12> AffineMap::flattened() const {
  std::array<double, 12> out{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out[static_cast<std::size_t>(i * 4 + j)] = scale * rotation(i, j);
    out[static_cast<std::size_t>(i * 4 + 3)] = translation[static_cast<std::size_t>(i)];
  }
  return out;
}

std::array<double, 3> AffineMap::apply(std::span<const double, 3> x) const {
  auto y = rotation.apply(x);
  for (int i = 0; i < 3; ++i) y[i] = scale * y[i] + translation[i];
  return y;
}

AffineMap affine_map(const Mat3xK& source, const Mat3xK& target) {
  const std::size_t k = source.cols();
  if (target.cols() != k) throw Error("affine_map: source and target sizes differ");
  if (k < 4) throw Error("affine_map: at least 4 samples are required");
  const auto& kt = kernels::active();

  std::array<double, 3> cs{}, ct{};
  for (int c = 0; c < 3; ++c) {
    cs[c] = kt.sum(source.row(c).data(), k) / static_cast<double>(k);
    ct[c] = kt.sum(target.row(c).data(), k) / static_cast<double>(k);
  }
  double ss = 0.0, tt = 0.0, raw = 0.0;
  for (int c = 0; c < 3; ++c) {
    raw += kt.dot(source.row(c).data(), source.row(c).data(), k);
    ss += kt.centered_dot(source.row(c).data(), source.row(c).data(), cs[c], cs[c], k);
    tt += kt.centered_dot(target.row(c).data(), target.row(c).data(), ct[c], ct[c], k);
  }

  AffineMap out;
  out.rotation = Mat3::identity();
  // Coincident points leave only rounding noise in the centered spread.
  if (!(ss > 1e-20 * raw)) {
    out.degenerate = true;
    return out;
  }
  out.scale = std::sqrt(tt) / std::sqrt(ss);

  // Cross-covariance of centered target against centered source; its SVD
  // U S V^T gives the rotation U V^T taking source directions onto target.
  Mat3 cross;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      cross(i, j) = kt.centered_dot(target.row(i).data(), source.row(j).data(), ct[i], cs[j], k);
  Svd3 svd = svd3(cross);
  Mat3 rot = svd.u * svd.v.transposed();
  if (rot.determinant() < 0.0) {
    for (int i = 0; i < 3; ++i) svd.u(i, 2) = -svd.u(i, 2);
    rot = svd.u * svd.v.transposed();
  }
  out.rotation = rot;
  const auto rc = rot.apply(cs);
  for (int i = 0; i < 3; ++i) out.translation[i] = ct[i] - out.scale * rc[i];
  return out;
}

namespace {

// Cyclic Jacobi eigen-decomposition of a symmetric n x n matrix (row-major).
// Returns eigenvalues; eigenvectors are the columns of vecs.
std::vector<double> symmetric_eigen(std::vector<double> a, int n, std::vector<double>& vecs) {
  vecs.assign(static_cast<std::size_t>(n * n), 0.0);
  for (int i = 0; i < n; ++i) vecs[static_cast<std::size_t>(i * n + i)] = 1.0;
  auto at = [&](int r, int c) -> double& { return a[static_cast<std::size_t>(r * n + c)]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, total = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        total += at(p, q) * at(p, q);
        if (p != q) off += at(p, q) * at(p, q);
      }
    if (off <= 1e-30 * total) break;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int r = 0; r < n; ++r) {
          const double arp = at(r, p), arq = at(r, q);
          at(r, p) = c * arp - s * arq;
          at(r, q) = s * arp + c * arq;
        }
        for (int r = 0; r < n; ++r) {
          const double apr = at(p, r), aqr = at(q, r);
          at(p, r) = c * apr - s * aqr;
          at(q, r) = s * apr + c * aqr;
        }
        for (int r = 0; r < n; ++r) {
          double& vp = vecs[static_cast<std::size_t>(r * n + p)];
          double& vq = vecs[static_cast<std::size_t>(r * n + q)];
          const double x = vp, y = vq;
          vp = c * x - s * y;
          vq = s * x + c * y;
        }
      }
  }
  std::vector<double> evals(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) evals[static_cast<std::size_t>(i)] = at(i, i);
  return evals;
}

}  // namespace

HomographyMap homography_map(const Mat3xK& source_rg1, const Mat3xK& target_rg1) {
  const std::size_t k = source_rg1.cols();
  if (target_rg1.cols() != k) throw Error("homography_map: source and target sizes differ");
  if (k < 4) throw Error("homography_map: at least 4 correspondences are required");

  // Normal matrix A^T A of the DLT system, two rows per correspondence:
  //   [-x -y -w  0  0  0  u*x u*y u*w]
  //   [ 0  0  0 -x -y -w  v*x v*y v*w]
  // with source (x, y, w) and target (u, v) after perspective division.
  std::vector<double> ata(81, 0.0);
  std::array<double, 9> r1{}, r2{};
  for (std::size_t i = 0; i < k; ++i) {
    const double x = source_rg1(0, i), y = source_rg1(1, i), w = source_rg1(2, i);
    const double tw = target_rg1(2, i);
    if (tw == 0.0) continue;
    const double u = target_rg1(0, i) / tw, v = target_rg1(1, i) / tw;
    r1 = {-x, -y, -w, 0.0, 0.0, 0.0, u * x, u * y, u * w};
    r2 = {0.0, 0.0, 0.0, -x, -y, -w, v * x, v * y, v * w};
    for (int p = 0; p < 9; ++p)
      for (int q = p; q < 9; ++q) ata[static_cast<std::size_t>(p * 9 + q)] += r1[p] * r1[q] + r2[p] * r2[q];
  }
  for (int p = 0; p < 9; ++p)
    for (int q = 0; q < p; ++q) ata[static_cast<std::size_t>(p * 9 + q)] = ata[static_cast<std::size_t>(q * 9 + p)];

  std::vector<double> vecs;
  const std::vector<double> evals = symmetric_eigen(ata, 9, vecs);
  std::vector<int> order(9);
  for (int i = 0; i < 9; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return evals[static_cast<std::size_t>(a)] < evals[static_cast<std::size_t>(b)]; });

  HomographyMap out;
  const double largest = std::max(evals[static_cast<std::size_t>(order[8])], 0.0);
  // A second (near) null direction means the correspondences do not pin H down.
  out.degenerate = evals[static_cast<std::size_t>(order[1])] <= 1e-12 * largest;
  const int best = order[0];
  double norm = 0.0;
  for (int i = 0; i < 9; ++i) {
    out.h.m[static_cast<std::size_t>(i)] = vecs[static_cast<std::size_t>(i * 9 + best)];
    norm += out.h.m[static_cast<std::size_t>(i)] * out.h.m[static_cast<std::size_t>(i)];
  }
  const double h22 = out.h(2, 2);
  if (std::abs(h22) > 1e-12 * std::sqrt(norm)) {
    for (double& x : out.h.m) x /= h22;
  } else {
    out.degenerate = true;
  }
  return out;
}

}  // namespace duxwb

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

#include "duxwb/core.hpp"

#include <algorithm>
#include <cmath>

#include "duxwb/kernels.hpp"

namespace duxwb {

RawImage::RawImage(int w, int h, float fill)
    : width(w), height(h), data(3 * static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
  if (w < 0 || h < 0) throw Error("negative image dimensions");
}

std::span<float> RawImage::plane(int c) { return {data.data() + static_cast<std::size_t>(c) * pixels(), pixels()}; }

std::span<const float> RawImage::plane(int c) const {
  return {data.data() + static_cast<std::size_t>(c) * pixels(), pixels()};
}

void RawImage::validate() const {
  if (width < 0 || height < 0 || data.size() != 3 * pixels()) throw Error("raw image buffer does not match dimensions");
  for (float v : data)
    if (!std::isfinite(v) || v < 0.0f) throw Error("raw image contains a negative or non-finite value");
}

double Illuminant::norm() const { return std::sqrt(r * r + g * g + b * b); }

Illuminant Illuminant::normalized() const {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("cannot normalize a zero or non-finite illuminant");
  return {r / n, g / n, b / n};
}

Illuminant Illuminant::green_normalized() const {
  if (!(g > 0.0)) throw DomainError("illuminant green component must be positive");
  return {r / g, 1.0, b / g};
}

void DualExposurePair::validate() const {
  long_exposure.validate();
  short_exposure.validate();
  if (long_exposure.width != short_exposure.width || long_exposure.height != short_exposure.height)
    throw Error("long and short exposures have different dimensions");
  if (exposure_factor <= 1) throw Error("exposure factor must exceed 1");
}

Mat3 Mat3::identity() { return diag(1.0, 1.0, 1.0); }

Mat3 Mat3::diag(double a, double b, double c) {
  Mat3 out;
  out(0, 0) = a;
  out(1, 1) = b;
  out(2, 2) = c;
  return out;
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = (*this)(i, 0) * o(0, j) + (*this)(i, 1) * o(1, j) + (*this)(i, 2) * o(2, j);
  return out;
}

Mat3 Mat3::operator-(const Mat3& o) const {
  Mat3 out;
  for (std::size_t i = 0; i < 9; ++i) out.m[i] = m[i] - o.m[i];
  return out;
}

Mat3 Mat3::transposed() const {
  Mat3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = (*this)(j, i);
  return out;
}

double Mat3::frobenius() const {
  double s = 0.0;
  for (double x : m) s += x * x;
  return std::sqrt(s);
}

double Mat3::determinant() const {
  const auto& a = *this;
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

std::array<double, 3> Mat3::apply(std::span<const double, 3> v) const {
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) out[i] = (*this)(i, 0) * v[0] + (*this)(i, 1) * v[1] + (*this)(i, 2) * v[2];
  return out;
}

double angular_error(std::span<const double, 3> a, std::span<const double, 3> b) {
  const double na = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  const double nb = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
  if (!(na > 0.0) || !(nb > 0.0)) throw DomainError("angular error of a zero-norm vector");
  // atan2(|a x b|, a . b) equals acos of the clamped cosine, without its
  // loss of precision near 0 and 180 degrees.
  const double cx = a[1] * b[2] - a[2] * b[1];
  const double cy = a[2] * b[0] - a[0] * b[2];
  const double cz = a[0] * b[1] - a[1] * b[0];
  const double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
  const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  return std::atan2(cross, dot) * 180.0 / kPi;
}

double angular_error(const Illuminant& a, const Illuminant& b) {
  const auto x = a.rgb();
  const auto y = b.rgb();
  return angular_error(std::span<const double, 3>(x), std::span<const double, 3>(y));
}

AngularLoss angular_loss(std::span<const double, 3> prediction, const Illuminant& target) {
  const double ny = std::sqrt(prediction[0] * prediction[0] + prediction[1] * prediction[1] +
                              prediction[2] * prediction[2]);
  if (!(ny > 1e-12)) throw DomainError("degenerate prediction: norm below 1e-12");
  const Illuminant t = target.normalized();
  const std::array<double, 3> yh{prediction[0] / ny, prediction[1] / ny, prediction[2] / ny};
  const std::array<double, 3> th = t.rgb();
  AngularLoss out;
  out.degrees = angular_error(std::span<const double, 3>(yh), std::span<const double, 3>(th));

  const double c = yh[0] * th[0] + yh[1] * th[1] + yh[2] * th[2];
  const double limit = 1.0 - 1e-7;
  const double cc = std::clamp(c, -limit, limit);
  const double dacos = -1.0 / std::sqrt(1.0 - cc * cc) * 180.0 / kPi;
  for (int i = 0; i < 3; ++i) out.grad[i] = dacos * (th[i] - c * yh[i]) / ny;
  return out;
}

Mat3xK chromaticity_matrix(const RawImage& img, double eps) {
  const std::size_t k = img.pixels();
  Mat3xK out = Mat3xK::uninitialized(k);
  kernels::active().chromaticity(img.plane(0).data(), img.plane(1).data(), img.plane(2).data(), out.row(0).data(),
                                 out.row(1).data(), out.row(2).data(), k, eps);
  return out;
}

RawImage to_rgb_chromaticity(const RawImage& img, double eps) {
  if (eps < 0.0) throw Error("chromaticity epsilon must be non-negative");
  const Mat3xK m = chromaticity_matrix(img, eps);
  RawImage out(img.width, img.height);
  for (int c = 0; c < 3; ++c) {
    auto dst = out.plane(c);
    const auto src = m.row(c);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<float>(src[i]);
  }
  return out;
}

Mat3xK to_matrix(const RawImage& img) {
  Mat3xK out = Mat3xK::uninitialized(img.pixels());
  for (int c = 0; c < 3; ++c) std::copy(img.plane(c).begin(), img.plane(c).end(), out.row(c).begin());
  return out;
}

LeastSquaresMap pinv_map(const Mat3xK& source, const Mat3xK& target) {
  const std::size_t k = source.cols();
  if (target.cols() != k) throw Error("pinv_map: source and target sizes differ");
  if (k < 3) throw Error("pinv_map: at least 3 samples are required");
  const auto& kt = kernels::active();

  // Normal equations, accumulated blockwise so the rows stay in cache. They
  // square the condition number, so only well-conditioned sources use them.
  {
    constexpr std::size_t block = 2048;
    Mat3 gram, cross;
    for (std::size_t b = 0; b < k; b += block) {
      const std::size_t len = std::min(block, k - b);
      for (int i = 0; i < 3; ++i) {
        const double* si = source.row(i).data() + b;
        for (int j = i; j < 3; ++j) gram(i, j) += kt.dot(si, source.row(j).data() + b, len);
        for (int j = 0; j < 3; ++j) cross(j, i) += kt.dot(target.row(j).data() + b, si, len);
      }
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < i; ++j) gram(i, j) = gram(j, i);
    const Svd3 g = svd3(gram);
    if (g.rank == 3 && g.s[2] > 1e-8 * g.s[0]) {
      Mat3 inv;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double v = 0.0;
          for (int l = 0; l < 3; ++l) v += g.v(i, l) * g.u(j, l) / g.s[static_cast<std::size_t>(l)];
          inv(i, j) = v;
        }
      return {cross * inv, 3};
    }
  }

  // Householder QR of A = source^T (k x 3): column j of A is source row j.
  // The same reflectors are applied to every target row, which yields
  // (target * Q)^T in the first three entries of each reflected row.
  Mat3xK a = source;
  Mat3xK t = target;
  std::vector<double> v(k);
  Mat3 r;
  for (int j = 0; j < 3; ++j) {
    const std::size_t len = k - static_cast<std::size_t>(j);
    double* col = a.row(j).data() + j;
    const double norm = std::sqrt(kt.dot(col, col, len));
    if (norm == 0.0) continue;
    const double alpha = col[0] > 0.0 ? -norm : norm;
    std::copy(col, col + len, v.begin());
    v[0] -= alpha;
    const double vv = kt.dot(v.data(), v.data(), len);
    if (vv == 0.0) continue;
    auto reflect = [&](double* x) { kt.axpy(-2.0 * kt.dot(v.data(), x, len) / vv, v.data(), x, len); };
    for (int jj = j; jj < 3; ++jj) reflect(a.row(jj).data() + j);
    for (int i = 0; i < 3; ++i) reflect(t.row(i).data() + j);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) r(i, j) = a(j, static_cast<std::size_t>(i));

  Mat3 tq;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) tq(i, j) = t(i, static_cast<std::size_t>(j));

  // source^+ = Q (R^T)^+ and, with R = U S V^T, (R^T)^+ = U S^+ V^T.
  const Svd3 svd = svd3(r);
  Mat3 rt_pinv;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int l = 0; l < svd.rank; ++l) s += svd.u(i, l) * svd.v(j, l) / svd.s[static_cast<std::size_t>(l)];
      rt_pinv(i, j) = s;
    }
  return {tq * rt_pinv, svd.rank};
}

Mat3 covariance3(const Mat3xK& x) {
  const std::size_t k = x.cols();
  if (k < 2) throw Error("covariance3: at least 2 samples are required");
  const auto& kt = kernels::active();
  std::array<double, 3> mean{};
  for (int c = 0; c < 3; ++c) mean[c] = kt.sum(x.row(c).data(), k) / static_cast<double>(k);
  Mat3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      out(i, j) = kt.centered_dot(x.row(i).data(), x.row(j).data(), mean[i], mean[j], k) / static_cast<double>(k);
      out(j, i) = out(i, j);
    }
  return out;
}

namespace {

struct LerpTaps {
  std::vector<int> i0;
  std::vector<double> f;
};

LerpTaps lerp_taps(int m, int n) {
  LerpTaps t;
  t.i0.resize(static_cast<std::size_t>(n));
  t.f.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double s = n == 1 ? 0.0 : static_cast<double>(i) * (m - 1) / (n - 1);
    int lo = std::min(static_cast<int>(std::floor(s)), m - 2);
    t.i0[static_cast<std::size_t>(i)] = lo;
    t.f[static_cast<std::size_t>(i)] = s - lo;
  }
  return t;
}

}  // namespace

Grid bilinear_upsample(const Grid& grid, int factor) {
  const int m = grid.rows;
  if (grid.cols != m) throw Error("bilinear_upsample expects a square grid");
  if (m < 2 || factor < 1) throw Error("bilinear_upsample requires m >= 2 and factor >= 1");
  if (factor == 1) return grid;
  const int n = m * factor;
  const LerpTaps taps = lerp_taps(m, n);

  // Columns first (m x n), then rows.
  Grid wide(m, n);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) {
      const int c0 = taps.i0[static_cast<std::size_t>(c)];
      const double a = grid(r, c0);
      wide(r, c) = a + taps.f[static_cast<std::size_t>(c)] * (grid(r, c0 + 1) - a);
    }
  Grid out(n, n);
  for (int r = 0; r < n; ++r) {
    const int r0 = taps.i0[static_cast<std::size_t>(r)];
    const double f = taps.f[static_cast<std::size_t>(r)];
    for (int c = 0; c < n; ++c) {
      const double a = wide(r0, c);
      out(r, c) = a + f * (wide(r0 + 1, c) - a);
    }
  }
  return out;
}

Grid bilinear_upsample_adjoint(const Grid& grad, int source_size, int factor) {
  const int m = source_size;
  const int n = m * factor;
  if (grad.rows != n || grad.cols != n) throw Error("bilinear_upsample_adjoint: gradient size mismatch");
  if (factor == 1) return grad;
  const LerpTaps taps = lerp_taps(m, n);

  Grid wide(m, n);
  for (int r = 0; r < n; ++r) {
    const int r0 = taps.i0[static_cast<std::size_t>(r)];
    const double f = taps.f[static_cast<std::size_t>(r)];
    for (int c = 0; c < n; ++c) {
      const double g = grad(r, c);
      wide(r0, c) += (1.0 - f) * g;
      wide(r0 + 1, c) += f * g;
    }
  }
  Grid out(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) {
      const int c0 = taps.i0[static_cast<std::size_t>(c)];
      const double f = taps.f[static_cast<std::size_t>(c)];
      const double g = wide(r, c);
      out(r, c0) += (1.0 - f) * g;
      out(r, c0 + 1) += f * g;
    }
  return out;
}

}  // namespace duxwb

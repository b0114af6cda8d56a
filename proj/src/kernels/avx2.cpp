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

#include "duxwb/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <algorithm>

namespace duxwb::kernels {
namespace {

// Lane order is fixed: ((l0 + l1) + (l2 + l3)).
inline double fold(__m256d v) {
  alignas(32) double l[4];
  _mm256_store_pd(l, v);
  return (l[0] + l[1]) + (l[2] + l[3]);
}

void ratio(const float* num, const float* den, double* out, std::size_t n, double eps) {
  const __m256d e = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_cvtps_pd(_mm_loadu_ps(num + i));
    const __m256d b = _mm256_cvtps_pd(_mm_loadu_ps(den + i));
    _mm256_storeu_pd(out + i, _mm256_div_pd(a, _mm256_add_pd(b, e)));
  }
  for (; i < n; ++i) out[i] = static_cast<double>(num[i]) / (static_cast<double>(den[i]) + eps);
}

void chromaticity(const float* r, const float* g, const float* b, double* out_r, double* out_g, double* out_b,
                  std::size_t n, double eps) {
  const __m256d e = _mm256_set1_pd(eps);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d rr = _mm256_cvtps_pd(_mm_loadu_ps(r + i));
    const __m256d gg = _mm256_cvtps_pd(_mm_loadu_ps(g + i));
    const __m256d bb = _mm256_cvtps_pd(_mm_loadu_ps(b + i));
    const __m256d k = _mm256_add_pd(_mm256_add_pd(_mm256_add_pd(rr, gg), bb), e);
    const __m256d positive = _mm256_cmp_pd(k, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(out_r + i, _mm256_and_pd(positive, _mm256_div_pd(rr, k)));
    _mm256_storeu_pd(out_g + i, _mm256_and_pd(positive, _mm256_div_pd(gg, k)));
    _mm256_storeu_pd(out_b + i, _mm256_and_pd(positive, _mm256_div_pd(bb, k)));
  }
  if (i < n) scalar_table().chromaticity(r + i, g + i, b + i, out_r + i, out_g + i, out_b + i, n - i, eps);
}

double sum(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double s = fold(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = fold(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double centered_dot(const double* a, const double* b, double ma, double mb, std::size_t n) {
  const __m256d va = _mm256_set1_pd(ma);
  const __m256d vb = _mm256_set1_pd(mb);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_sub_pd(_mm256_loadu_pd(a + i), va);
    const __m256d y = _mm256_sub_pd(_mm256_loadu_pd(b + i), vb);
    acc = _mm256_fmadd_pd(x, y, acc);
  }
  double s = fold(acc);
  for (; i < n; ++i) s += (a[i] - ma) * (b[i] - mb);
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d al = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(al, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_clip(float* data, std::size_t n, float gain, float lo, float hi) {
  const __m256 gn = _mm256_set1_ps(gain);
  const __m256 l = _mm256_set1_ps(lo);
  const __m256 h = _mm256_set1_ps(hi);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_mul_ps(_mm256_loadu_ps(data + i), gn);
    _mm256_storeu_ps(data + i, _mm256_min_ps(_mm256_max_ps(v, l), h));
  }
  for (; i < n; ++i) data[i] = std::clamp(data[i] * gain, lo, hi);
}

}  // namespace

namespace detail {
const KernelTable* avx2_table() {
  static const KernelTable t{Isa::avx2, ratio, chromaticity, sum, dot, centered_dot, axpy, scale_clip};
  return &t;
}
}  // namespace detail

}  // namespace duxwb::kernels

#else

namespace duxwb::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace duxwb::kernels::detail

#endif

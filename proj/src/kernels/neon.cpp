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

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

#include <algorithm>

namespace duxwb::kernels {
namespace {

// Two float64x2 accumulators, folded as ((a0 + a1) + (b0 + b1)).
inline double fold(float64x2_t a, float64x2_t b) {
  return (vgetq_lane_f64(a, 0) + vgetq_lane_f64(a, 1)) + (vgetq_lane_f64(b, 0) + vgetq_lane_f64(b, 1));
}

void ratio(const float* num, const float* den, double* out, std::size_t n, double eps) {
  const float64x2_t e = vdupq_n_f64(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t a = vld1q_f32(num + i);
    const float32x4_t b = vld1q_f32(den + i);
    vst1q_f64(out + i, vdivq_f64(vcvt_f64_f32(vget_low_f32(a)), vaddq_f64(vcvt_f64_f32(vget_low_f32(b)), e)));
    vst1q_f64(out + i + 2, vdivq_f64(vcvt_high_f64_f32(a), vaddq_f64(vcvt_high_f64_f32(b), e)));
  }
  for (; i < n; ++i) out[i] = static_cast<double>(num[i]) / (static_cast<double>(den[i]) + eps);
}

void chromaticity(const float* r, const float* g, const float* b, double* out_r, double* out_g, double* out_b,
                  std::size_t n, double eps) {
  const float64x2_t e = vdupq_n_f64(eps);
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t rr = vcvt_f64_f32(vld1_f32(r + i));
    const float64x2_t gg = vcvt_f64_f32(vld1_f32(g + i));
    const float64x2_t bb = vcvt_f64_f32(vld1_f32(b + i));
    const float64x2_t k = vaddq_f64(vaddq_f64(vaddq_f64(rr, gg), bb), e);
    const uint64x2_t positive = vcgtq_f64(k, zero);
    vst1q_f64(out_r + i, vbslq_f64(positive, vdivq_f64(rr, k), zero));
    vst1q_f64(out_g + i, vbslq_f64(positive, vdivq_f64(gg, k), zero));
    vst1q_f64(out_b + i, vbslq_f64(positive, vdivq_f64(bb, k), zero));
  }
  if (i < n) scalar_table().chromaticity(r + i, g + i, b + i, out_r + i, out_g + i, out_b + i, n - i, eps);
}

double sum(const double* a, std::size_t n) {
  float64x2_t s0 = vdupq_n_f64(0.0), s1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = vaddq_f64(s0, vld1q_f64(a + i));
    s1 = vaddq_f64(s1, vld1q_f64(a + i + 2));
  }
  double s = fold(s0, s1);
  for (; i < n; ++i) s += a[i];
  return s;
}

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t s0 = vdupq_n_f64(0.0), s1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = vfmaq_f64(s0, vld1q_f64(a + i), vld1q_f64(b + i));
    s1 = vfmaq_f64(s1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = fold(s0, s1);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double centered_dot(const double* a, const double* b, double ma, double mb, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(ma), vb = vdupq_n_f64(mb);
  float64x2_t s0 = vdupq_n_f64(0.0), s1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = vfmaq_f64(s0, vsubq_f64(vld1q_f64(a + i), va), vsubq_f64(vld1q_f64(b + i), vb));
    s1 = vfmaq_f64(s1, vsubq_f64(vld1q_f64(a + i + 2), va), vsubq_f64(vld1q_f64(b + i + 2), vb));
  }
  double s = fold(s0, s1);
  for (; i < n; ++i) s += (a[i] - ma) * (b[i] - mb);
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t al = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), al, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_clip(float* data, std::size_t n, float gain, float lo, float hi) {
  const float32x4_t gn = vdupq_n_f32(gain), l = vdupq_n_f32(lo), h = vdupq_n_f32(hi);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(data + i, vminq_f32(vmaxq_f32(vmulq_f32(vld1q_f32(data + i), gn), l), h));
  for (; i < n; ++i) data[i] = std::clamp(data[i] * gain, lo, hi);
}

}  // namespace

namespace detail {
const KernelTable* neon_table() {
  static const KernelTable t{Isa::neon, ratio, chromaticity, sum, dot, centered_dot, axpy, scale_clip};
  return &t;
}
}  // namespace detail

}  // namespace duxwb::kernels

#else

namespace duxwb::kernels::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace duxwb::kernels::detail

#endif

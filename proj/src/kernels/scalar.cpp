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

#include "duxwb/kernels.hpp"

namespace duxwb::kernels {
namespace {

void ratio(const float* num, const float* den, double* out, std::size_t n, double eps) {
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(num[i]) / (static_cast<double>(den[i]) + eps);
}

void chromaticity(const float* r, const float* g, const float* b, double* out_r, double* out_g, double* out_b,
                  std::size_t n, double eps) {
  for (std::size_t i = 0; i < n; ++i) {
    const double rr = r[i], gg = g[i], bb = b[i];
    const double k = rr + gg + bb + eps;
    if (k > 0.0) {
      out_r[i] = rr / k;
      out_g[i] = gg / k;
      out_b[i] = bb / k;
    } else {
      out_r[i] = out_g[i] = out_b[i] = 0.0;
    }
  }
}

double sum(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double centered_dot(const double* a, const double* b, double ma, double mb, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (a[i] - ma) * (b[i] - mb);
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_clip(float* data, std::size_t n, float gain, float lo, float hi) {
  for (std::size_t i = 0; i < n; ++i) data[i] = std::clamp(data[i] * gain, lo, hi);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{Isa::scalar, ratio, chromaticity, sum, dot, centered_dot, axpy, scale_clip};
  return t;
}

}  // namespace duxwb::kernels

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

// Pixel-loop kernels. Every kernel has a scalar reference implementation and
// optional AVX2 / NEON variants; the variant is picked once at runtime from
// CPU features (override with DUXWB_ISA=scalar|avx2|neon).
//
// The scalar variants reduce strictly left to right. Vector variants keep
// per-lane partial sums and fold them in a fixed lane order, so each variant
// is deterministic on its own but may differ from scalar in the last bits.

#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace duxwb::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  // out[i] = num[i] / (den[i] + eps), widened to double.
  void (*ratio)(const float* num, const float* den, double* out, std::size_t n, double eps);
  // out_c[i] = in_c[i] / (r[i] + g[i] + b[i] + eps), widened to double.
  void (*chromaticity)(const float* r, const float* g, const float* b, double* out_r, double* out_g,
                       double* out_b, std::size_t n, double eps);
  double (*sum)(const double* a, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i (a[i] - ma) * (b[i] - mb)
  double (*centered_dot)(const double* a, const double* b, double ma, double mb, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // data[i] = clamp(data[i] * gain, lo, hi)
  void (*scale_clip)(float* data, std::size_t n, float gain, float lo, float hi);
};

const KernelTable& scalar_table();
/// Variants compiled into this binary and usable on this CPU, scalar first.
std::vector<Isa> supported_isas();
const KernelTable& table(Isa isa);
/// The table selected for this process.
const KernelTable& active();

namespace detail {
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();
}  // namespace detail

}  // namespace duxwb::kernels

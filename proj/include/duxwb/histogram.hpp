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

// Log-chroma histograms over u = log(G/R), v = log(G/B).

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "duxwb/core.hpp"

namespace duxwb {

constexpr double kHistMin = -2.85;
constexpr double kHistMax = 2.85;

/// (b_max - b_min) / h.
double bin_width(int h);
/// Center of bin idx on an h-bin axis.
double bin_center(int h, int idx);
/// floor((x - b_min) / width), clamped to [0, h - 1].
int bin_index(int h, double x);

struct ChromaHistogram {
  Grid mass;  // rows index u, columns index v
  double total = 0.0;
  std::size_t counted = 0;
  std::size_t skipped = 0;  // pixels with a non-positive channel

  int size() const { return mass.rows; }
};

/// Every pixel with all channels > 0 adds its Euclidean norm to its (u, v) bin.
ChromaHistogram build_histogram(const RawImage& img, int h = 64);

/// Histogram scaled to unit total mass. Throws DomainError when empty.
Grid normalized_mass(const ChromaHistogram& hist);

/// Nonzero bins of a histogram; compact storage for training sets.
struct SparseHistogram {
  int size = 0;
  std::vector<std::uint32_t> index;
  std::vector<double> mass;

  static SparseHistogram from_grid(const Grid& g);
  Grid dense() const;
};

/// (u, v) = (log(g/r), log(g/b)) of an illuminant with positive channels.
std::array<double, 2> illuminant_to_uv(const Illuminant& l);
/// Inverse of illuminant_to_uv, unit norm.
Illuminant uv_to_illuminant(double u, double v);

}  // namespace duxwb

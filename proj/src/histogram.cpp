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

#include "duxwb/histogram.hpp"

#include <algorithm>
#include <cmath>

namespace duxwb {

double bin_width(int h) { return (kHistMax - kHistMin) / h; }

double bin_center(int h, int idx) { return kHistMin + (idx + 0.5) * bin_width(h); }

int bin_index(int h, double x) {
  const double f = std::floor((x - kHistMin) / bin_width(h));
  if (!(f >= 0.0)) return 0;
  if (f >= h - 1) return h - 1;
  return static_cast<int>(f);
}

ChromaHistogram build_histogram(const RawImage& img, int h) {
  if (h < 2) throw Error("histogram size must be at least 2");
  ChromaHistogram out;
  out.mass = Grid(h, h);
  const auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  for (std::size_t i = 0; i < img.pixels(); ++i) {
    const double rr = r[i], gg = g[i], bb = b[i];
    if (!(rr > 0.0 && gg > 0.0 && bb > 0.0)) {
      ++out.skipped;
      continue;
    }
    const int iu = bin_index(h, std::log(gg / rr));
    const int iv = bin_index(h, std::log(gg / bb));
    const double w = std::sqrt(rr * rr + gg * gg + bb * bb);
    out.mass(iu, iv) += w;
    out.total += w;
    ++out.counted;
  }
  return out;
}

Grid normalized_mass(const ChromaHistogram& hist) {
  if (!(hist.total > 0.0)) throw DomainError("histogram has no valid pixels");
  Grid out = hist.mass;
  for (double& v : out.v) v /= hist.total;
  return out;
}

SparseHistogram SparseHistogram::from_grid(const Grid& g) {
  SparseHistogram s;
  s.size = g.rows;
  for (std::size_t i = 0; i < g.v.size(); ++i)
    if (g.v[i] != 0.0) {
      s.index.push_back(static_cast<std::uint32_t>(i));
      s.mass.push_back(g.v[i]);
    }
  return s;
}

Grid SparseHistogram::dense() const {
  Grid g(size, size);
  for (std::size_t i = 0; i < index.size(); ++i) g.v[index[i]] = mass[i];
  return g;
}

std::array<double, 2> illuminant_to_uv(const Illuminant& l) {
  if (!(l.r > 0.0 && l.g > 0.0 && l.b > 0.0)) throw DomainError("log-chroma needs positive channels");
  return {std::log(l.g / l.r), std::log(l.g / l.b)};
}

Illuminant uv_to_illuminant(double u, double v) {
  const double r = std::exp(-u), b = std::exp(-v);
  const double q = std::sqrt(r * r + b * b + 1.0);
  return {r / q, 1.0 / q, b / q};
}

}  // namespace duxwb

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

#pragma once

#include <complex>
#include <vector>

#include "duxwb/core.hpp"

namespace duxwb {

/// Same-size 2D cross-correlation of h x h grids with zero padding, computed
/// through real FFTs of size 2h:
///
///   out[y][x] = sum_{a,b} f[a][b] * g[y + a - c][x + b - c],   c = h / 2.
///
/// Also provides the filter gradient of that map. Instances are immutable
/// and safe to share between threads.
class SpectralCorrelator {
 public:
  using Spectrum = std::vector<std::complex<double>>;

  explicit SpectralCorrelator(int h);
  ~SpectralCorrelator();
  SpectralCorrelator(const SpectralCorrelator&) = delete;
  SpectralCorrelator& operator=(const SpectralCorrelator&) = delete;

  int size() const { return h_; }

  /// Spectrum of a signal grid (histogram or upstream gradient).
  Spectrum signal_spectrum(const Grid& g) const;
  /// Spectrum of a filter laid out by displacement a - c.
  Spectrum filter_spectrum(const Grid& f) const;

  /// Adds conj(filter) * signal into acc.
  static void accumulate(Spectrum& acc, const Spectrum& filter, const Spectrum& signal);
  /// Spatial result of an accumulated product spectrum.
  Grid correlation(const Spectrum& product) const;

  /// d out / d f contracted with an upstream gradient:
  ///   df[a][b] = sum_{y,x} grad[y][x] * g[y + a - c][x + b - c].
  Grid filter_gradient(const Spectrum& signal, const Spectrum& grad) const;

  /// Convenience: one filter over one grid.
  Grid correlate(const Grid& g, const Grid& f) const;

 private:
  Spectrum forward(std::vector<double>& padded) const;
  std::vector<double> inverse(const Spectrum& s) const;

  int h_;
  int n_;
  void* plan_r2c_ = nullptr;
  void* plan_c2r_ = nullptr;
};

/// Shared correlator for a given grid size.
const SpectralCorrelator& correlator_for(int h);

}  // namespace duxwb

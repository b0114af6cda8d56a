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

// Exposure-based convolutional color constancy: learned filters over
// log-chroma histograms of both frames plus a bias map interpolated from a
// bank by a small network on the DEF vector.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "duxwb/core.hpp"
#include "duxwb/def_feature.hpp"
#include "duxwb/fft_correlate.hpp"
#include "duxwb/histogram.hpp"
#include "duxwb/mlp.hpp"
#include "duxwb/params.hpp"

namespace duxwb {

/// Which histograms feed the filters.
enum class HistogramInput { both, average, short_only, long_only };

std::string_view to_string(HistogramInput v);
HistogramInput parse_histogram_input(std::string_view s);

struct EcccConfig {
  int hist_size = 64;
  int n_biases = 20;
  HistogramInput input = HistogramInput::both;
  // false: a single learnable full-resolution bias replaces the bank and
  // its weighting network.
  bool use_def = true;
  double lambda_bias = 0.01;
  double lambda_filter = 0.02;
  double leaky_slope = 0.01;
  DefConfig def;

  int filter_size() const { return hist_size / 4; }
  int filter_count() const { return input == HistogramInput::both ? 2 : 1; }
  void validate() const;
};

/// Per-sample model input. Histograms are unit-mass, ordered as the filters
/// (long before short when both are used).
struct EcccInputs {
  std::vector<SparseHistogram> histograms;
  std::vector<double> def;
};

/// Builds histograms (and the DEF vector unless given) for a pair.
EcccInputs make_eccc_inputs(const EcccConfig& cfg, const DualExposurePair& pair, const DefVector* def = nullptr);

struct EcccOutput {
  Illuminant illuminant;
  Grid probability;
  double lu = 0.0;
  double lv = 0.0;
};

struct EcccLoss {
  double angular = 0.0;
  double smooth_bias = 0.0;
  double smooth_filter = 0.0;

  double total() const { return angular + smooth_bias + smooth_filter; }
};

/// Expected (u, v) under P at bin centers, mapped back to a unit illuminant.
EcccOutput decode_probability(Grid probability);

/// Squared norms of the 'valid' 3x3 Sobel responses along rows and columns.
double sobel_energy(const Grid& g);
/// Adds scale * d(sobel_energy)/dg into grad.
void sobel_energy_grad(const Grid& g, double scale, Grid& grad);

class EcccModel {
 public:
  /// Parameter-dependent quantities shared by all samples of a step.
  struct Prepared {
    std::vector<Grid> filters_up;
    std::vector<SpectralCorrelator::Spectrum> filter_spectra;
  };

  explicit EcccModel(EcccConfig cfg = {});

  const EcccConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }
  /// Transform applied to the DEF before the bias-weight MLP; not a parameter.
  const DefNormalizer& normalizer() const { return norm_; }
  void set_normalizer(DefNormalizer n);

  /// Filter tensor names in histogram order.
  const std::vector<std::string>& filter_names() const { return filter_names_; }

  /// Zero filters and biases, Glorot weights for the bias network.
  void init(std::uint64_t seed);

  Prepared prepare() const;

  EcccOutput forward(const Prepared& prep, const EcccInputs& in) const;
  EcccOutput forward(const EcccInputs& in) const { return forward(prepare(), in); }
  Illuminant predict(const DualExposurePair& pair) const;

  /// Loss against gt with d(loss)/d(params) added into grad. The filter
  /// smoothness term does not depend on the sample; pass
  /// with_filter_smoothness = false to add it once per batch instead.
  EcccLoss loss_and_grad(const Prepared& prep, const EcccInputs& in, const Illuminant& gt, std::span<double> grad,
                         bool with_filter_smoothness = true) const;
  /// lambda_F * sum over upsampled filters of sobel_energy, gradient added into grad.
  double filter_smoothness(const Prepared& prep, std::span<double> grad) const;

  /// Mixing weights of the bias bank for a DEF vector (softmax of the network).
  std::vector<double> bias_weights(std::span<const double> def) const;

 private:
  struct Forward;
  void run(const Prepared& prep, const EcccInputs& in, Forward& f) const;

  EcccConfig cfg_;
  ParamStore params_;
  Mlp mlp_;
  DefNormalizer norm_;
  std::vector<std::string> filter_names_;
};

/// Parameter count for a configuration.
std::size_t eccc_param_count(const EcccConfig& cfg);

}  // namespace duxwb

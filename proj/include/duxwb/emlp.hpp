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

#include <array>
#include <cstdint>
#include <span>

#include "duxwb/core.hpp"
#include "duxwb/def_feature.hpp"
#include "duxwb/mlp.hpp"
#include "duxwb/params.hpp"

namespace duxwb {

struct EmlpConfig {
  DefConfig def;
  double leaky_slope = 0.01;

  int input_size() const { return def.length(); }
};

/// Exposure-based MLP: maps a DEF vector straight to an illuminant.
class EmlpModel {
 public:
  explicit EmlpModel(EmlpConfig cfg = {});

  const EmlpConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const Mlp& mlp() const { return mlp_; }
  std::size_t param_count() const { return params_.size(); }
  /// Input transform applied before the first layer; not a parameter.
  const DefNormalizer& normalizer() const { return norm_; }
  void set_normalizer(DefNormalizer n);

  /// Glorot-uniform weights and zero biases, rounded to float32.
  void init(std::uint64_t seed);

  /// Network output before normalization.
  std::array<double, 3> forward_raw(std::span<const double> def) const;
  /// Unit-norm illuminant. Throws DomainError when the raw output is ~0.
  Illuminant predict(std::span<const double> def) const;
  /// Angular loss in degrees; d(loss)/d(params) is added to grad.
  double loss_and_grad(std::span<const double> def, const Illuminant& gt, std::span<double> grad) const;

 private:
  EmlpConfig cfg_;
  ParamStore params_;
  Mlp mlp_;
  DefNormalizer norm_;
};

/// Scalar parameter count of the 4-layer network for a given input width.
std::size_t emlp_param_count(int d_in);

}  // namespace duxwb

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
#include <span>
#include <string>
#include <vector>

#include "duxwb/params.hpp"
#include "duxwb/rng.hpp"

namespace duxwb {

/// Four fully connected layers, d_in -> 9 -> 9 -> 9 -> d_out, with LeakyReLU
/// between them and a linear output. Parameters live in a ParamStore under
/// "<prefix>fc{1..4}.weight" ([out, in], row-major) and ".bias".
struct MlpShape {
  int d_in = 15;
  int d_out = 3;
  int hidden = 9;
};

class Mlp {
 public:
  struct Trace {
    std::array<std::vector<double>, 4> input;  // input to each layer
    std::array<std::vector<double>, 4> pre;  // affine output of each layer
  };

  Mlp() = default;
  Mlp(MlpShape shape, ParamStore& store, const std::string& prefix, double leaky_slope);

  static std::size_t param_count(MlpShape shape);
  const MlpShape& shape() const { return shape_; }
  double leaky_slope() const { return slope_; }

  /// Returns the raw output; fills trace for a later backward pass.
  std::vector<double> forward(std::span<const double> params, std::span<const double> x, Trace* trace = nullptr) const;
  /// Accumulates d(loss)/d(params) into grad given d(loss)/d(output).
  void backward(std::span<const double> params, const Trace& trace, std::span<const double> grad_out,
                std::span<double> grad) const;
  /// Glorot-uniform weights, zero biases.
  void init_glorot(std::span<double> params, Rng& rng) const;

 private:
  MlpShape shape_;
  double slope_ = 0.01;
  std::array<int, 5> dims_{};
  std::array<std::size_t, 4> w_off_{};
  std::array<std::size_t, 4> b_off_{};
};

}  // namespace duxwb

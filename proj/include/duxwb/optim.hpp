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

#include <cstdint>
#include <span>
#include <vector>

namespace duxwb {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled: p -= lr * wd * p
};

class Adam {
 public:
  Adam(std::size_t n, AdamConfig cfg = {});

  /// One update with bias correction. Returns false and leaves everything
  /// untouched when the gradient has a non-finite entry.
  bool step(std::span<double> params, std::span<const double> grad, double lr);

  std::int64_t steps() const { return t_; }
  std::size_t rejected() const { return rejected_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::int64_t t_ = 0;
  std::size_t rejected_ = 0;
};

/// lr_min + (lr_max - lr_min) * (1 + cos(pi * epoch / epochs)) / 2.
double cosine_lr(double lr_max, double lr_min, int epoch, int epochs);

}  // namespace duxwb

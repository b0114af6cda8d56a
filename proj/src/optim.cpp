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

#include "duxwb/optim.hpp"

#include <cmath>

#include "duxwb/core.hpp"

namespace duxwb {

Adam::Adam(std::size_t n, AdamConfig cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

bool Adam::step(std::span<double> params, std::span<const double> grad, double lr) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw Error("Adam: parameter size mismatch");
  for (double g : grad)
    if (!std::isfinite(g)) {
      ++rejected_;
      return false;
    }
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
    const double mh = m_[i] / c1, vh = v_[i] / c2;
    params[i] -= lr * (mh / (std::sqrt(vh) + cfg_.eps) + cfg_.weight_decay * params[i]);
  }
  return true;
}

double cosine_lr(double lr_max, double lr_min, int epoch, int epochs) {
  if (epochs <= 0) return lr_max;
  return lr_min + (lr_max - lr_min) * 0.5 * (1.0 + std::cos(kPi * epoch / epochs));
}

}  // namespace duxwb

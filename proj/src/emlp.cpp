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

#include "duxwb/emlp.hpp"

#include <cmath>
#include <utility>

namespace duxwb {

EmlpModel::EmlpModel(EmlpConfig cfg)
    : cfg_(cfg), mlp_(MlpShape{cfg.input_size(), 3, 9}, params_, "", cfg.leaky_slope) {}

std::size_t emlp_param_count(int d_in) { return Mlp::param_count(MlpShape{d_in, 3, 9}); }

void EmlpModel::init(std::uint64_t seed) {
  Rng rng(seed);
  mlp_.init_glorot(params_.values(), rng);
  params_.round_to_f32();
}

void EmlpModel::set_normalizer(DefNormalizer n) {
  if (!n.empty() && static_cast<int>(n.size()) != cfg_.input_size())
    throw Error("EMLP normalizer length does not match the input size");
  norm_ = std::move(n);
}

std::array<double, 3> EmlpModel::forward_raw(std::span<const double> def) const {
  const auto y = mlp_.forward(params_.values(), norm_.apply(def));
  return {y[0], y[1], y[2]};
}

Illuminant EmlpModel::predict(std::span<const double> def) const {
  const auto y = forward_raw(def);
  const double n = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
  if (!(n > 1e-12)) throw DomainError("EMLP produced a degenerate (near-zero) output");
  return {y[0] / n, y[1] / n, y[2] / n};
}

double EmlpModel::loss_and_grad(std::span<const double> def, const Illuminant& gt, std::span<double> grad) const {
  Mlp::Trace trace;
  const auto y = mlp_.forward(params_.values(), norm_.apply(def), &trace);
  const std::array<double, 3> raw{y[0], y[1], y[2]};
  const AngularLoss loss = angular_loss(raw, gt);
  mlp_.backward(params_.values(), trace, loss.grad, grad);
  return loss.degrees;
}

}  // namespace duxwb

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

#include "duxwb/mlp.hpp"

#include <cmath>

#include "duxwb/core.hpp"

namespace duxwb {

Mlp::Mlp(MlpShape shape, ParamStore& store, const std::string& prefix, double leaky_slope)
    : shape_(shape), slope_(leaky_slope), dims_{shape.d_in, shape.hidden, shape.hidden, shape.hidden, shape.d_out} {
  if (shape.d_in < 1 || shape.d_out < 1 || shape.hidden < 1) throw Error("invalid MLP shape");
  for (int l = 0; l < 4; ++l) {
    const std::string name = prefix + "fc" + std::to_string(l + 1);
    w_off_[l] = store.add(name + ".weight", {dims_[l + 1], dims_[l]});
    b_off_[l] = store.add(name + ".bias", {dims_[l + 1]});
  }
}

std::size_t Mlp::param_count(MlpShape s) {
  const std::array<int, 5> d{s.d_in, s.hidden, s.hidden, s.hidden, s.d_out};
  std::size_t n = 0;
  for (int l = 0; l < 4; ++l) n += static_cast<std::size_t>(d[l] * d[l + 1] + d[l + 1]);
  return n;
}

std::vector<double> Mlp::forward(std::span<const double> params, std::span<const double> x, Trace* trace) const {
  if (static_cast<int>(x.size()) != shape_.d_in)
    throw Error("MLP input has " + std::to_string(x.size()) + " entries, expected " + std::to_string(shape_.d_in));
  std::vector<double> a(x.begin(), x.end());
  for (int l = 0; l < 4; ++l) {
    const int in = dims_[l], out = dims_[l + 1];
    const double* w = params.data() + w_off_[l];
    const double* b = params.data() + b_off_[l];
    std::vector<double> z(static_cast<std::size_t>(out));
    for (int o = 0; o < out; ++o) {
      double s = b[o];
      for (int i = 0; i < in; ++i) s += w[o * in + i] * a[static_cast<std::size_t>(i)];
      z[static_cast<std::size_t>(o)] = s;
    }
    if (trace != nullptr) {
      trace->input[l] = a;
      trace->pre[l] = z;
    }
    if (l < 3)
      for (double& v : z) v = v > 0.0 ? v : slope_ * v;
    a = std::move(z);
  }
  return a;
}

void Mlp::backward(std::span<const double> params, const Trace& trace, std::span<const double> grad_out,
                   std::span<double> grad) const {
  std::vector<double> g(grad_out.begin(), grad_out.end());
  for (int l = 3; l >= 0; --l) {
    const int in = dims_[l], out = dims_[l + 1];
    const double* w = params.data() + w_off_[l];
    double* gw = grad.data() + w_off_[l];
    double* gb = grad.data() + b_off_[l];
    const auto& a = trace.input[l];
    for (int o = 0; o < out; ++o) {
      const double go = g[static_cast<std::size_t>(o)];
      gb[o] += go;
      for (int i = 0; i < in; ++i) gw[o * in + i] += go * a[static_cast<std::size_t>(i)];
    }
    if (l == 0) break;
    std::vector<double> gi(static_cast<std::size_t>(in), 0.0);
    for (int o = 0; o < out; ++o)
      for (int i = 0; i < in; ++i) gi[static_cast<std::size_t>(i)] += w[o * in + i] * g[static_cast<std::size_t>(o)];
    const auto& z = trace.pre[l - 1];
    for (int i = 0; i < in; ++i)
      if (!(z[static_cast<std::size_t>(i)] > 0.0)) gi[static_cast<std::size_t>(i)] *= slope_;
    g = std::move(gi);
  }
}

void Mlp::init_glorot(std::span<double> params, Rng& rng) const {
  for (int l = 0; l < 4; ++l) {
    const int in = dims_[l], out = dims_[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    double* w = params.data() + w_off_[l];
    for (int i = 0; i < in * out; ++i) w[i] = rng.uniform(-limit, limit);
    double* b = params.data() + b_off_[l];
    for (int o = 0; o < out; ++o) b[o] = 0.0;
  }
}

}  // namespace duxwb

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

#include <doctest.h>

#include <cmath>
#include <random>

#include "duxwb/emlp.hpp"
#include "duxwb/optim.hpp"
#include "oracles.hpp"

using namespace duxwb;

namespace {

// Straight-line evaluation of the four-layer formula from the named tensors.
std::vector<double> interpret(const EmlpModel& m, const std::vector<double>& x) {
  const ParamStore& ps = m.params();
  std::vector<double> a = x;
  for (int l = 1; l <= 4; ++l) {
    const auto& ws = ps.spec("fc" + std::to_string(l) + ".weight");
    const auto w = ps.tensor("fc" + std::to_string(l) + ".weight");
    const auto b = ps.tensor("fc" + std::to_string(l) + ".bias");
    const int rows = ws.shape[0], cols = ws.shape[1];
    std::vector<double> z(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) {
      double s = 0;
      for (int c = 0; c < cols; ++c) s += w[static_cast<std::size_t>(r * cols + c)] * a[static_cast<std::size_t>(c)];
      z[static_cast<std::size_t>(r)] = s + b[static_cast<std::size_t>(r)];
    }
    if (l < 4)
      for (double& v : z) v = std::max(v, 0.01 * v);
    a = z;
  }
  return a;
}

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

EmlpModel random_model(std::mt19937_64& rng, int d_in = 15) {
  EmlpConfig cfg;
  if (d_in == 9) cfg.def.include_covariance = false;
  EmlpModel m(cfg);
  const auto v = random_vec(rng, m.param_count());
  std::copy(v.begin(), v.end(), m.params().values().begin());
  return m;
}

}  // namespace

TEST_SUITE("emlp") {
  TEST_CASE("parameter counts") {
    CHECK(emlp_param_count(15) == 354);
    CHECK(emlp_param_count(9) == 300);
    CHECK(emlp_param_count(12) == 327);
    CHECK(emlp_param_count(4) == 255);
    CHECK(emlp_param_count(16) == 363);
    CHECK(EmlpModel().param_count() == 354);
    for (int d = 1; d < 30; ++d)
      CHECK(emlp_param_count(d) == static_cast<std::size_t>(d * 9 + 9 + 9 * 9 + 9 + 9 * 9 + 9 + 9 * 3 + 3));
  }

  TEST_CASE("zero network is degenerate") {
    EmlpModel m;
    const std::vector<double> x(15, 0.3);
    const auto raw = m.forward_raw(x);
    CHECK(raw == std::array<double, 3>{0, 0, 0});
    CHECK_THROWS_AS(m.predict(x), DomainError);
  }

  TEST_CASE("hand-built selector passes the first three inputs through") {
    EmlpModel m;
    auto& ps = m.params();
    auto w1 = ps.tensor("fc1.weight");
    for (int i = 0; i < 3; ++i) w1[static_cast<std::size_t>(i * 15 + i)] = 1.0;
    for (const char* name : {"fc2.weight", "fc3.weight"}) {
      auto w = ps.tensor(name);
      for (int i = 0; i < 9; ++i) w[static_cast<std::size_t>(i * 9 + i)] = 1.0;
    }
    auto w4 = ps.tensor("fc4.weight");
    for (int i = 0; i < 3; ++i) w4[static_cast<std::size_t>(i * 9 + i)] = 1.0;
    std::vector<double> x(15, -5.0);
    x[0] = 0.2;
    x[1] = 0.5;
    x[2] = 0.7;
    const auto raw = m.forward_raw(x);
    CHECK(raw[0] == 0.2);
    CHECK(raw[1] == 0.5);
    CHECK(raw[2] == 0.7);
    const Illuminant p = m.predict(x);
    const double n = std::sqrt(0.04 + 0.25 + 0.49);
    CHECK(p.r == doctest::Approx(0.2 / n));
    CHECK(p.b == doctest::Approx(0.7 / n));
  }

  TEST_CASE("forward matches the interpretive oracle") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
      const int d = trial % 2 ? 15 : 9;
      const EmlpModel m = random_model(rng, d);
      const auto x = random_vec(rng, static_cast<std::size_t>(d), -3, 3);
      const auto raw = m.forward_raw(x);
      const auto ref = interpret(m, x);
      for (int i = 0; i < 3; ++i) CHECK(std::abs(raw[i] - ref[i]) <= 1e-12 * std::max(1.0, std::abs(ref[i])));
      CHECK(m.forward_raw(x) == raw);
      const double n = std::hypot(raw[0], raw[1], raw[2]);
      if (n > 1e-12) CHECK(m.predict(x).norm() == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  TEST_CASE("analytic gradients match central differences") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> pos(0.1, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
      EmlpModel m = random_model(rng);
      const auto x = random_vec(rng, 15, -2, 2);
      const Illuminant gt{pos(rng), pos(rng), pos(rng)};
      std::vector<double> grad(m.param_count(), 0.0);
      const double loss = m.loss_and_grad(x, gt, grad);
      if (loss < 1e-3) continue;
      const std::vector<double> p0(m.params().values().begin(), m.params().values().end());
      const auto f = [&](std::span<const double> p) {
        EmlpModel t = m;
        std::copy(p.begin(), p.end(), t.params().values().begin());
        std::vector<double> g(t.param_count());
        return t.loss_and_grad(x, gt, g);
      };
      const auto fine = oracle::numeric_gradient(f, p0, 1e-5);
      const auto wide = oracle::richardson_gradient(f, p0, 1e-3);
      CHECK(oracle::max_relative_error_either(grad, fine, wide, 1e-8) < 1e-3);
      ++checked;
    }
    CHECK(checked >= 45);
  }

  TEST_CASE("loss is stationary when the prediction is parallel to the target") {
    std::mt19937_64 rng(43);
    EmlpModel m = random_model(rng);
    const auto x = random_vec(rng, 15);
    const auto raw = m.forward_raw(x);
    if (raw[0] > 0 && raw[1] > 0 && raw[2] > 0) {
      std::vector<double> grad(m.param_count(), 0.0);
      const double loss = m.loss_and_grad(x, Illuminant{2 * raw[0], 2 * raw[1], 2 * raw[2]}, grad);
      CHECK(loss < 1e-5);
      double gn = 0;
      for (double g : grad) gn += g * g;
      CHECK(std::sqrt(gn) < 1e-6);
    } else {
      // Flip the output sign through the last layer so the raw output is positive.
      auto w4 = m.params().tensor("fc4.weight");
      auto b4 = m.params().tensor("fc4.bias");
      std::fill(w4.begin(), w4.end(), 0.0);
      b4[0] = 0.3;
      b4[1] = 0.4;
      b4[2] = 0.5;
      std::vector<double> grad(m.param_count(), 0.0);
      CHECK(m.loss_and_grad(x, Illuminant{0.3, 0.4, 0.5}, grad) < 1e-5);
    }
  }

  TEST_CASE("overfits a single sample with Adam") {
    std::mt19937_64 rng(44);
    EmlpModel m;
    m.init(7);
    const auto x = random_vec(rng, 15);
    const Illuminant gt{0.3, 0.5, 0.2};
    Adam opt(m.param_count());
    std::vector<double> grad(m.param_count());
    std::fill(grad.begin(), grad.end(), 0.0);
    const double initial = m.loss_and_grad(x, gt, grad);
    double last = initial;
    for (int step = 0; step < 100; ++step) {
      std::fill(grad.begin(), grad.end(), 0.0);
      last = m.loss_and_grad(x, gt, grad);
      CHECK(opt.step(m.params().values(), grad, 1e-2));
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    last = m.loss_and_grad(x, gt, grad);
    CHECK(last < 0.1 * initial);
  }

  TEST_CASE("glorot init is seeded, bounded and f32 exact") {
    EmlpModel a, b, c;
    a.init(3);
    b.init(3);
    c.init(4);
    CHECK(std::equal(a.params().values().begin(), a.params().values().end(), b.params().values().begin()));
    CHECK_FALSE(std::equal(a.params().values().begin(), a.params().values().end(), c.params().values().begin()));
    const double lim1 = std::sqrt(6.0 / 24.0);
    for (double v : a.params().tensor("fc1.weight")) CHECK(std::abs(v) <= lim1);
    for (double v : a.params().tensor("fc1.bias")) CHECK(v == 0.0);
    for (double v : a.params().values()) CHECK(static_cast<double>(static_cast<float>(v)) == v);
  }

  TEST_CASE("input length mismatch is rejected") {
    EmlpModel m;
    CHECK_THROWS_AS(m.forward_raw(std::vector<double>(9, 1.0)), Error);
  }

  TEST_CASE("normalizer is applied before the first layer") {
    std::mt19937_64 rng(45);
    EmlpModel m = random_model(rng);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 50; ++i) rows.push_back(random_vec(rng, 15, -4, 4));
    const DefNormalizer n = DefNormalizer::fit(rows);
    EmlpModel plain = m;
    m.set_normalizer(n);
    const auto x = rows[3];
    const auto a = m.forward_raw(x), b = plain.forward_raw(n.apply(x));
    CHECK(a == b);
    CHECK_THROWS_AS(m.set_normalizer(DefNormalizer::fit({{1.0, 2.0}})), Error);
  }
}

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

#include "duxwb/eccc.hpp"
#include "oracles.hpp"

using namespace duxwb;

namespace {

void fill_random(std::span<double> v, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& x : v) x = u(rng);
}

EcccModel random_model(EcccConfig cfg, std::mt19937_64& rng, double scale = 1.0) {
  EcccModel m(cfg);
  fill_random(m.params().values(), rng, scale);
  return m;
}

// A pair whose pixels spread over a patch of the chroma plane.
DualExposurePair random_pair(std::mt19937_64& rng, int w = 24, int h = 16) {
  DualExposurePair p{oracle::random_image(rng, w, h, 0.02, 1.0), oracle::random_image(rng, w, h, 0.002, 0.2), 8,
                     std::nullopt};
  return p;
}

Grid softmax(Grid z) {
  const double mx = *std::max_element(z.v.begin(), z.v.end());
  double s = 0;
  for (double& v : z.v) s += (v = std::exp(v - mx));
  for (double& v : z.v) v /= s;
  return z;
}

// Upsampled filter for a tensor, via the tent oracle.
Grid filter_up(const EcccModel& m, const std::string& name) {
  const int q = m.config().filter_size();
  Grid f(q, q);
  const auto t = m.params().tensor(name);
  std::copy(t.begin(), t.end(), f.v.begin());
  return oracle::tent_upsample(f, 4);
}

// Bias map B'_up assembled from the tensors and the model's bias weights.
Grid bias_up(const EcccModel& m, const std::vector<double>& def) {
  const int q = m.config().filter_size();
  if (!m.config().use_def) {
    Grid b(m.config().hist_size, m.config().hist_size);
    const auto t = m.params().tensor("bias.full");
    std::copy(t.begin(), t.end(), b.v.begin());
    return b;
  }
  const auto w = m.bias_weights(def);
  const auto bank = m.params().tensor("bias.bank");
  Grid mixed(q, q);
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t k = 0; k < mixed.size(); ++k) mixed.v[k] += w[i] * bank[i * mixed.size() + k];
  return oracle::tent_upsample(mixed, 4);
}

// Sobel 'valid' energy written directly from the two 3x3 kernels.
double sobel_oracle(const Grid& g) {
  const double ku[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
  double e = 0;
  for (int r = 0; r + 2 < g.rows; ++r)
    for (int c = 0; c + 2 < g.cols; ++c) {
      double a = 0, b = 0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          a += ku[i][j] * g(r + i, c + j);
          b += ku[j][i] * g(r + i, c + j);
        }
      e += a * a + b * b;
    }
  return e;
}

}  // namespace

TEST_SUITE("eccc") {
  TEST_CASE("histogram binning examples") {
    CHECK(bin_width(64) == doctest::Approx(0.0890625).epsilon(1e-15));
    RawImage px(1, 1, 0.4f);
    const ChromaHistogram h = build_histogram(px, 64);
    const double expect = std::sqrt(3.0) * double(0.4f);
    CHECK(h.total == doctest::Approx(expect).epsilon(1e-12));
    const int b0 = bin_index(64, 0.0);
    CHECK(h.mass(b0, b0) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(b0 == 32);

    RawImage two(2, 1, 0.4f);
    const ChromaHistogram h2 = build_histogram(two, 64);
    for (std::size_t i = 0; i < h2.mass.size(); ++i) CHECK(h2.mass.v[i] == doctest::Approx(2 * h.mass.v[i]));

    CHECK(bin_index(64, -100.0) == 0);
    CHECK(bin_index(64, 100.0) == 63);
    CHECK(bin_index(64, -2.85) == 0);
    CHECK(bin_center(64, 0) == doctest::Approx(-2.85 + 0.5 * 0.0890625));
  }

  TEST_CASE("histogram conserves mass and skips non-positive pixels") {
    std::mt19937_64 rng(51);
    RawImage img = oracle::random_image(rng, 30, 20, 0.0, 1.0);
    img.at(1, 3, 3) = 0.0f;
    img.at(0, 4, 4) = 0.0f;
    double expect = 0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < img.pixels(); ++i) {
      const double r = img.plane(0)[i], g = img.plane(1)[i], b = img.plane(2)[i];
      if (r > 0 && g > 0 && b > 0) {
        expect += std::sqrt(r * r + g * g + b * b);
        ++counted;
      }
    }
    const ChromaHistogram h = build_histogram(img, 32);
    CHECK(h.skipped == img.pixels() - counted);
    CHECK(h.counted == counted);
    double sum = 0;
    for (double v : h.mass.v) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(expect).epsilon(1e-6));
    CHECK_THROWS_AS(normalized_mass(build_histogram(RawImage(4, 4, 0.0f), 32)), DomainError);
    const Grid n = normalized_mass(h);
    double t = 0;
    for (double v : n.v) t += v;
    CHECK(t == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("sparse histogram round trip") {
    std::mt19937_64 rng(52);
    const Grid g = normalized_mass(build_histogram(oracle::random_image(rng, 10, 10, 0.01, 1.0), 64));
    const SparseHistogram s = SparseHistogram::from_grid(g);
    CHECK(s.dense().v == g.v);
    CHECK(s.index.size() <= 100);
  }

  TEST_CASE("parameter counts") {
    EcccConfig cfg;
    CHECK(eccc_param_count(cfg) == 6156);
    CHECK(EcccModel(cfg).param_count() == 6156);
    const std::pair<int, std::size_t> bank[] = {{5, 2166}, {10, 3496}, {15, 4826}, {20, 6156}};
    for (auto [n, want] : bank) {
      cfg.n_biases = n;
      CHECK(eccc_param_count(cfg) == want);
      CHECK(EcccModel(cfg).param_count() == want);
    }
    cfg.n_biases = 20;
    cfg.hist_size = 32;
    CHECK(eccc_param_count(cfg) == 1932);
    cfg.hist_size = 64;
    for (HistogramInput in : {HistogramInput::average, HistogramInput::short_only, HistogramInput::long_only}) {
      cfg.input = in;
      CHECK(eccc_param_count(cfg) == 5900);
      CHECK(EcccModel(cfg).param_count() == 5900);
    }
    cfg.input = HistogramInput::both;
    cfg.use_def = false;
    CHECK(eccc_param_count(cfg) == 4608);
    CHECK(EcccModel(cfg).param_count() == 4608);
  }

  TEST_CASE("zero filters and a uniform bias predict neutral") {
    std::mt19937_64 rng(53);
    for (HistogramInput in :
         {HistogramInput::both, HistogramInput::average, HistogramInput::short_only, HistogramInput::long_only}) {
      EcccConfig cfg;
      cfg.hist_size = 32;
      cfg.n_biases = 4;
      cfg.input = in;
      EcccModel m(cfg);
      m.init(1);
      auto bank = m.params().tensor("bias.bank");
      std::fill(bank.begin(), bank.end(), 0.7);
      const EcccOutput out = m.forward(make_eccc_inputs(cfg, random_pair(rng)));
      const double s = 1.0 / std::sqrt(3.0);
      CHECK(out.illuminant.r == doctest::Approx(s).epsilon(1e-12));
      CHECK(out.illuminant.g == doctest::Approx(s).epsilon(1e-12));
      CHECK(out.illuminant.b == doctest::Approx(s).epsilon(1e-12));
      CHECK(std::abs(out.lu) < 1e-12);
      for (double p : out.probability.v) CHECK(p == doctest::Approx(1.0 / (32 * 32)).epsilon(1e-12));
    }
  }

  TEST_CASE("decode of a delta follows the closed form") {
    const double u0 = std::log(2.0), v0 = 0.0;
    const Illuminant l = uv_to_illuminant(u0, v0);
    const double n = std::sqrt(0.25 + 1 + 1);
    CHECK(l.r == doctest::Approx(0.5 / n).epsilon(1e-12));
    CHECK(l.g == doctest::Approx(1.0 / n).epsilon(1e-12));
    CHECK(l.b == doctest::Approx(1.0 / n).epsilon(1e-12));
    for (int h : {16, 64})
      for (int r = 0; r < h; r += 5)
        for (int c = 0; c < h; c += 7) {
          Grid p(h, h);
          p(r, c) = 1.0;
          const EcccOutput o = decode_probability(p);
          const double u = -2.85 + (r + 0.5) * 5.7 / h, v = -2.85 + (c + 0.5) * 5.7 / h;
          const double a = std::exp(-u), b = std::exp(-v), q = std::sqrt(a * a + 1 + b * b);
          CHECK(o.illuminant.r == doctest::Approx(a / q).epsilon(1e-12));
          CHECK(o.illuminant.g == doctest::Approx(1 / q).epsilon(1e-12));
          CHECK(o.illuminant.b == doctest::Approx(b / q).epsilon(1e-12));
        }
  }

  TEST_CASE("encode then decode a delta stays within the bin quantization") {
    std::mt19937_64 rng(54);
    std::uniform_real_distribution<double> u(0.15, 1.0);
    for (int i = 0; i < 500; ++i) {
      const Illuminant l{u(rng), u(rng), u(rng)};
      const auto uv = illuminant_to_uv(l);
      if (std::abs(uv[0]) > 2.8 || std::abs(uv[1]) > 2.8) continue;
      Grid p(64, 64);
      p(bin_index(64, uv[0]), bin_index(64, uv[1])) = 1.0;
      const EcccOutput o = decode_probability(p);
      CHECK(o.illuminant.norm() == doctest::Approx(1.0).epsilon(1e-9));
      // Bound: largest angle from the bin center to a corner of the bin.
      const double cu = bin_center(64, bin_index(64, uv[0])), cv = bin_center(64, bin_index(64, uv[1]));
      const double half = bin_width(64) / 2;
      double bound = 0;
      for (double du : {-half, half})
        for (double dv : {-half, half})
          bound = std::max(bound, angular_error(uv_to_illuminant(cu, cv), uv_to_illuminant(cu + du, cv + dv)));
      CHECK(angular_error(o.illuminant, l) <= bound + 1e-9);
    }
  }

  TEST_CASE("spectral correlation matches the spatial oracle") {
    std::mt19937_64 rng(55);
    for (int h : {8, 16, 64}) {
      const auto& corr = correlator_for(h);
      Grid g(h, h), f(h, h), up(h, h);
      fill_random(g.v, rng, 1.0);
      fill_random(f.v, rng, 1.0);
      fill_random(up.v, rng, 1.0);
      const Grid a = corr.correlate(g, f), b = oracle::spatial_correlate(g, f);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.v[i] == doctest::Approx(b.v[i]).epsilon(1e-9).scale(1.0));

      // Filter gradient: df[a][b] = sum grad[y][x] g[y + a - c][x + b - c].
      const Grid df = corr.filter_gradient(corr.signal_spectrum(g), corr.signal_spectrum(up));
      const int c = h / 2;
      for (int aa = 0; aa < h; aa += 3)
        for (int bb = 0; bb < h; bb += 5) {
          double s = 0;
          for (int y = 0; y < h; ++y)
            for (int x = 0; x < h; ++x) {
              const int yy = y + aa - c, xx = x + bb - c;
              if (yy >= 0 && yy < h && xx >= 0 && xx < h) s += up(y, x) * g(yy, xx);
            }
          CHECK(df(aa, bb) == doctest::Approx(s).epsilon(1e-9).scale(1.0));
        }
    }
  }

  TEST_CASE("forward matches an oracle assembled from spatial pieces") {
    std::mt19937_64 rng(56);
    for (HistogramInput in :
         {HistogramInput::both, HistogramInput::average, HistogramInput::short_only, HistogramInput::long_only}) {
      for (bool use_def : {true, false}) {
        EcccConfig cfg;
        cfg.hist_size = 32;
        cfg.n_biases = 5;
        cfg.input = in;
        cfg.use_def = use_def;
        const EcccModel m = random_model(cfg, rng);
        const DualExposurePair pair = random_pair(rng);
        const EcccInputs inputs = make_eccc_inputs(cfg, pair);
        const EcccOutput out = m.forward(inputs);

        Grid z = bias_up(m, inputs.def);
        for (std::size_t j = 0; j < m.filter_names().size(); ++j) {
          const Grid c = oracle::spatial_correlate(inputs.histograms[j].dense(), filter_up(m, m.filter_names()[j]));
          for (std::size_t k = 0; k < z.size(); ++k) z.v[k] += c.v[k];
        }
        const Grid p = softmax(z);
        double total = 0;
        for (std::size_t k = 0; k < p.size(); ++k) {
          CHECK(std::abs(out.probability.v[k] - p.v[k]) < 1e-5);
          CHECK(out.probability.v[k] >= 0.0);
          total += out.probability.v[k];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(out.illuminant.norm() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(angular_error(out.illuminant, decode_probability(p).illuminant) < 1e-4);
      }
    }
  }

  TEST_CASE("histograms follow the variant") {
    std::mt19937_64 rng(57);
    const DualExposurePair pair = random_pair(rng);
    EcccConfig cfg;
    cfg.hist_size = 32;
    const auto both = make_eccc_inputs(cfg, pair);
    REQUIRE(both.histograms.size() == 2);
    CHECK(both.histograms[0].dense().v == normalized_mass(build_histogram(pair.long_exposure, 32)).v);
    CHECK(both.histograms[1].dense().v == normalized_mass(build_histogram(pair.short_exposure, 32)).v);
    CHECK(both.def.size() == 15);
    cfg.input = HistogramInput::short_only;
    CHECK(make_eccc_inputs(cfg, pair).histograms[0].dense().v == both.histograms[1].dense().v);
    cfg.use_def = false;
    CHECK(make_eccc_inputs(cfg, pair).def.empty());
  }

  TEST_CASE("average path on identical frames equals the long path bitwise") {
    std::mt19937_64 rng(58);
    EcccConfig a;
    a.hist_size = 32;
    a.n_biases = 3;
    a.input = HistogramInput::average;
    EcccConfig l = a;
    l.input = HistogramInput::long_only;
    const EcccModel ma = random_model(a, rng);
    EcccModel ml(l);
    // Same layout apart from the filter name.
    std::copy(ma.params().values().begin(), ma.params().values().end(), ml.params().values().begin());
    const RawImage img = oracle::random_image(rng, 20, 20, 0.01, 1.0);
    const DualExposurePair pair{img, img, 8, std::nullopt};
    const EcccOutput oa = ma.forward(make_eccc_inputs(a, pair)), ol = ml.forward(make_eccc_inputs(l, pair));
    CHECK(oa.probability.v == ol.probability.v);
    CHECK(oa.illuminant.r == ol.illuminant.r);
    CHECK(oa.illuminant.b == ol.illuminant.b);
  }

  TEST_CASE("equal bias maps make the weights irrelevant") {
    std::mt19937_64 rng(59);
    EcccConfig cfg;
    cfg.hist_size = 32;
    cfg.n_biases = 6;
    EcccModel m = random_model(cfg, rng);
    auto bank = m.params().tensor("bias.bank");
    const std::size_t qq = 64;
    for (int i = 1; i < 6; ++i) std::copy_n(bank.begin(), qq, bank.begin() + static_cast<std::ptrdiff_t>(i * qq));
    const DualExposurePair pair = random_pair(rng);
    EcccInputs in = make_eccc_inputs(cfg, pair);
    const EcccOutput o1 = m.forward(in);
    fill_random(in.def, rng, 5.0);
    const EcccOutput o2 = m.forward(in);
    for (std::size_t k = 0; k < o1.probability.size(); ++k)
      CHECK(o1.probability.v[k] == doctest::Approx(o2.probability.v[k]).epsilon(1e-12));
    double s = 0;
    for (double w : m.bias_weights(in.def)) s += w;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("duplicating every pixel leaves the output unchanged") {
    std::mt19937_64 rng(60);
    EcccConfig cfg;
    cfg.hist_size = 32;
    cfg.n_biases = 4;
    const EcccModel m = random_model(cfg, rng);
    const DualExposurePair pair = random_pair(rng, 16, 16);
    DualExposurePair dup{RawImage(32, 16), RawImage(32, 16), 8, std::nullopt};
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
          for (int k = 0; k < 2; ++k) {
            dup.long_exposure.at(c, x + 16 * k, y) = pair.long_exposure.at(c, x, y);
            dup.short_exposure.at(c, x + 16 * k, y) = pair.short_exposure.at(c, x, y);
          }
    const Illuminant a = m.predict(pair), b = m.predict(dup);
    CHECK(angular_error(a, b) < 1e-6);
  }

  TEST_CASE("sobel energy") {
    CHECK(sobel_energy(Grid(16, 16, 3.0)) == 0.0);
    std::mt19937_64 rng(61);
    Grid g(12, 12);
    fill_random(g.v, rng, 1.0);
    CHECK(sobel_energy(g) == doctest::Approx(sobel_oracle(g)).epsilon(1e-12));
    Grid grad(12, 12);
    sobel_energy_grad(g, 1.0, grad);
    const auto num = oracle::numeric_gradient(
        [&](std::span<const double> p) {
          Grid t(12, 12);
          std::copy(p.begin(), p.end(), t.v.begin());
          return sobel_energy(t);
        },
        g.v, 1e-5);
    CHECK(oracle::max_relative_error(grad.v, num) < 1e-6);
  }

  TEST_CASE("smoothness terms vanish on constant maps") {
    std::mt19937_64 rng(62);
    EcccConfig cfg;
    cfg.hist_size = 32;
    cfg.n_biases = 3;
    EcccModel m(cfg);
    m.init(2);
    for (const auto& name : m.filter_names()) {
      auto f = m.params().tensor(name);
      std::fill(f.begin(), f.end(), 0.25);
    }
    auto bank = m.params().tensor("bias.bank");
    std::fill(bank.begin(), bank.end(), -0.4);
    std::vector<double> grad(m.param_count(), 0.0);
    const EcccLoss l = m.loss_and_grad(m.prepare(), make_eccc_inputs(cfg, random_pair(rng)), Illuminant{0.5, 1, 0.6}, grad);
    CHECK(std::abs(l.smooth_bias) < 1e-20);
    CHECK(std::abs(l.smooth_filter) < 1e-20);
  }

  TEST_CASE("loss assembles the angular and smoothness terms") {
    std::mt19937_64 rng(63);
    EcccConfig cfg;
    cfg.hist_size = 32;
    cfg.n_biases = 4;
    const EcccModel m = random_model(cfg, rng);
    const EcccInputs in = make_eccc_inputs(cfg, random_pair(rng));
    const Illuminant gt{0.4, 0.9, 0.5};
    std::vector<double> grad(m.param_count(), 0.0);
    const EcccLoss l = m.loss_and_grad(m.prepare(), in, gt, grad);
    const double ang = angular_error(m.forward(in).illuminant, gt);
    const double sb = 0.01 * sobel_oracle(bias_up(m, in.def));
    const double sf = 0.02 * (sobel_oracle(filter_up(m, "filter.long")) + sobel_oracle(filter_up(m, "filter.short")));
    CHECK(l.angular == doctest::Approx(ang).epsilon(1e-9));
    CHECK(l.smooth_bias == doctest::Approx(sb).epsilon(1e-9));
    CHECK(l.smooth_filter == doctest::Approx(sf).epsilon(1e-9));
    CHECK(std::abs(l.total() - (ang + sb + sf)) < 1e-9 * std::max(1.0, l.total()));
    CHECK(std::abs(l.total() - (l.angular + l.smooth_bias + l.smooth_filter)) <= 1e-12 * l.total());
  }

  TEST_CASE("analytic gradients match finite differences at h = 16") {
    std::mt19937_64 rng(64);
    for (HistogramInput in :
         {HistogramInput::both, HistogramInput::average, HistogramInput::short_only, HistogramInput::long_only}) {
      for (bool use_def : {true, false}) {
        CAPTURE(to_string(in));
        CAPTURE(use_def);
        EcccConfig cfg;
        cfg.hist_size = 16;
        cfg.n_biases = 3;
        cfg.input = in;
        cfg.use_def = use_def;
        EcccModel m = random_model(cfg, rng, 2.0);
        const DualExposurePair pair = random_pair(rng, 12, 12);
        EcccInputs inputs = make_eccc_inputs(cfg, pair);
        if (use_def) {
          // Keep the DEF entries O(1) so the bias network is not saturated.
          for (double& v : inputs.def) v = std::tanh(v);
        }
        const Illuminant gt{0.3, 0.8, 0.45};
        std::vector<double> grad(m.param_count(), 0.0);
        m.loss_and_grad(m.prepare(), inputs, gt, grad);
        const std::vector<double> p0(m.params().values().begin(), m.params().values().end());
        const auto f = [&](std::span<const double> p) {
          EcccModel t = m;
          std::copy(p.begin(), p.end(), t.params().values().begin());
          std::vector<double> g(t.param_count(), 0.0);
          return t.loss_and_grad(t.prepare(), inputs, gt, g).total();
        };
        const auto fine = oracle::numeric_gradient(f, p0, 1e-5);
        const auto wide = oracle::richardson_gradient(f, p0, 1e-3);
        CHECK(oracle::max_relative_error_either(grad, fine, wide, 1e-8, 1e-10) < 1e-3);
      }
    }
  }

  TEST_CASE("batch filter smoothness equals the per-sample term") {
    std::mt19937_64 rng(65);
    EcccConfig cfg;
    cfg.hist_size = 16;
    cfg.n_biases = 2;
    const EcccModel m = random_model(cfg, rng);
    const EcccInputs in = make_eccc_inputs(cfg, random_pair(rng));
    const auto prep = m.prepare();
    std::vector<double> g1(m.param_count(), 0.0), g2(m.param_count(), 0.0);
    const EcccLoss a = m.loss_and_grad(prep, in, Illuminant{1, 1, 1}, g1, true);
    const EcccLoss b = m.loss_and_grad(prep, in, Illuminant{1, 1, 1}, g2, false);
    CHECK(b.smooth_filter == 0.0);
    const double sf = m.filter_smoothness(prep, g2);
    CHECK(sf == doctest::Approx(a.smooth_filter).epsilon(1e-12));
    for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-12).scale(1e-12));
  }

  TEST_CASE("configuration validation") {
    EcccConfig cfg;
    cfg.hist_size = 30;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.hist_size = 64;
    cfg.n_biases = 0;
    CHECK_THROWS_AS(EcccModel{cfg}, Error);
    CHECK(parse_histogram_input("average") == HistogramInput::average);
    CHECK_THROWS_AS(parse_histogram_input("middle"), Error);
  }
}

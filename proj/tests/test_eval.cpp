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
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "duxwb/dataset.hpp"
#include "duxwb/evaluation.hpp"
#include "duxwb/synth.hpp"
#include "oracles.hpp"

using namespace duxwb;

namespace {

void check_chain(const ErrorReport& r, const std::vector<double>& errors) {
  const auto [lo, hi] = std::minmax_element(errors.begin(), errors.end());
  // Means of sorted subsets are monotone up to summation round-off.
  const double tol = 1e-12 * std::max(1.0, *hi);
  CHECK(r.best25 <= r.mean + tol);
  CHECK(r.mean <= r.worst25 + tol);
  CHECK(r.worst25 <= r.worst5 + tol);
  CHECK(r.worst5 <= r.max + tol);
  CHECK(r.median >= *lo);
  CHECK(r.median <= *hi);
}

RawImage gray_scene(const Illuminant& l, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> shade(0.05, 1.0);
  RawImage img(16, 12);
  const double lc[3] = {l.r, l.g, l.b};
  for (std::size_t i = 0; i < img.pixels(); ++i) {
    const double a = shade(rng);
    for (int c = 0; c < 3; ++c) img.plane(c)[i] = static_cast<float>(a * lc[c]);
  }
  return img;
}

class EchoSource : public SceneSource {
 public:
  std::size_t size() const override { return 5; }
  std::string scene_id(std::size_t i) const override { return "s" + std::to_string(i); }
  Illuminant ground_truth(std::size_t i) const override { return Illuminant{1.0 + i, 2.0, 0.5 + 0.1 * i}; }
  DualExposurePair load_pair(std::size_t, int) const override { throw Error("unused"); }
  RawImage load_auto(std::size_t) const override { throw Error("unused"); }
};

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("report examples") {
    const ErrorReport c = compute_report({2.5, 2.5, 2.5, 2.5, 2.5});
    for (double v : {c.mean, c.median, c.trimean, c.best25, c.worst25, c.worst5, c.max}) CHECK(v == 2.5);
    const ErrorReport r = compute_report({4, 1, 3, 2});
    CHECK(r.median == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(r.trimean == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(r.max == 4);
    CHECK(r.best25 == 1);
    CHECK(r.worst25 == 4);
    CHECK(r.worst5 == 4);
    CHECK(r.n == 4);
    CHECK(quantile_sorted({1, 2, 3, 4}, 0.25) == doctest::Approx(1.75));
    CHECK(quantile_sorted({1, 2, 3, 4}, 0.75) == doctest::Approx(3.25));
    CHECK_THROWS_AS(compute_report({}), Error);
    // Ceiling subset sizes: 5 of 17 in the quartiles, 1 in the worst 5%.
    std::vector<double> v(17);
    for (int i = 0; i < 17; ++i) v[static_cast<std::size_t>(i)] = i;
    const ErrorReport s = compute_report(v);
    CHECK(s.best25 == doctest::Approx(2.0));
    CHECK(s.worst25 == doctest::Approx(14.0));
    CHECK(s.worst5 == 16.0);
  }

  TEST_CASE("report matches a brute-force oracle") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> len(1, 300);
    std::exponential_distribution<double> err(0.3);
    for (int t = 0; t < 1000; ++t) {
      std::vector<double> e(static_cast<std::size_t>(len(rng)));
      for (double& x : e) x = err(rng);
      if (t % 7 == 0) std::fill(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(e.size() / 2), e[0]);
      const ErrorReport r = compute_report(e);
      const auto o = oracle::brute_stats(e);
      CHECK(std::abs(r.mean - o.mean) <= 1e-12);
      CHECK(std::abs(r.median - o.median) <= 1e-12);
      CHECK(std::abs(r.trimean - o.trimean) <= 1e-12);
      CHECK(std::abs(r.best25 - o.best25) <= 1e-12);
      CHECK(std::abs(r.worst25 - o.worst25) <= 1e-12);
      CHECK(std::abs(r.worst5 - o.worst5) <= 1e-12);
      CHECK(r.max == o.max);
      check_chain(r, e);
    }
  }

  TEST_CASE("gray world") {
    std::mt19937_64 rng(3);
    const Illuminant l = Illuminant{0.6, 1.0, 0.45}.normalized();
    const RawImage img = gray_scene(l, rng);
    CHECK(angular_error(gray_world(img), l) < 1e-5);
    RawImage white(4, 4);
    std::fill(white.data.begin(), white.data.end(), 0.7f);
    const Illuminant w = gray_world(white);
    CHECK(w.r == doctest::Approx(1 / std::sqrt(3.0)));
    CHECK(w.b == doctest::Approx(1 / std::sqrt(3.0)));
    RawImage twice = img;
    for (float& v : twice.data) v *= 2.0f;
    const Illuminant a = gray_world(img), b = gray_world(twice);
    CHECK(a.r == b.r);
    CHECK(a.g == b.g);
    CHECK(a.b == b.b);
    RawImage dark = img;
    std::fill(dark.plane(2).begin(), dark.plane(2).end(), 0.0f);
    CHECK_THROWS_AS(gray_world(dark), Error);
    CHECK_THROWS_AS(shades_of_gray(dark), Error);
  }

  TEST_CASE("shades of gray") {
    std::mt19937_64 rng(4);
    const RawImage img = oracle::random_image(rng, 20, 10);
    const Illuminant g = gray_world(img), s1 = shades_of_gray(img, 1.0);
    CHECK(g.r == s1.r);
    CHECK(g.g == s1.g);
    CHECK(g.b == s1.b);
    RawImage flat(5, 5);
    std::fill(flat.data.begin(), flat.data.end(), 0.3f);
    for (double p : {1.0, 2.0, 6.0, 11.5}) CHECK(angular_error(shades_of_gray(flat, p), Illuminant{1, 1, 1}) < 1e-9);
    CHECK_THROWS_AS(shades_of_gray(img, 0.5), Error);

    const SynthConfig cfg = SynthConfig::small();
    const RawImage scene = render_auto(render_scene(cfg, 21), cfg, 21);
    double m[3];
    for (int c = 0; c < 3; ++c) {
      long double acc = 0;
      for (float v : scene.plane(c)) {
        const long double x = v;
        acc += x * x * x * x * x * x;
      }
      m[c] = std::pow(static_cast<double>(acc / scene.pixels()), 1.0 / 6.0);
    }
    const double nm = std::sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2]);
    const Illuminant s6 = shades_of_gray(scene, 6.0);
    CHECK(std::abs(s6.r - m[0] / nm) < 1e-9);
    CHECK(std::abs(s6.g - m[1] / nm) < 1e-9);
    CHECK(std::abs(s6.b - m[2] / nm) < 1e-9);
    RawImage twice = scene;
    for (float& v : twice.data) v *= 2.0f;
    CHECK(angular_error(shades_of_gray(twice), s6) < 1e-9);
  }

  TEST_CASE("evaluate with a ground-truth echo reports zeros") {
    const EchoSource src;
    const Evaluation ev = evaluate(src, [&](std::size_t i) { return src.ground_truth(i); });
    CHECK(ev.scenes.size() == 5);
    CHECK(ev.report.max < 1e-6);
    CHECK(ev.report.mean < 1e-6);
    CHECK(ev.scenes[3].scene_id == "s3");
    const Evaluation off = evaluate(src, [](std::size_t) { return Illuminant{1, 1, 1}; });
    std::vector<double> errs;
    for (const auto& s : off.scenes) errs.push_back(s.error);
    check_chain(off.report, errs);
    const Evaluation again = evaluate(src, [](std::size_t) { return Illuminant{1, 1, 1}; });
    CHECK(again.report.mean == off.report.mean);
  }

  TEST_CASE("report and scene file formats") {
    const ErrorReport r = compute_report({1, 2, 3, 4});
    const auto j = nlohmann::json::parse(report_json(r, "emlp", "val", 8));
    const std::vector<std::string> keys = {"model", "split", "e", "n_scenes", "mean", "median",
                                           "trimean", "best25", "worst25", "worst5", "max"};
    CHECK(j.size() == keys.size());
    for (const auto& k : keys) CHECK(j.contains(k));
    CHECK(j["n_scenes"] == 4);
    CHECK(j["e"] == 8);
    CHECK(j["median"].get<double>() == 2.5);

    const auto path = std::filesystem::temp_directory_path() / "duxwb_eval_scenes.csv";
    write_scene_csv(path, {{"a", 1.5, Illuminant{0.1, 0.2, 0.3}, Illuminant{1, 1, 1}}});
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "scene_id,error_deg,pred_r,pred_g,pred_b,gt_r,gt_g,gt_b");
    CHECK(row.rfind("a,1.5,", 0) == 0);
    std::filesystem::remove(path);
  }
}

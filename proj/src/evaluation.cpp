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

#include "duxwb/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "duxwb/parallel.hpp"

namespace duxwb {

double quantile_sorted(const std::vector<double>& s, double p) {
  if (s.empty()) throw Error("quantile of an empty list");
  const double pos = p * static_cast<double>(s.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

ErrorReport compute_report(const std::vector<double>& errors) {
  if (errors.empty()) throw Error("cannot report on an empty error list");
  std::vector<double> s = errors;
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  auto mean_of = [&](std::size_t from, std::size_t to) {
    double sum = 0.0;
    for (std::size_t i = from; i < to; ++i) sum += s[i];
    return sum / static_cast<double>(to - from);
  };
  auto subset = [&](double frac) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n) - 1e-9)));
  };
  ErrorReport r;
  r.n = n;
  r.mean = mean_of(0, n);
  r.median = quantile_sorted(s, 0.5);
  r.trimean = (quantile_sorted(s, 0.25) + 2.0 * r.median + quantile_sorted(s, 0.75)) / 4.0;
  r.best25 = mean_of(0, subset(0.25));
  r.worst25 = mean_of(n - subset(0.25), n);
  r.worst5 = mean_of(n - subset(0.05), n);
  r.max = s.back();
  return r;
}

namespace {

Illuminant from_sums(const std::array<double, 3>& m) {
  for (double v : m)
    if (!(v > 0.0)) throw DomainError("a color channel has no signal");
  return Illuminant{m[0], m[1], m[2]}.normalized();
}

}  // namespace

Illuminant gray_world(const RawImage& img) {
  std::array<double, 3> m{};
  for (int c = 0; c < 3; ++c) {
    double s = 0.0;
    for (float v : img.plane(c)) s += v;
    m[static_cast<std::size_t>(c)] = s / static_cast<double>(img.pixels());
  }
  return from_sums(m);
}

Illuminant shades_of_gray(const RawImage& img, double p) {
  if (!(p >= 1.0)) throw Error("shades of gray needs p >= 1");
  std::array<double, 3> m{};
  for (int c = 0; c < 3; ++c) {
    double s = 0.0;
    for (float v : img.plane(c)) s += std::pow(std::abs(static_cast<double>(v)), p);
    m[static_cast<std::size_t>(c)] = std::pow(s / static_cast<double>(img.pixels()), 1.0 / p);
  }
  return from_sums(m);
}

Evaluation evaluate(const SceneSource& src, const std::function<Illuminant(std::size_t)>& estimator) {
  if (src.size() == 0) throw Error("no scenes to evaluate");
  Evaluation ev;
  ev.scenes.resize(src.size());
  parallel_for(src.size(), [&](std::size_t i) {
    SceneResult& r = ev.scenes[i];
    r.scene_id = src.scene_id(i);
    r.gt = src.ground_truth(i).normalized();
    r.predicted = estimator(i);
    r.error = angular_error(r.predicted, r.gt);
  });
  std::vector<double> errors;
  for (const auto& r : ev.scenes) errors.push_back(r.error);
  ev.report = compute_report(errors);
  return ev;
}

std::string report_json(const ErrorReport& r, const std::string& model, const std::string& split, int e) {
  const nlohmann::ordered_json j = {{"model", model},     {"split", split},         {"e", e},
                                    {"n_scenes", r.n},    {"mean", r.mean},         {"median", r.median},
                                    {"trimean", r.trimean}, {"best25", r.best25},   {"worst25", r.worst25},
                                    {"worst5", r.worst5}, {"max", r.max}};
  return j.dump(2);
}

void write_scene_csv(const std::filesystem::path& path, const std::vector<SceneResult>& scenes) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "scene_id,error_deg,pred_r,pred_g,pred_b,gt_r,gt_g,gt_b\n";
  char buf[512];
  for (const auto& s : scenes) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.scene_id.c_str(), s.error,
                  s.predicted.r, s.predicted.g, s.predicted.b, s.gt.r, s.gt.g, s.gt.b);
    out << buf;
  }
  if (!out) throw Error("CSV write failed: " + path.string());
}

}  // namespace duxwb

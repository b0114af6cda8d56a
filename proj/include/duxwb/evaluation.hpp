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

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "duxwb/core.hpp"
#include "duxwb/dataset.hpp"

namespace duxwb {

struct ErrorReport {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double trimean = 0.0;
  double best25 = 0.0;
  double worst25 = 0.0;
  double worst5 = 0.0;
  double max = 0.0;
};

/// Linear-interpolation quantile of sorted data (p in [0, 1]).
double quantile_sorted(const std::vector<double>& sorted, double p);

/// Trimean with interpolated quartiles; best/worst subsets use
/// ceil(fraction * n) elements.
ErrorReport compute_report(const std::vector<double>& errors);

/// Per-channel means.
Illuminant gray_world(const RawImage& img);
/// Per-channel Minkowski p-means, p >= 1.
Illuminant shades_of_gray(const RawImage& img, double p = 6.0);

struct SceneResult {
  std::string scene_id;
  double error = 0.0;
  Illuminant predicted;
  Illuminant gt;
};

struct Evaluation {
  ErrorReport report;
  std::vector<SceneResult> scenes;
};

/// Runs estimator over every scene of src. Each call receives the scene
/// index; predictions are compared with the source's ground truth.
Evaluation evaluate(const SceneSource& src, const std::function<Illuminant(std::size_t)>& estimator);

/// {model, split, e, n_scenes, mean, median, trimean, best25, worst25, worst5, max}.
std::string report_json(const ErrorReport& r, const std::string& model, const std::string& split, int e);
void write_scene_csv(const std::filesystem::path& path, const std::vector<SceneResult>& scenes);

}  // namespace duxwb

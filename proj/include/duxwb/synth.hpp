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

// Synthetic dual-exposure raw scenes: Voronoi patches of random albedo under
// a smooth shading field and a single global illuminant, captured at several
// exposure times with read/shot noise, clipping and ADC quantization.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "duxwb/core.hpp"
#include "duxwb/rng.hpp"

namespace duxwb {

struct SynthConfig {
  int width = 384;
  int height = 256;
  int min_patches = 12;
  int max_patches = 40;
  double albedo_min = 0.02;
  double albedo_max = 0.95;
  double max_dynamic_range = 100.0;  // brightest / darkest shading
  // Specular highlights reflect the illuminant color unchanged (neutral
  // interface reflection); up to this many Gaussian spots per scene.
  int max_highlights = 5;
  double highlight_min = 0.5;  // peak strength relative to a white diffuse surface
  double highlight_max = 3.0;
  double exposure_target = 0.25;  // mean of the auto-exposed frame
  bool noise = true;
  double sigma_read = 2e-3;
  double sigma_shot = 1e-3;
  bool clip = true;
  int bit_depth = 10;  // 0 disables quantization

  /// 48 x 32 scenes.
  static SynthConfig small();
  void validate() const;
};

/// Scene content, independent of exposure.
struct SceneSpec {
  int width = 0;
  int height = 0;
  std::vector<std::array<double, 2>> sites;  // patch centers in pixels
  std::vector<std::array<double, 3>> albedo;  // per patch
  // Log-shading: a tilt plus Gaussian bumps, rescaled to [-log(dr), 0].
  std::array<double, 2> tilt{};
  std::vector<std::array<double, 4>> bumps;  // x, y, sigma, amplitude
  double dynamic_range = 1.0;
  std::vector<std::array<double, 4>> highlights;  // x, y, sigma, strength
  Illuminant illuminant;  // unit norm
};

/// Two-lobe (warm indoor / cool outdoor) Planckian-like locus in
/// (R/G, B/G) with perpendicular jitter. Unit norm.
Illuminant sample_illuminant(Rng& rng);

SceneSpec sample_scene(const SynthConfig& cfg, std::uint64_t seed);

/// Noise-free linear irradiance (shading * albedo + highlights) * illuminant,
/// planar, double.
std::vector<double> render_irradiance(const SceneSpec& spec);

/// Exposure time bringing the mean of t * E to the target.
double auto_exposure(const std::vector<double>& irradiance, double target);

/// Frame captured at exposure t * multiplier. Noise is drawn from its own
/// stream keyed by (seed, tag), so a frame does not depend on which other
/// frames are rendered.
RawImage capture(const std::vector<double>& irradiance, int width, int height, double exposure,
                 const SynthConfig& cfg, std::uint64_t seed, std::uint64_t tag);

/// Frame tags: 0 for auto, 2k - 1 for x k, 2k for 1/k.
std::uint64_t frame_tag(int multiplier, bool is_long);

struct RenderedScene {
  SceneSpec spec;
  std::vector<double> irradiance;
  double exposure = 0.0;  // auto exposure time
};

RenderedScene render_scene(const SynthConfig& cfg, std::uint64_t seed);
DualExposurePair render_pair(const RenderedScene& scene, const SynthConfig& cfg, int e, std::uint64_t seed);
RawImage render_auto(const RenderedScene& scene, const SynthConfig& cfg, std::uint64_t seed);

/// Per-scene seed for scene index i of a dataset seed.
std::uint64_t scene_seed(std::uint64_t dataset_seed, std::size_t index);

enum class Split { train, val, test };
std::string_view to_string(Split s);
Split parse_split(std::string_view s);

/// Split assignment in the proportions 387 : 83 : 86, shuffled by seed.
std::vector<Split> assign_splits(std::size_t n, std::uint64_t seed);

struct DatasetOptions {
  std::size_t n_scenes = 556;
  std::uint64_t seed = 1;
  std::vector<int> exposures{2, 4, 8};
  SynthConfig synth;
};

/// Renders every scene (auto frame plus x e and 1/e for each e), writes
/// tensor files and manifest.json under out_dir. Returns the manifest path.
std::filesystem::path generate_dataset(const DatasetOptions& opt, const std::filesystem::path& out_dir);

}  // namespace duxwb

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

#include "duxwb/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "duxwb/parallel.hpp"
#include "duxwb/tensor_io.hpp"

namespace duxwb {

SynthConfig SynthConfig::small() {
  SynthConfig c;
  c.width = 48;
  c.height = 32;
  return c;
}

void SynthConfig::validate() const {
  if (width < 4 || height < 4) throw Error("scene must be at least 4 x 4 pixels");
  if (min_patches < 1 || max_patches < min_patches) throw Error("invalid patch count range");
  if (!(albedo_min > 0.0 && albedo_max >= albedo_min)) throw Error("invalid albedo range");
  if (!(max_dynamic_range >= 1.0)) throw Error("dynamic range must be >= 1");
  if (max_highlights < 0 || highlight_min < 0.0 || highlight_max < highlight_min)
    throw Error("invalid highlight settings");
  if (!(exposure_target > 0.0)) throw Error("exposure target must be positive");
  if (sigma_read < 0.0 || sigma_shot < 0.0) throw Error("noise parameters must be non-negative");
  if (bit_depth < 0 || bit_depth > 24) throw Error("bit depth must be in [0, 24]");
}

Illuminant sample_illuminant(Rng& rng) {
  // Position t along the locus: warm lobe near 0.15, cool lobe near 0.65.
  const bool indoor = rng.uniform() < 0.5;
  double t = indoor ? 0.15 + 0.08 * rng.normal() : 0.65 + 0.12 * rng.normal();
  t = std::clamp(t, 0.0, 1.0);
  double rg = 0.9 - 0.5 * t;
  double bg = 0.25 + 0.55 * std::pow(t, 0.9);
  // Jitter perpendicular to the local locus direction.
  const double drg = -0.5, dbg = 0.55 * 0.9 * std::pow(std::max(t, 0.05), -0.1);
  const double len = std::hypot(drg, dbg);
  const double j = 0.025 * rng.normal();
  rg += j * dbg / len;
  bg -= j * drg / len;
  rg = std::max(rg, 0.1);
  bg = std::max(bg, 0.1);
  return Illuminant{rg, 1.0, bg}.normalized();
}

SceneSpec sample_scene(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(mix_seed(seed, 0x5CE7E));
  SceneSpec s;
  s.width = cfg.width;
  s.height = cfg.height;
  const int n = cfg.min_patches + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.max_patches - cfg.min_patches + 1)));
  for (int i = 0; i < n; ++i) {
    s.sites.push_back({rng.uniform(0.0, cfg.width), rng.uniform(0.0, cfg.height)});
    std::array<double, 3> a{};
    if (rng.uniform() < 0.2) {
      // Achromatic surface with a slight tint.
      const double level = rng.uniform(0.3, 1.0) * cfg.albedo_max;
      for (double& c : a) c = std::clamp(level * rng.uniform(0.95, 1.05), cfg.albedo_min, cfg.albedo_max);
    } else {
      for (double& c : a) c = rng.uniform(cfg.albedo_min, cfg.albedo_max);
    }
    s.albedo.push_back(a);
  }
  s.tilt = {rng.normal(), rng.normal()};
  const int bumps = 3 + static_cast<int>(rng.below(4));
  const double extent = std::max(cfg.width, cfg.height);
  for (int i = 0; i < bumps; ++i)
    s.bumps.push_back({rng.uniform(0.0, cfg.width), rng.uniform(0.0, cfg.height), rng.uniform(0.1, 0.4) * extent,
                       rng.normal()});
  s.dynamic_range = std::exp(rng.uniform(std::log(2.0), std::log(cfg.max_dynamic_range)));
  const int spots = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.max_highlights + 1)));
  for (int i = 0; i < spots; ++i)
    s.highlights.push_back({rng.uniform(0.0, cfg.width), rng.uniform(0.0, cfg.height),
                            rng.uniform(0.01, 0.05) * extent, rng.uniform(cfg.highlight_min, cfg.highlight_max)});
  s.illuminant = sample_illuminant(rng);
  return s;
}

std::vector<double> render_irradiance(const SceneSpec& s) {
  const std::size_t np = static_cast<std::size_t>(s.width) * static_cast<std::size_t>(s.height);
  std::vector<double> shade(np);
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      double f = s.tilt[0] * x / s.width + s.tilt[1] * y / s.height;
      for (const auto& b : s.bumps) {
        const double dx = x - b[0], dy = y - b[1];
        f += b[3] * std::exp(-(dx * dx + dy * dy) / (2.0 * b[2] * b[2]));
      }
      shade[static_cast<std::size_t>(y) * s.width + x] = f;
    }
  const auto [lo, hi] = std::minmax_element(shade.begin(), shade.end());
  const double fmin = *lo, fmax = *hi;
  const double span = fmax - fmin;
  const double logdr = std::log(s.dynamic_range);
  for (double& f : shade) f = std::exp(span > 0.0 ? (f - fmax) / span * logdr : 0.0);

  const auto l = s.illuminant.rgb();
  std::vector<double> e(3 * np);
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      std::size_t best = 0;
      double bd = INFINITY;
      for (std::size_t i = 0; i < s.sites.size(); ++i) {
        const double dx = x + 0.5 - s.sites[i][0], dy = y + 0.5 - s.sites[i][1];
        const double d = dx * dx + dy * dy;
        if (d < bd) {
          bd = d;
          best = i;
        }
      }
      const std::size_t p = static_cast<std::size_t>(y) * s.width + x;
      double spec = 0.0;
      for (const auto& h : s.highlights) {
        const double dx = x + 0.5 - h[0], dy = y + 0.5 - h[1];
        spec += h[3] * std::exp(-(dx * dx + dy * dy) / (2.0 * h[2] * h[2]));
      }
      for (int c = 0; c < 3; ++c) e[c * np + p] = (shade[p] * s.albedo[best][c] + spec) * l[c];
    }
  return e;
}

double auto_exposure(const std::vector<double>& irradiance, double target) {
  const double mean = std::accumulate(irradiance.begin(), irradiance.end(), 0.0) / irradiance.size();
  if (!(mean > 0.0)) throw DomainError("scene has no light");
  return target / mean;
}

std::uint64_t frame_tag(int multiplier, bool is_long) {
  if (multiplier <= 1) return 0;
  return is_long ? 2u * multiplier - 1u : 2u * multiplier;
}

RawImage capture(const std::vector<double>& irradiance, int width, int height, double exposure,
                 const SynthConfig& cfg, std::uint64_t seed, std::uint64_t tag) {
  RawImage img(width, height);
  if (irradiance.size() != img.data.size()) throw Error("capture: irradiance size mismatch");
  Rng rng(mix_seed(seed, 0xF4A3E000ull + tag));
  const double levels = cfg.bit_depth > 0 ? std::ldexp(1.0, cfg.bit_depth) - 1.0 : 0.0;
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    double s = exposure * irradiance[i];
    if (cfg.noise) s += std::sqrt(cfg.sigma_read * cfg.sigma_read + cfg.sigma_shot * std::max(s, 0.0)) * rng.normal();
    if (cfg.clip) s = std::clamp(s, 0.0, 1.0);
    if (levels > 0.0) s = std::round(s * levels) / levels;
    img.data[i] = static_cast<float>(s);
  }
  return img;
}

RenderedScene render_scene(const SynthConfig& cfg, std::uint64_t seed) {
  RenderedScene r;
  r.spec = sample_scene(cfg, seed);
  r.irradiance = render_irradiance(r.spec);
  r.exposure = auto_exposure(r.irradiance, cfg.exposure_target);
  return r;
}

DualExposurePair render_pair(const RenderedScene& scene, const SynthConfig& cfg, int e, std::uint64_t seed) {
  if (e < 1) throw Error("exposure factor must be >= 1");
  const int w = scene.spec.width, h = scene.spec.height;
  DualExposurePair p;
  p.exposure_factor = e;
  p.long_exposure = capture(scene.irradiance, w, h, scene.exposure * e, cfg, seed, frame_tag(e, true));
  p.short_exposure = capture(scene.irradiance, w, h, scene.exposure / e, cfg, seed, frame_tag(e, false));
  p.ground_truth = scene.spec.illuminant;
  return p;
}

RawImage render_auto(const RenderedScene& scene, const SynthConfig& cfg, std::uint64_t seed) {
  return capture(scene.irradiance, scene.spec.width, scene.spec.height, scene.exposure, cfg, seed, 0);
}

std::uint64_t scene_seed(std::uint64_t dataset_seed, std::size_t index) { return mix_seed(dataset_seed, index); }

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  for (Split v : {Split::train, Split::val, Split::test})
    if (to_string(v) == s) return v;
  throw Error("unknown split: " + std::string(s));
}

std::vector<Split> assign_splits(std::size_t n, std::uint64_t seed) {
  const std::size_t n_val = static_cast<std::size_t>(std::llround(n * 83.0 / 556.0));
  const std::size_t n_test = static_cast<std::size_t>(std::llround(n * 86.0 / 556.0));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0x5B117));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<Split> out(n, Split::train);
  for (std::size_t i = 0; i < n_val && i < n; ++i) out[order[i]] = Split::val;
  for (std::size_t i = n_val; i < n_val + n_test && i < n; ++i) out[order[i]] = Split::test;
  return out;
}

namespace {

std::string scene_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%05zu", i);
  return buf;
}

void check_writable(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto probe = dir / ".write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw Error("output directory is not writable: " + dir.string());
  }
  std::filesystem::remove(probe, ec);
}

}  // namespace

std::filesystem::path generate_dataset(const DatasetOptions& opt, const std::filesystem::path& out_dir) {
  opt.synth.validate();
  if (opt.n_scenes < 10) throw Error("a dataset needs at least 10 scenes");
  for (int e : opt.exposures)
    if (e < 2) throw Error("exposure factors must be >= 2");
  check_writable(out_dir);

  const auto splits = assign_splits(opt.n_scenes, opt.seed);
  std::vector<nlohmann::json> entries(opt.n_scenes);
  parallel_for(opt.n_scenes, [&](std::size_t i) {
    const std::uint64_t seed = scene_seed(opt.seed, i);
    const RenderedScene scene = render_scene(opt.synth, seed);
    const std::string name = scene_name(i);
    const auto rel = std::filesystem::path("scenes") / name;
    std::filesystem::create_directories(out_dir / rel);
    nlohmann::json files = nlohmann::json::object();
    auto put = [&](const std::string& key, const RawImage& img) {
      const auto p = rel / (key + ".dxt");
      write_tensor(out_dir / p, img);
      files[key] = p.generic_string();
    };
    put("auto", render_auto(scene, opt.synth, seed));
    for (int e : opt.exposures) {
      const DualExposurePair pair = render_pair(scene, opt.synth, e, seed);
      put("long_x" + std::to_string(e), pair.long_exposure);
      put("short_x" + std::to_string(e), pair.short_exposure);
    }
    const auto& l = scene.spec.illuminant;
    entries[i] = {{"scene_id", name}, {"split", std::string(to_string(splits[i]))}, {"seed", seed},
                  {"gt", {l.r, l.g, l.b}}, {"files", files}};
  });

  const auto& s = opt.synth;
  nlohmann::json manifest = {
      {"format", "duxwb-dataset"},
      {"version", 1},
      {"seed", opt.seed},
      {"exposures", opt.exposures},
      {"synth",
       {{"width", s.width}, {"height", s.height}, {"min_patches", s.min_patches}, {"max_patches", s.max_patches},
        {"albedo_min", s.albedo_min}, {"albedo_max", s.albedo_max}, {"max_dynamic_range", s.max_dynamic_range},
        {"max_highlights", s.max_highlights}, {"highlight_min", s.highlight_min}, {"highlight_max", s.highlight_max},
        {"exposure_target", s.exposure_target}, {"noise", s.noise}, {"sigma_read", s.sigma_read},
        {"sigma_shot", s.sigma_shot}, {"clip", s.clip}, {"bit_depth", s.bit_depth}}},
      {"scenes", entries}};
  const auto path = out_dir / "manifest.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << manifest.dump(1) << "\n";
  if (!out) throw Error("manifest write failed: " + path.string());
  return path;
}

}  // namespace duxwb

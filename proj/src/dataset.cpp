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

#include "duxwb/dataset.hpp"

#include <fstream>

#include <json.hpp>

#include "duxwb/parallel.hpp"
#include "duxwb/tensor_io.hpp"

namespace duxwb {

ManifestSource ManifestSource::open(const std::filesystem::path& path, std::optional<Split> split) {
  const auto file = std::filesystem::is_directory(path) ? path / "manifest.json" : path;
  std::ifstream in(file);
  if (!in) throw Error("cannot open dataset manifest " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw Error("malformed manifest " + file.string() + ": " + ex.what());
  }
  ManifestSource src;
  src.root_ = file.parent_path();
  try {
    src.exposures_ = j.at("exposures").get<std::vector<int>>();
    for (const auto& s : j.at("scenes")) {
      SceneRecord r;
      r.scene_id = s.at("scene_id").get<std::string>();
      r.split = parse_split(s.at("split").get<std::string>());
      r.seed = s.at("seed").get<std::uint64_t>();
      const auto gt = s.at("gt").get<std::vector<double>>();
      if (gt.size() != 3) throw Error("ground truth must have 3 entries");
      r.gt = {gt[0], gt[1], gt[2]};
      r.files = s.at("files").get<std::map<std::string, std::string>>();
      if (!split || r.split == *split) src.records_.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error("malformed manifest " + file.string() + ": " + ex.what());
  }
  return src;
}

void ManifestSource::check_files(int e) const {
  std::vector<std::string> keys;
  if (e == 0) {
    keys = {"auto"};
  } else {
    keys = {"long_x" + std::to_string(e), "short_x" + std::to_string(e)};
  }
  std::string missing;
  std::size_t count = 0;
  for (const auto& r : records_) {
    bool ok = true;
    for (const auto& k : keys) {
      const auto it = r.files.find(k);
      ok = ok && it != r.files.end() && std::filesystem::exists(root_ / it->second);
    }
    if (!ok) {
      missing += (count++ ? ", " : "") + r.scene_id;
    }
  }
  if (count > 0) throw Error("missing files for " + std::to_string(count) + " scene(s): " + missing);
}

DualExposurePair ManifestSource::load_pair(std::size_t i, int e) const {
  const auto& r = records_.at(i);
  const auto lk = r.files.find("long_x" + std::to_string(e));
  const auto sk = r.files.find("short_x" + std::to_string(e));
  if (lk == r.files.end() || sk == r.files.end())
    throw Error("scene " + r.scene_id + " has no frames for e=" + std::to_string(e));
  DualExposurePair p;
  p.long_exposure = read_tensor(root_ / lk->second);
  p.short_exposure = read_tensor(root_ / sk->second);
  p.exposure_factor = e;
  p.ground_truth = r.gt;
  return p;
}

RawImage ManifestSource::load_auto(std::size_t i) const {
  const auto& r = records_.at(i);
  const auto it = r.files.find("auto");
  if (it == r.files.end()) throw Error("scene " + r.scene_id + " has no auto frame");
  return read_tensor(root_ / it->second);
}

SynthSource::SynthSource(SynthConfig cfg, std::uint64_t dataset_seed, std::vector<std::size_t> indices)
    : cfg_(cfg), seed_(dataset_seed), indices_(std::move(indices)) {
  cfg_.validate();
}

SynthSource SynthSource::split(SynthConfig cfg, std::uint64_t dataset_seed, std::size_t n_scenes, Split s) {
  const auto splits = assign_splits(n_scenes, dataset_seed);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n_scenes; ++i)
    if (splits[i] == s) idx.push_back(i);
  return SynthSource(cfg, dataset_seed, std::move(idx));
}

std::string SynthSource::scene_id(std::size_t i) const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%05zu", indices_.at(i));
  return buf;
}

Illuminant SynthSource::ground_truth(std::size_t i) const {
  return sample_scene(cfg_, scene_seed(seed_, indices_.at(i))).illuminant;
}

DualExposurePair SynthSource::load_pair(std::size_t i, int e) const {
  const std::uint64_t seed = scene_seed(seed_, indices_.at(i));
  return render_pair(render_scene(cfg_, seed), cfg_, e, seed);
}

RawImage SynthSource::load_auto(std::size_t i) const {
  const std::uint64_t seed = scene_seed(seed_, indices_.at(i));
  return render_auto(render_scene(cfg_, seed), cfg_, seed);
}

PreparedSample prepare_sample(const DualExposurePair& pair, const std::string& scene_id, const PrepareOptions& opt) {
  if (!pair.ground_truth) throw Error("scene " + scene_id + " has no ground truth");
  PreparedSample s;
  s.scene_id = scene_id;
  s.gt = pair.ground_truth->normalized();
  const DefVector def = compute_def(pair, opt.def);
  s.def = def.values;
  if (opt.eccc) {
    EcccConfig cfg = *opt.eccc;
    cfg.use_def = false;  // DEF already computed above
    s.histograms = make_eccc_inputs(cfg, pair).histograms;
  }
  return s;
}

std::vector<PreparedSample> prepare_samples(const SceneSource& src, const PrepareOptions& opt) {
  std::vector<PreparedSample> out(src.size());
  parallel_for(src.size(), [&](std::size_t i) { out[i] = prepare_sample(src.load_pair(i, opt.e), src.scene_id(i), opt); });
  return out;
}

}  // namespace duxwb

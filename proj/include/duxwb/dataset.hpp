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

// Access to labeled scenes, either from a generated dataset on disk or
// rendered on the fly from the same generator.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "duxwb/core.hpp"
#include "duxwb/def_feature.hpp"
#include "duxwb/eccc.hpp"
#include "duxwb/synth.hpp"

namespace duxwb {

class SceneSource {
 public:
  virtual ~SceneSource() = default;
  virtual std::size_t size() const = 0;
  virtual std::string scene_id(std::size_t i) const = 0;
  virtual Illuminant ground_truth(std::size_t i) const = 0;
  /// Long (x e) and short (1/e) frames with the ground truth attached.
  virtual DualExposurePair load_pair(std::size_t i, int e) const = 0;
  /// The auto-exposed frame.
  virtual RawImage load_auto(std::size_t i) const = 0;
};

struct SceneRecord {
  std::string scene_id;
  Split split = Split::train;
  std::uint64_t seed = 0;
  Illuminant gt;
  std::map<std::string, std::string> files;  // key -> path relative to the dataset root
};

class ManifestSource : public SceneSource {
 public:
  /// path is a manifest file or a directory containing manifest.json.
  /// Restricts to one split when given.
  static ManifestSource open(const std::filesystem::path& path, std::optional<Split> split = std::nullopt);

  std::size_t size() const override { return records_.size(); }
  std::string scene_id(std::size_t i) const override { return records_[i].scene_id; }
  Illuminant ground_truth(std::size_t i) const override { return records_[i].gt; }
  DualExposurePair load_pair(std::size_t i, int e) const override;
  RawImage load_auto(std::size_t i) const override;

  const std::vector<SceneRecord>& records() const { return records_; }
  const std::filesystem::path& root() const { return root_; }
  const std::vector<int>& exposures() const { return exposures_; }
  /// Throws an Error naming every scene whose files for exposure e (or the
  /// auto frame when e == 0) are missing.
  void check_files(int e) const;

 private:
  std::filesystem::path root_;
  std::vector<int> exposures_;
  std::vector<SceneRecord> records_;
};

/// Scenes rendered on demand; identical to the files generate_dataset writes
/// for the same seed and configuration.
class SynthSource : public SceneSource {
 public:
  SynthSource(SynthConfig cfg, std::uint64_t dataset_seed, std::vector<std::size_t> indices);
  /// The scenes of one split of an n-scene dataset.
  static SynthSource split(SynthConfig cfg, std::uint64_t dataset_seed, std::size_t n_scenes, Split s);

  std::size_t size() const override { return indices_.size(); }
  std::string scene_id(std::size_t i) const override;
  Illuminant ground_truth(std::size_t i) const override;
  DualExposurePair load_pair(std::size_t i, int e) const override;
  RawImage load_auto(std::size_t i) const override;

 private:
  SynthConfig cfg_;
  std::uint64_t seed_;
  std::vector<std::size_t> indices_;
};

/// A training or evaluation sample reduced to model inputs.
struct PreparedSample {
  std::string scene_id;
  std::vector<double> def;
  std::vector<SparseHistogram> histograms;  // empty unless requested
  Illuminant gt;
};

struct PrepareOptions {
  int e = 8;
  DefConfig def;
  // Histograms are built when set.
  std::optional<EcccConfig> eccc;
};

PreparedSample prepare_sample(const DualExposurePair& pair, const std::string& scene_id, const PrepareOptions& opt);
std::vector<PreparedSample> prepare_samples(const SceneSource& src, const PrepareOptions& opt);

}  // namespace duxwb

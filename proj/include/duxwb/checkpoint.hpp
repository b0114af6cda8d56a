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

// Checkpoints: a text manifest plus a little-endian float32 blob stored
// next to it as "<manifest>.bin".
//
//   duxwb-checkpoint 1
//   kind eccc
//   meta hist_size 64
//   blob m.ckpt.bin
//   tensor filter.long f32 16,16 0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "duxwb/eccc.hpp"
#include "duxwb/emlp.hpp"
#include "duxwb/params.hpp"

namespace duxwb {

using Meta = std::map<std::string, std::string>;

struct CheckpointData {
  std::string kind;
  Meta meta;
  std::vector<TensorSpec> tensors;
  std::vector<double> values;  // float32 values widened to double
};

void save_checkpoint(const std::filesystem::path& path, const std::string& kind, const Meta& meta,
                     const ParamStore& params);
CheckpointData load_checkpoint(const std::filesystem::path& path);

/// Either trained model.
using Model = std::variant<EmlpModel, EcccModel>;

std::string model_kind(const Model& m);
/// Configuration entries needed to rebuild the model.
Meta model_meta(const Model& m);
/// Unit-norm illuminant estimate for a pair.
Illuminant predict(const Model& m, const DualExposurePair& pair);
/// DEF configuration the model consumes.
const DefConfig& def_config(const Model& m);

/// Writes the model plus extra metadata (merged, model entries win).
void save_model(const std::filesystem::path& path, const Model& m, const Meta& extra = {});

struct LoadedModel {
  Model model;
  Meta meta;
};
LoadedModel load_model(const std::filesystem::path& path);

void write_def_meta(const DefConfig& cfg, Meta& meta);
DefConfig read_def_meta(const Meta& meta);

}  // namespace duxwb

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

// Training loops for both models, ECCC bias initialization and ensembling.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <string_view>
#include <vector>

#include "duxwb/checkpoint.hpp"
#include "duxwb/dataset.hpp"

namespace duxwb {

enum class ModelKind { emlp, eccc };
std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

struct TrainConfig {
  ModelKind model = ModelKind::emlp;
  // 0 returns the initialized model.
  int epochs = 1000;
  int batch_size = 32;
  // Batch size doubles after each third of the epochs, starting at
  // batch_size / 2 (16 -> 32 -> 64 for the default 32).
  bool incremental_batch = false;
  double lr = 1e-3;
  double lr_min = 0.0;
  bool cosine = false;
  double weight_decay = 0.0;
  std::uint64_t seed = 1;
  // Validation loss is logged every val_every epochs (0 disables).
  int val_every = 1;
  // Fit a DefNormalizer on the training DEFs (two or more samples) and attach
  // it to the model.
  bool normalize_inputs = true;
  EmlpConfig emlp;
  EcccConfig eccc;

  /// Recipe defaults for a model kind.
  static TrainConfig defaults(ModelKind kind);
  void validate() const;
  /// Batch size used in a given epoch.
  int batch_for_epoch(int epoch) const;
  double lr_for_epoch(int epoch) const;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;  // mean angular error, degrees
  double smoothness = 0.0;  // mean S_B + S_F (ECCC)
  double val_loss = std::numeric_limits<double>::quiet_NaN();
  double lr = 0.0;
  int batch_size = 0;
};

struct TrainResult {
  Model model;
  std::vector<EpochLog> log;
  std::size_t skipped_steps = 0;  // degenerate outputs or non-finite gradients
  bool aborted = false;  // non-finite epoch loss; model holds the last good parameters
};

using EpochCallback = std::function<void(const EpochLog&)>;

TrainResult train(const TrainConfig& cfg, const std::vector<PreparedSample>& train_set,
                  const std::vector<PreparedSample>* val_set = nullptr, const EpochCallback& on_epoch = {});

/// Columns: epoch, split, loss_mean_deg, smoothness_terms, lr, batch_size.
void write_loss_csv(const std::filesystem::path& path, const std::vector<EpochLog>& log);

/// Max over the 4-neighborhood plus center.
Grid dilate_diamond(const Grid& g);

/// Per-cluster maps of ground-truth log-chroma on the q x q grid that
/// bilinear upsampling stretches over the h x h histogram, dilated and
/// scaled to peak 1. Clusters without members get a constant map of 1.
std::vector<Grid> init_eccc_biases(const std::vector<std::vector<double>>& defs, const std::vector<Illuminant>& gts,
                                   int n, int h, std::uint64_t seed);

/// Single map over all ground truths at full resolution h x h.
Grid init_full_bias(const std::vector<Illuminant>& gts, int h);

/// Componentwise mean of two unit illuminants, renormalized.
Illuminant ensemble(const Illuminant& a, const Illuminant& b);

/// Same samples with ground truths permuted by seed (null-signal control).
std::vector<PreparedSample> shuffle_labels(std::vector<PreparedSample> samples, std::uint64_t seed);

/// Mean angular error of a model over prepared samples.
double mean_error(const Model& m, const std::vector<PreparedSample>& samples);
/// Prediction from a prepared sample.
Illuminant predict(const Model& m, const PreparedSample& s);

}  // namespace duxwb

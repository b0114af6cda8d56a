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

// Von Kries relighting augmentation.

#pragma once

#include <cstdint>
#include <vector>

#include "duxwb/core.hpp"
#include "duxwb/dataset.hpp"
#include "duxwb/kmeans.hpp"

namespace duxwb {

/// Channel-wise scaling by to/from, both normalized to G = 1 first.
RawImage von_kries(const RawImage& img, const Illuminant& from, const Illuminant& to, bool clip = true);
DualExposurePair von_kries(const DualExposurePair& pair, const Illuminant& from, const Illuminant& to,
                           bool clip = true);

struct AugmentPlan {
  ClusterModel clusters;
  /// donors[i][c]: sample whose ground truth copy c of sample i receives.
  std::vector<std::vector<std::size_t>> donors;
  std::size_t identity_copies = 0;  // copies from single-member clusters
};

/// Clusters the DEF vectors and draws, for every sample, `copies` donors
/// from the other members of its cluster.
AugmentPlan plan_augmentation(const std::vector<std::vector<double>>& defs, int k, int copies, std::uint64_t seed);

/// Original samples followed by their relit copies, in sample-major order.
std::vector<PreparedSample> augment_samples(const SceneSource& src, const std::vector<PreparedSample>& base,
                                            const PrepareOptions& opt, const AugmentPlan& plan);

}  // namespace duxwb

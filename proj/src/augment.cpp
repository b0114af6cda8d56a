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

#include "duxwb/augment.hpp"

#include <algorithm>

#include "duxwb/parallel.hpp"
#include "duxwb/rng.hpp"

namespace duxwb {

RawImage von_kries(const RawImage& img, const Illuminant& from, const Illuminant& to, bool clip) {
  const Illuminant a = from.green_normalized(), b = to.green_normalized();
  const std::array<double, 3> gain{b.r / a.r, 1.0, b.b / a.b};
  RawImage out = img;
  for (int c = 0; c < 3; ++c)
    for (float& v : out.plane(c)) {
      double x = v * gain[static_cast<std::size_t>(c)];
      if (clip) x = std::clamp(x, 0.0, 1.0);
      v = static_cast<float>(x);
    }
  return out;
}

DualExposurePair von_kries(const DualExposurePair& pair, const Illuminant& from, const Illuminant& to, bool clip) {
  DualExposurePair out;
  out.long_exposure = von_kries(pair.long_exposure, from, to, clip);
  out.short_exposure = von_kries(pair.short_exposure, from, to, clip);
  out.exposure_factor = pair.exposure_factor;
  out.ground_truth = to.normalized();
  return out;
}

AugmentPlan plan_augmentation(const std::vector<std::vector<double>>& defs, int k, int copies, std::uint64_t seed) {
  AugmentPlan plan;
  const std::size_t n = defs.size();
  if (n == 0) return plan;
  plan.clusters = kmeans(normalize_rows(defs), std::min<int>(k, static_cast<int>(n)), seed);
  std::vector<std::vector<std::size_t>> members(plan.clusters.centroids.size());
  for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(plan.clusters.assignment[i])].push_back(i);
  Rng rng(mix_seed(seed, 0xA06));
  plan.donors.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = members[static_cast<std::size_t>(plan.clusters.assignment[i])];
    for (int c = 0; c < copies; ++c) {
      if (m.size() < 2) {
        plan.donors[i].push_back(i);
        ++plan.identity_copies;
        continue;
      }
      std::size_t j = m[rng.below(m.size() - 1)];
      if (j == i) j = m.back();  // skip self: draw from the other members
      plan.donors[i].push_back(j);
    }
  }
  return plan;
}

std::vector<PreparedSample> augment_samples(const SceneSource& src, const std::vector<PreparedSample>& base,
                                            const PrepareOptions& opt, const AugmentPlan& plan) {
  if (plan.donors.size() != base.size()) throw Error("augmentation plan does not match the sample set");
  const std::size_t copies = base.empty() ? 0 : plan.donors[0].size();
  std::vector<PreparedSample> out(base.size() * (copies + 1));
  parallel_for(base.size(), [&](std::size_t i) {
    out[i * (copies + 1)] = base[i];
    if (copies == 0) return;
    const DualExposurePair pair = src.load_pair(i, opt.e);
    for (std::size_t c = 0; c < copies; ++c) {
      const Illuminant& to = base[plan.donors[i][c]].gt;
      out[i * (copies + 1) + c + 1] =
          prepare_sample(von_kries(pair, base[i].gt, to), base[i].scene_id + "+aug" + std::to_string(c), opt);
    }
  });
  return out;
}

}  // namespace duxwb

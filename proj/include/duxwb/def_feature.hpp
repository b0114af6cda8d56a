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

// Dual-exposure feature: a chromaticity mapping between the short and long
// frames plus the covariance of their per-channel ratio image.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "duxwb/core.hpp"

namespace duxwb {

enum class ColorRepr { rgb, rg_chroma, rgb_chroma };
enum class MappingKind { linear3x3, affine3x4, homography3x3 };
enum class MapDirection { short_to_long, long_to_short };

std::string_view to_string(ColorRepr v);
std::string_view to_string(MappingKind v);
std::string_view to_string(MapDirection v);
ColorRepr parse_color_repr(std::string_view s);
MappingKind parse_mapping(std::string_view s);
MapDirection parse_direction(std::string_view s);

struct DefConfig {
  ColorRepr color_repr = ColorRepr::rgb_chroma;
  MappingKind mapping = MappingKind::linear3x3;
  MapDirection direction = MapDirection::short_to_long;
  double eps_ratio = 1e-6;
  double eps_chroma = 1e-6;
  bool include_covariance = true;
  // Drop pixels where either frame has a channel at or above
  // saturation_level before fitting. Off by default: clipping asymmetry is
  // part of the signal.
  bool mask_saturated = false;
  float saturation_level = 0.999f;

  /// Number of feature entries this configuration produces.
  int length() const;
  void validate() const;
};

/// Feature vector. For the default configuration entries 0-8 are the
/// row-major chromaticity map and 9-14 the covariance upper triangle
/// (v11, v12, v13, v22, v23, v33).
struct DefVector {
  std::vector<double> values;
  bool degenerate = false;  // mapping fit was rank deficient

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// X = I_s / (I_l + eps), channel-wise.
Mat3xK ratio_image(const DualExposurePair& pair, double eps);

/// The six unique entries of a symmetric matrix, row-major upper triangle.
std::array<double, 6> upper_triangle(const Mat3& m);
Mat3 from_upper_triangle(std::span<const double, 6> v);

/// Color representation used for the mapping fit, as a 3 x k matrix.
Mat3xK color_representation(const RawImage& img, ColorRepr repr, double eps);

DefVector compute_def(const DualExposurePair& pair, const DefConfig& cfg = {});

/// Fixed (non-trainable) input transform applied by the learned models:
///   z_i = clamp((sign(x_i) * log1p(|x_i| / s_i) - mu_i) / sigma_i, -clip, clip)
/// The covariance entries are heavy tailed (near-dark long-frame pixels blow
/// up the ratio), so raw values swamp the first layer. An empty normalizer is
/// the identity.
struct DefNormalizer {
  std::vector<double> scale;
  std::vector<double> mean;
  std::vector<double> stddev;
  double clip = 3.0;

  bool empty() const { return scale.empty(); }
  std::size_t size() const { return scale.size(); }
  /// Statistics from a set of feature rows (median |x| for s, then mean and
  /// population std of the log-compressed values).
  static DefNormalizer fit(const std::vector<std::vector<double>>& rows, double clip = 3.0);
  std::vector<double> apply(std::span<const double> x) const;
};

/// Fits a normalizer on rows and returns the transformed rows (used before
/// clustering features).
std::vector<std::vector<double>> normalize_rows(const std::vector<std::vector<double>>& rows);

// Mapping-matrix variants -------------------------------------------------

struct AffineMap {
  Mat3 rotation;  // R_aff (proper rotation)
  double scale = 1.0;  // alpha
  std::array<double, 3> translation{};  // T_aff
  bool degenerate = false;

  /// [alpha * R | T] as 12 row-major entries.
  std::array<double, 12> flattened() const;
  std::array<double, 3> apply(std::span<const double, 3> x) const;
};

/// Similarity transform (rotation, isotropic scale, translation) mapping the
/// source point cloud onto the target in the least-squares sense.
AffineMap affine_map(const Mat3xK& source, const Mat3xK& target);

struct HomographyMap {
  Mat3 h;  // normalized so h(2,2) = 1 when possible
  bool degenerate = false;
};

/// Direct linear transform between (r, g, 1) point sets, minimizing the
/// algebraic error. Rows of both inputs must be (r, g, 1).
HomographyMap homography_map(const Mat3xK& source_rg1, const Mat3xK& target_rg1);

}  // namespace duxwb

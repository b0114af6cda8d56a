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

#include "duxwb/def_feature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "duxwb/kernels.hpp"

namespace duxwb {

std::string_view to_string(ColorRepr v) {
  switch (v) {
    case ColorRepr::rgb: return "rgb";
    case ColorRepr::rg_chroma: return "rg_chroma";
    case ColorRepr::rgb_chroma: return "rgb_chroma";
  }
  return "?";
}

std::string_view to_string(MappingKind v) {
  switch (v) {
    case MappingKind::linear3x3: return "linear3x3";
    case MappingKind::affine3x4: return "affine3x4";
    case MappingKind::homography3x3: return "homography3x3";
  }
  return "?";
}

std::string_view to_string(MapDirection v) {
  return v == MapDirection::short_to_long ? "short_to_long" : "long_to_short";
}

ColorRepr parse_color_repr(std::string_view s) {
  for (ColorRepr v : {ColorRepr::rgb, ColorRepr::rg_chroma, ColorRepr::rgb_chroma})
    if (to_string(v) == s) return v;
  throw Error("unknown color representation: " + std::string(s));
}

MappingKind parse_mapping(std::string_view s) {
  if (s == "cm") return MappingKind::linear3x3;
  if (s == "tm") return MappingKind::affine3x4;
  if (s == "hm") return MappingKind::homography3x3;
  for (MappingKind v : {MappingKind::linear3x3, MappingKind::affine3x4, MappingKind::homography3x3})
    if (to_string(v) == s) return v;
  throw Error("unknown mapping kind: " + std::string(s));
}

MapDirection parse_direction(std::string_view s) {
  if (s == "short_to_long") return MapDirection::short_to_long;
  if (s == "long_to_short") return MapDirection::long_to_short;
  throw Error("unknown mapping direction: " + std::string(s));
}

int DefConfig::length() const {
  int n = 9;
  if (mapping == MappingKind::affine3x4) n = 12;
  if (mapping == MappingKind::linear3x3 && color_repr == ColorRepr::rg_chroma) n = 4;
  return include_covariance ? n + 6 : n;
}

void DefConfig::validate() const {
  if (eps_ratio < 0.0 || eps_chroma < 0.0) throw Error("DEF epsilons must be non-negative");
}

Mat3xK ratio_image(const DualExposurePair& pair, double eps) {
  const std::size_t k = pair.long_exposure.pixels();
  if (pair.short_exposure.pixels() != k) throw Error("ratio_image: frames are not aligned");
  Mat3xK x = Mat3xK::uninitialized(k);
  const auto& kt = kernels::active();
  for (int c = 0; c < 3; ++c)
    kt.ratio(pair.short_exposure.plane(c).data(), pair.long_exposure.plane(c).data(), x.row(c).data(), k, eps);
  return x;
}

std::array<double, 6> upper_triangle(const Mat3& m) {
  return {m(0, 0), m(0, 1), m(0, 2), m(1, 1), m(1, 2), m(2, 2)};
}

Mat3 from_upper_triangle(std::span<const double, 6> v) {
  Mat3 m;
  m(0, 0) = v[0];
  m(0, 1) = m(1, 0) = v[1];
  m(0, 2) = m(2, 0) = v[2];
  m(1, 1) = v[3];
  m(1, 2) = m(2, 1) = v[4];
  m(2, 2) = v[5];
  return m;
}

Mat3xK color_representation(const RawImage& img, ColorRepr repr, double eps) {
  switch (repr) {
    case ColorRepr::rgb: return to_matrix(img);
    case ColorRepr::rgb_chroma: return chromaticity_matrix(img, eps);
    case ColorRepr::rg_chroma: {
      // (r, g) with a zero third row; the linear fit then reduces to 2 x 2.
      Mat3xK m = chromaticity_matrix(img, eps);
      std::fill(m.row(2).begin(), m.row(2).end(), 0.0);
      return m;
    }
  }
  throw Error("unknown color representation");
}

namespace {

Mat3xK rg1(const RawImage& img, double eps) {
  Mat3xK m = chromaticity_matrix(img, eps);
  std::fill(m.row(2).begin(), m.row(2).end(), 1.0);
  return m;
}

RawImage gather(const RawImage& img, const std::vector<std::size_t>& idx) {
  RawImage out(static_cast<int>(idx.size()), 1);
  for (int c = 0; c < 3; ++c) {
    const auto src = img.plane(c);
    auto dst = out.plane(c);
    for (std::size_t i = 0; i < idx.size(); ++i) dst[i] = src[idx[i]];
  }
  return out;
}

DualExposurePair drop_saturated(const DualExposurePair& pair, float level) {
  std::vector<std::size_t> keep;
  const std::size_t k = pair.long_exposure.pixels();
  keep.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    bool ok = true;
    for (int c = 0; c < 3 && ok; ++c)
      ok = pair.long_exposure.plane(c)[i] < level && pair.short_exposure.plane(c)[i] < level;
    if (ok) keep.push_back(i);
  }
  DualExposurePair out;
  out.long_exposure = gather(pair.long_exposure, keep);
  out.short_exposure = gather(pair.short_exposure, keep);
  out.exposure_factor = pair.exposure_factor;
  out.ground_truth = pair.ground_truth;
  return out;
}

}  // namespace

DefVector compute_def(const DualExposurePair& input, const DefConfig& cfg) {
  cfg.validate();
  if (input.long_exposure.width != input.short_exposure.width ||
      input.long_exposure.height != input.short_exposure.height)
    throw Error("compute_def: frames are not aligned");

  DualExposurePair masked;
  const DualExposurePair* pair = &input;
  if (cfg.mask_saturated) {
    masked = drop_saturated(input, cfg.saturation_level);
    pair = &masked;
  }
  if (pair->long_exposure.pixels() < 16) throw Error("compute_def: at least 16 pixels are required");

  const bool s2l = cfg.direction == MapDirection::short_to_long;
  const RawImage& src = s2l ? pair->short_exposure : pair->long_exposure;
  const RawImage& dst = s2l ? pair->long_exposure : pair->short_exposure;

  DefVector out;
  out.values.reserve(static_cast<std::size_t>(cfg.length()));
  switch (cfg.mapping) {
    case MappingKind::linear3x3: {
      const LeastSquaresMap fit = pinv_map(color_representation(src, cfg.color_repr, cfg.eps_chroma),
                                           color_representation(dst, cfg.color_repr, cfg.eps_chroma));
      if (cfg.color_repr == ColorRepr::rg_chroma) {
        out.degenerate = fit.rank < 2;
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) out.values.push_back(fit.map(i, j));
      } else {
        out.degenerate = fit.rank_deficient();
        out.values.insert(out.values.end(), fit.map.m.begin(), fit.map.m.end());
      }
      break;
    }
    case MappingKind::affine3x4: {
      const AffineMap fit = affine_map(color_representation(src, cfg.color_repr, cfg.eps_chroma),
                                       color_representation(dst, cfg.color_repr, cfg.eps_chroma));
      out.degenerate = fit.degenerate;
      const auto flat = fit.flattened();
      out.values.insert(out.values.end(), flat.begin(), flat.end());
      break;
    }
    case MappingKind::homography3x3: {
      const HomographyMap fit = homography_map(rg1(src, cfg.eps_chroma), rg1(dst, cfg.eps_chroma));
      out.degenerate = fit.degenerate;
      out.values.insert(out.values.end(), fit.h.m.begin(), fit.h.m.end());
      break;
    }
  }
  if (cfg.include_covariance) {
    const auto tri = upper_triangle(covariance3(ratio_image(*pair, cfg.eps_ratio)));
    out.values.insert(out.values.end(), tri.begin(), tri.end());
  }
  return out;
}

DefNormalizer DefNormalizer::fit(const std::vector<std::vector<double>>& rows, double clip) {
  if (rows.empty()) throw Error("DefNormalizer: no rows to fit");
  const std::size_t d = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != d) throw Error("DefNormalizer: rows have different lengths");
  if (!(clip > 0.0)) throw Error("DefNormalizer: clip must be positive");
  const double n = static_cast<double>(rows.size());
  DefNormalizer out;
  out.clip = clip;
  out.scale.resize(d);
  out.mean.assign(d, 0.0);
  out.stddev.assign(d, 0.0);
  std::vector<double> col(rows.size());
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < rows.size(); ++k) col[k] = std::abs(rows[k][i]);
    auto mid = col.begin() + static_cast<std::ptrdiff_t>(col.size() / 2);
    std::nth_element(col.begin(), mid, col.end());
    out.scale[i] = *mid > 0.0 ? *mid : 1.0;
  }
  DefNormalizer raw = out;
  raw.mean.assign(d, 0.0);
  raw.stddev.assign(d, 1.0);
  raw.clip = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    const auto z = raw.apply(r);
    for (std::size_t i = 0; i < d; ++i) out.mean[i] += z[i];
  }
  for (double& m : out.mean) m /= n;
  for (const auto& r : rows) {
    const auto z = raw.apply(r);
    for (std::size_t i = 0; i < d; ++i) out.stddev[i] += (z[i] - out.mean[i]) * (z[i] - out.mean[i]);
  }
  for (double& s : out.stddev) s = s > 0.0 ? std::sqrt(s / n) : 1.0;
  return out;
}

std::vector<double> DefNormalizer::apply(std::span<const double> x) const {
  if (empty()) return {x.begin(), x.end()};
  if (x.size() != size()) throw Error("DefNormalizer: feature length mismatch");
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = std::copysign(std::log1p(std::abs(x[i]) / scale[i]), x[i]);
    z[i] = std::clamp((c - mean[i]) / stddev[i], -clip, clip);
  }
  return z;
}

std::vector<std::vector<double>> normalize_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  const DefNormalizer n = DefNormalizer::fit(rows);
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(n.apply(r));
  return out;
}

}  // namespace duxwb

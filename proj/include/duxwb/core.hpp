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

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace duxwb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an input lies outside an operation's mathematical domain
/// (zero-norm vectors, empty histograms, degenerate network outputs).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Planar three-channel raw image. Intensities are normalized so the sensor
/// white level maps to 1.
struct RawImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // R plane, then G, then B

  RawImage() = default;
  RawImage(int w, int h, float fill = 0.0f);

  std::size_t pixels() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  std::span<float> plane(int c);
  std::span<const float> plane(int c) const;
  float& at(int c, int x, int y) { return plane(c)[static_cast<std::size_t>(y) * width + x]; }
  float at(int c, int x, int y) const { return plane(c)[static_cast<std::size_t>(y) * width + x]; }

  /// Throws Error unless dimensions match the buffer and every value is finite and >= 0.
  void validate() const;
};

struct Illuminant {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  std::array<double, 3> rgb() const { return {r, g, b}; }
  double norm() const;
  /// Unit Euclidean norm. Throws DomainError on the zero vector.
  Illuminant normalized() const;
  /// Scaled so the green component is 1. Throws DomainError if g <= 0.
  Illuminant green_normalized() const;
  static Illuminant from(std::span<const double, 3> v) { return {v[0], v[1], v[2]}; }
};

struct DualExposurePair {
  RawImage long_exposure;
  RawImage short_exposure;
  int exposure_factor = 8;
  std::optional<Illuminant> ground_truth;

  void validate() const;
};

/// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{};

  static Mat3 identity();
  static Mat3 diag(double a, double b, double c);

  double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }
  double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }

  Mat3 operator*(const Mat3& o) const;
  Mat3 operator-(const Mat3& o) const;
  Mat3 transposed() const;
  double frobenius() const;
  double determinant() const;
  std::array<double, 3> apply(std::span<const double, 3> v) const;
};

/// Dense 3 x k matrix, each row contiguous.
class Mat3xK {
 public:
  Mat3xK() = default;
  explicit Mat3xK(std::size_t k) : k_(k), v_(3 * k, 0.0) {}
  /// Entries left unset; for callers that overwrite every row.
  static Mat3xK uninitialized(std::size_t k) {
    Mat3xK m;
    m.k_ = k;
    m.v_.resize(3 * k);
    return m;
  }

  std::size_t cols() const { return k_; }
  std::span<double> row(int r) { return {v_.data() + static_cast<std::size_t>(r) * k_, k_}; }
  std::span<const double> row(int r) const { return {v_.data() + static_cast<std::size_t>(r) * k_, k_}; }
  double& operator()(int r, std::size_t c) { return v_[static_cast<std::size_t>(r) * k_ + c]; }
  double operator()(int r, std::size_t c) const { return v_[static_cast<std::size_t>(r) * k_ + c]; }

 private:
  // Value-initialization becomes default-initialization, so resize() does not
  // zero-fill.
  template <class T>
  struct NoFillAllocator : std::allocator<T> {
    template <class U>
    struct rebind {
      using other = NoFillAllocator<U>;
    };
    template <class U>
    void construct(U* p) noexcept {
      ::new (static_cast<void*>(p)) U;
    }
    template <class U, class... Args>
    void construct(U* p, Args&&... args) {
      ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
    }
  };

  std::size_t k_ = 0;
  std::vector<double, NoFillAllocator<double>> v_;
};

/// Row-major 2D grid of doubles (histograms, filters, bias maps).
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Grid() = default;
  Grid(int r, int c, double fill = 0.0) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
  std::size_t size() const { return v.size(); }
};

struct Svd3 {
  Mat3 u;  // orthonormal columns
  std::array<double, 3> s{};  // descending
  Mat3 v;  // orthonormal columns
  int rank = 0;  // singular values above 1e-10 * s[0]
};

/// One-sided Jacobi SVD of a 3x3 matrix, a = u * diag(s) * v^T. Columns of u
/// belonging to zero singular values are completed to an orthonormal basis.
Svd3 svd3(const Mat3& a);

constexpr double kPi = 3.14159265358979323846;
constexpr double kRankTolerance = 1e-10;

/// Angle between two RGB vectors in degrees.
double angular_error(const Illuminant& a, const Illuminant& b);
double angular_error(std::span<const double, 3> a, std::span<const double, 3> b);

/// Angular loss (degrees) of a raw, unnormalized prediction against a target,
/// together with its gradient with respect to the prediction. The derivative
/// of acos is evaluated at |cos| <= 1 - 1e-7.
struct AngularLoss {
  double degrees = 0.0;
  std::array<double, 3> grad{};
};
AngularLoss angular_loss(std::span<const double, 3> prediction, const Illuminant& target);

/// Per pixel: each channel divided by (R + G + B + eps).
RawImage to_rgb_chromaticity(const RawImage& img, double eps);

/// The same conversion, returned as a double-precision 3 x k matrix.
Mat3xK chromaticity_matrix(const RawImage& img, double eps);

/// Image planes as a 3 x k matrix.
Mat3xK to_matrix(const RawImage& img);

struct LeastSquaresMap {
  Mat3 map;
  int rank = 3;
  bool rank_deficient() const { return rank < 3; }
};

/// C minimizing ||C * source - target||_F through the Moore-Penrose
/// pseudoinverse of the source. Sources with condition number below 1e4 go
/// through the normal equations; the rest through Householder QR of
/// source^T and a 3x3 SVD, truncating singular values below 1e-10 * sigma_max.
LeastSquaresMap pinv_map(const Mat3xK& source, const Mat3xK& target);

/// Population covariance E[(X - E[X])(X - E[X])^T]. Requires k >= 2.
Mat3 covariance3(const Mat3xK& x);

/// Align-corners bilinear upsampling of a square grid: m -> m * factor.
Grid bilinear_upsample(const Grid& grid, int factor);

/// Adjoint of bilinear_upsample: maps a gradient on the (m*factor)^2 grid back
/// onto the m^2 source grid.
Grid bilinear_upsample_adjoint(const Grid& grad, int source_size, int factor);

}  // namespace duxwb

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

#include "duxwb/fft_correlate.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

namespace duxwb {
namespace {

// The FFTW planner is not thread-safe; executing existing plans is.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

SpectralCorrelator::SpectralCorrelator(int h) : h_(h), n_(2 * h) {
  if (h < 2) throw Error("correlator size must be at least 2");
  std::vector<double> real(static_cast<std::size_t>(n_ * n_));
  Spectrum cplx(static_cast<std::size_t>(n_ * (n_ / 2 + 1)));
  auto* c = reinterpret_cast<fftw_complex*>(cplx.data());
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_r2c_ = fftw_plan_dft_r2c_2d(n_, n_, real.data(), c, FFTW_ESTIMATE | FFTW_UNALIGNED);
  plan_c2r_ = fftw_plan_dft_c2r_2d(n_, n_, c, real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (plan_r2c_ == nullptr || plan_c2r_ == nullptr) throw Error("FFTW planning failed");
}

SpectralCorrelator::~SpectralCorrelator() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_r2c_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_r2c_));
  if (plan_c2r_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_c2r_));
}

SpectralCorrelator::Spectrum SpectralCorrelator::forward(std::vector<double>& padded) const {
  Spectrum out(static_cast<std::size_t>(n_ * (n_ / 2 + 1)));
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_r2c_), padded.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> SpectralCorrelator::inverse(const Spectrum& s) const {
  Spectrum tmp = s;  // c2r overwrites its input
  std::vector<double> out(static_cast<std::size_t>(n_ * n_));
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_c2r_), reinterpret_cast<fftw_complex*>(tmp.data()), out.data());
  const double scale = 1.0 / (static_cast<double>(n_) * n_);
  for (double& v : out) v *= scale;
  return out;
}

SpectralCorrelator::Spectrum SpectralCorrelator::signal_spectrum(const Grid& g) const {
  if (g.rows != h_ || g.cols != h_) throw Error("signal grid size mismatch");
  std::vector<double> padded(static_cast<std::size_t>(n_ * n_), 0.0);
  for (int r = 0; r < h_; ++r)
    for (int c = 0; c < h_; ++c) padded[static_cast<std::size_t>(r * n_ + c)] = g(r, c);
  return forward(padded);
}

SpectralCorrelator::Spectrum SpectralCorrelator::filter_spectrum(const Grid& f) const {
  if (f.rows != h_ || f.cols != h_) throw Error("filter grid size mismatch");
  const int center = h_ / 2;
  std::vector<double> padded(static_cast<std::size_t>(n_ * n_), 0.0);
  for (int a = 0; a < h_; ++a) {
    const int dy = ((a - center) % n_ + n_) % n_;
    for (int b = 0; b < h_; ++b) {
      const int dx = ((b - center) % n_ + n_) % n_;
      padded[static_cast<std::size_t>(dy * n_ + dx)] = f(a, b);
    }
  }
  return forward(padded);
}

void SpectralCorrelator::accumulate(Spectrum& acc, const Spectrum& filter, const Spectrum& signal) {
  if (acc.empty()) acc.assign(signal.size(), {0.0, 0.0});
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::conj(filter[i]) * signal[i];
}

Grid SpectralCorrelator::correlation(const Spectrum& product) const {
  const auto full = inverse(product);
  Grid out(h_, h_);
  for (int r = 0; r < h_; ++r)
    for (int c = 0; c < h_; ++c) out(r, c) = full[static_cast<std::size_t>(r * n_ + c)];
  return out;
}

Grid SpectralCorrelator::filter_gradient(const Spectrum& signal, const Spectrum& grad) const {
  Spectrum prod(signal.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = std::conj(grad[i]) * signal[i];
  const auto full = inverse(prod);
  const int center = h_ / 2;
  Grid out(h_, h_);
  for (int a = 0; a < h_; ++a) {
    const int dy = ((a - center) % n_ + n_) % n_;
    for (int b = 0; b < h_; ++b) {
      const int dx = ((b - center) % n_ + n_) % n_;
      out(a, b) = full[static_cast<std::size_t>(dy * n_ + dx)];
    }
  }
  return out;
}

Grid SpectralCorrelator::correlate(const Grid& g, const Grid& f) const {
  Spectrum acc;
  accumulate(acc, filter_spectrum(f), signal_spectrum(g));
  return correlation(acc);
}

const SpectralCorrelator& correlator_for(int h) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<SpectralCorrelator>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[h];
  if (!slot) slot = std::make_unique<SpectralCorrelator>(h);
  return *slot;
}

}  // namespace duxwb

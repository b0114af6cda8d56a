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

#include "duxwb/eccc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace duxwb {

std::string_view to_string(HistogramInput v) {
  switch (v) {
    case HistogramInput::both: return "both";
    case HistogramInput::average: return "average";
    case HistogramInput::short_only: return "short";
    case HistogramInput::long_only: return "long";
  }
  return "?";
}

HistogramInput parse_histogram_input(std::string_view s) {
  for (HistogramInput v :
       {HistogramInput::both, HistogramInput::average, HistogramInput::short_only, HistogramInput::long_only})
    if (to_string(v) == s) return v;
  throw Error("unknown histogram input: " + std::string(s));
}

void EcccConfig::validate() const {
  if (hist_size < 8 || hist_size % 4 != 0) throw Error("histogram size must be a multiple of 4, at least 8");
  if (use_def && n_biases < 1) throw Error("bias bank needs at least one map");
  if (lambda_bias < 0.0 || lambda_filter < 0.0) throw Error("smoothness weights must be non-negative");
  def.validate();
}

namespace {

SparseHistogram unit_histogram(const RawImage& img, int h) {
  return SparseHistogram::from_grid(normalized_mass(build_histogram(img, h)));
}

RawImage average_image(const RawImage& a, const RawImage& b) {
  if (a.width != b.width || a.height != b.height) throw Error("frames are not aligned");
  RawImage out(a.width, a.height);
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = 0.5f * (a.data[i] + b.data[i]);
  return out;
}

void softmax_inplace(std::vector<double>& x) {
  const double mx = *std::max_element(x.begin(), x.end());
  double sum = 0.0;
  for (double& v : x) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : x) v /= sum;
}

// d(loss)/d(logits) of a softmax given d(loss)/d(probabilities).
void softmax_backward(const std::vector<double>& p, std::vector<double>& g) {
  double dot = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) dot += p[i] * g[i];
  for (std::size_t i = 0; i < p.size(); ++i) g[i] = p[i] * (g[i] - dot);
}

Grid tensor_grid(std::span<const double> t, int rows, int cols, std::size_t offset = 0) {
  Grid g(rows, cols);
  std::copy(t.begin() + static_cast<std::ptrdiff_t>(offset),
            t.begin() + static_cast<std::ptrdiff_t>(offset + g.size()), g.v.begin());
  return g;
}

void add_into(std::span<double> dst, const Grid& g) {
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g.v[i];
}

constexpr int kSobel[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};

}  // namespace

EcccInputs make_eccc_inputs(const EcccConfig& cfg, const DualExposurePair& pair, const DefVector* def) {
  const int h = cfg.hist_size;
  EcccInputs in;
  switch (cfg.input) {
    case HistogramInput::both:
      in.histograms.push_back(unit_histogram(pair.long_exposure, h));
      in.histograms.push_back(unit_histogram(pair.short_exposure, h));
      break;
    case HistogramInput::average:
      in.histograms.push_back(unit_histogram(average_image(pair.long_exposure, pair.short_exposure), h));
      break;
    case HistogramInput::short_only: in.histograms.push_back(unit_histogram(pair.short_exposure, h)); break;
    case HistogramInput::long_only: in.histograms.push_back(unit_histogram(pair.long_exposure, h)); break;
  }
  if (cfg.use_def) in.def = def != nullptr ? def->values : compute_def(pair, cfg.def).values;
  return in;
}

EcccOutput decode_probability(Grid probability) {
  const int h = probability.rows;
  double lu = 0.0, lv = 0.0;
  for (int r = 0; r < h; ++r) {
    double row = 0.0, rowv = 0.0;
    for (int c = 0; c < h; ++c) {
      row += probability(r, c);
      rowv += bin_center(h, c) * probability(r, c);
    }
    lu += bin_center(h, r) * row;
    lv += rowv;
  }
  EcccOutput out;
  out.lu = lu;
  out.lv = lv;
  out.illuminant = uv_to_illuminant(lu, lv);
  out.probability = std::move(probability);
  return out;
}

double sobel_energy(const Grid& g) {
  double e = 0.0;
  for (int r = 1; r + 1 < g.rows; ++r)
    for (int c = 1; c + 1 < g.cols; ++c) {
      double du = 0.0, dv = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const double x = g(r + i - 1, c + j - 1);
          du += kSobel[i][j] * x;
          dv += kSobel[j][i] * x;
        }
      e += du * du + dv * dv;
    }
  return e;
}

void sobel_energy_grad(const Grid& g, double scale, Grid& grad) {
  for (int r = 1; r + 1 < g.rows; ++r)
    for (int c = 1; c + 1 < g.cols; ++c) {
      double du = 0.0, dv = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const double x = g(r + i - 1, c + j - 1);
          du += kSobel[i][j] * x;
          dv += kSobel[j][i] * x;
        }
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) grad(r + i - 1, c + j - 1) += 2.0 * scale * (kSobel[i][j] * du + kSobel[j][i] * dv);
    }
}

EcccModel::EcccModel(EcccConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const int q = cfg_.filter_size();
  switch (cfg_.input) {
    case HistogramInput::both: filter_names_ = {"filter.long", "filter.short"}; break;
    case HistogramInput::average: filter_names_ = {"filter.average"}; break;
    case HistogramInput::short_only: filter_names_ = {"filter.short"}; break;
    case HistogramInput::long_only: filter_names_ = {"filter.long"}; break;
  }
  for (const auto& name : filter_names_) params_.add(name, {q, q});
  if (cfg_.use_def) {
    params_.add("bias.bank", {cfg_.n_biases, q, q});
    mlp_ = Mlp({cfg_.def.length(), cfg_.n_biases, 9}, params_, "weights.", cfg_.leaky_slope);
  } else {
    params_.add("bias.full", {cfg_.hist_size, cfg_.hist_size});
  }
}

void EcccModel::init(std::uint64_t seed) {
  std::fill(params_.values().begin(), params_.values().end(), 0.0);
  if (cfg_.use_def) {
    Rng rng(seed);
    mlp_.init_glorot(params_.values(), rng);
  }
  params_.round_to_f32();
}

EcccModel::Prepared EcccModel::prepare() const {
  const int q = cfg_.filter_size();
  const auto& corr = correlator_for(cfg_.hist_size);
  Prepared p;
  for (const auto& name : filter_names_) {
    p.filters_up.push_back(bilinear_upsample(tensor_grid(params_.tensor(name), q, q), 4));
    p.filter_spectra.push_back(corr.filter_spectrum(p.filters_up.back()));
  }
  return p;
}

void EcccModel::set_normalizer(DefNormalizer n) {
  if (!n.empty() && static_cast<int>(n.size()) != cfg_.def.length())
    throw Error("ECCC normalizer length does not match the DEF length");
  norm_ = std::move(n);
}

std::vector<double> EcccModel::bias_weights(std::span<const double> def) const {
  if (!cfg_.use_def) return {};
  std::vector<double> w = mlp_.forward(params_.values(), norm_.apply(def));
  softmax_inplace(w);
  return w;
}

struct EcccModel::Forward {
  std::vector<SpectralCorrelator::Spectrum> hist_spectra;
  Mlp::Trace trace;
  std::vector<double> weights;
  Grid bias_up;
  Grid probability;
  EcccOutput out;
  std::array<double, 3> raw{};
};

void EcccModel::run(const Prepared& prep, const EcccInputs& in, Forward& f) const {
  const int h = cfg_.hist_size, q = cfg_.filter_size();
  if (in.histograms.size() != filter_names_.size()) throw Error("ECCC input has the wrong number of histograms");
  const auto& corr = correlator_for(h);
  SpectralCorrelator::Spectrum acc;
  for (std::size_t j = 0; j < in.histograms.size(); ++j) {
    if (in.histograms[j].size != h) throw Error("ECCC histogram size mismatch");
    f.hist_spectra.push_back(corr.signal_spectrum(in.histograms[j].dense()));
    SpectralCorrelator::accumulate(acc, prep.filter_spectra[j], f.hist_spectra.back());
  }
  Grid z = corr.correlation(acc);

  if (cfg_.use_def) {
    if (static_cast<int>(in.def.size()) != cfg_.def.length()) throw Error("ECCC DEF vector has the wrong length");
    f.weights = mlp_.forward(params_.values(), norm_.apply(in.def), &f.trace);
    softmax_inplace(f.weights);
    const auto bank = params_.tensor("bias.bank");
    Grid mixed(q, q);
    const std::size_t qq = mixed.size();
    for (int i = 0; i < cfg_.n_biases; ++i) {
      const double w = f.weights[static_cast<std::size_t>(i)];
      for (std::size_t k = 0; k < qq; ++k) mixed.v[k] += w * bank[static_cast<std::size_t>(i) * qq + k];
    }
    f.bias_up = bilinear_upsample(mixed, 4);
  } else {
    f.bias_up = tensor_grid(params_.tensor("bias.full"), h, h);
  }
  for (std::size_t k = 0; k < z.size(); ++k) z.v[k] += f.bias_up.v[k];
  softmax_inplace(z.v);
  f.out = decode_probability(std::move(z));
  f.raw = {std::exp(-f.out.lu), 1.0, std::exp(-f.out.lv)};
}

EcccOutput EcccModel::forward(const Prepared& prep, const EcccInputs& in) const {
  Forward f;
  run(prep, in, f);
  return std::move(f.out);
}

Illuminant EcccModel::predict(const DualExposurePair& pair) const {
  return forward(make_eccc_inputs(cfg_, pair)).illuminant;
}

double EcccModel::filter_smoothness(const Prepared& prep, std::span<double> grad) const {
  const int q = cfg_.filter_size();
  double s = 0.0;
  for (std::size_t j = 0; j < prep.filters_up.size(); ++j) {
    s += sobel_energy(prep.filters_up[j]);
    if (!grad.empty() && cfg_.lambda_filter != 0.0) {
      Grid g(cfg_.hist_size, cfg_.hist_size);
      sobel_energy_grad(prep.filters_up[j], cfg_.lambda_filter, g);
      const auto& spec = params_.spec(filter_names_[j]);
      add_into(grad.subspan(spec.offset), bilinear_upsample_adjoint(g, q, 4));
    }
  }
  return cfg_.lambda_filter * s;
}

EcccLoss EcccModel::loss_and_grad(const Prepared& prep, const EcccInputs& in, const Illuminant& gt,
                                  std::span<double> grad, bool with_filter_smoothness) const {
  if (grad.size() != params_.size()) throw Error("gradient buffer size mismatch");
  const int h = cfg_.hist_size, q = cfg_.filter_size();
  Forward f;
  run(prep, in, f);

  EcccLoss loss;
  const AngularLoss al = angular_loss(f.raw, gt);
  loss.angular = al.degrees;
  loss.smooth_bias = cfg_.lambda_bias * sobel_energy(f.bias_up);
  if (with_filter_smoothness) loss.smooth_filter = filter_smoothness(prep, grad);

  // Decode: raw = (exp(-lu), 1, exp(-lv)).
  const double glu = -al.grad[0] * f.raw[0];
  const double glv = -al.grad[2] * f.raw[2];
  Grid dz(h, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < h; ++c) dz(r, c) = glu * bin_center(h, r) + glv * bin_center(h, c);
  softmax_backward(f.out.probability.v, dz.v);

  // Bias path.
  Grid dbias = dz;
  if (cfg_.lambda_bias != 0.0) sobel_energy_grad(f.bias_up, cfg_.lambda_bias, dbias);
  if (cfg_.use_def) {
    const Grid dmixed = bilinear_upsample_adjoint(dbias, q, 4);
    const auto bank = params_.tensor("bias.bank");
    const std::size_t off = params_.spec("bias.bank").offset;
    const std::size_t qq = dmixed.size();
    std::vector<double> dw(static_cast<std::size_t>(cfg_.n_biases), 0.0);
    for (int i = 0; i < cfg_.n_biases; ++i) {
      const double w = f.weights[static_cast<std::size_t>(i)];
      double d = 0.0;
      for (std::size_t k = 0; k < qq; ++k) {
        grad[off + static_cast<std::size_t>(i) * qq + k] += w * dmixed.v[k];
        d += bank[static_cast<std::size_t>(i) * qq + k] * dmixed.v[k];
      }
      dw[static_cast<std::size_t>(i)] = d;
    }
    softmax_backward(f.weights, dw);
    mlp_.backward(params_.values(), f.trace, dw, grad);
  } else {
    add_into(grad.subspan(params_.spec("bias.full").offset), dbias);
  }

  // Filter path.
  const auto& corr = correlator_for(h);
  const auto gspec = corr.signal_spectrum(dz);
  for (std::size_t j = 0; j < filter_names_.size(); ++j) {
    const Grid dup = corr.filter_gradient(f.hist_spectra[j], gspec);
    add_into(grad.subspan(params_.spec(filter_names_[j]).offset), bilinear_upsample_adjoint(dup, q, 4));
  }
  return loss;
}

std::size_t eccc_param_count(const EcccConfig& cfg) {
  const std::size_t q = static_cast<std::size_t>(cfg.filter_size());
  std::size_t n = static_cast<std::size_t>(cfg.filter_count()) * q * q;
  if (cfg.use_def) {
    n += static_cast<std::size_t>(cfg.n_biases) * q * q;
    n += Mlp::param_count({cfg.def.length(), cfg.n_biases, 9});
  } else {
    n += static_cast<std::size_t>(cfg.hist_size) * static_cast<std::size_t>(cfg.hist_size);
  }
  return n;
}

}  // namespace duxwb

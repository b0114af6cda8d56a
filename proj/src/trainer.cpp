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

#include "duxwb/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "duxwb/kmeans.hpp"
#include "duxwb/optim.hpp"
#include "duxwb/parallel.hpp"
#include "duxwb/rng.hpp"

namespace duxwb {

std::string_view to_string(ModelKind k) { return k == ModelKind::emlp ? "emlp" : "eccc"; }

ModelKind parse_model_kind(std::string_view s) {
  if (s == "emlp") return ModelKind::emlp;
  if (s == "eccc") return ModelKind::eccc;
  throw Error("unknown model kind: " + std::string(s));
}

TrainConfig TrainConfig::defaults(ModelKind kind) {
  TrainConfig c;
  c.model = kind;
  if (kind == ModelKind::eccc) {
    c.epochs = 200;
    c.incremental_batch = true;
    c.lr = 5e-3;
    c.cosine = true;
    c.weight_decay = 1e-5;
    c.val_every = 10;
  }
  return c;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw Error("epochs must be >= 0");
  if (batch_size < 1) throw Error("batch size must be >= 1");
  if (!(lr > 0.0) || lr_min < 0.0) throw Error("learning rates must be positive");
  if (weight_decay < 0.0) throw Error("weight decay must be non-negative");
}

int TrainConfig::batch_for_epoch(int epoch) const {
  if (!incremental_batch) return batch_size;
  const int stage = std::min(2, 3 * epoch / epochs);
  return std::max(1, batch_size / 2) << stage;
}

double TrainConfig::lr_for_epoch(int epoch) const { return cosine ? cosine_lr(lr, lr_min, epoch, epochs) : lr; }

Grid dilate_diamond(const Grid& g) {
  Grid out = g;
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      double m = g(r, c);
      if (r > 0) m = std::max(m, g(r - 1, c));
      if (r + 1 < g.rows) m = std::max(m, g(r + 1, c));
      if (c > 0) m = std::max(m, g(r, c - 1));
      if (c + 1 < g.cols) m = std::max(m, g(r, c + 1));
      out(r, c) = m;
    }
  return out;
}

namespace {

// Coarse grid cell of a ground truth: its fine bin index scaled onto the
// q-point grid that align-corners upsampling spreads across h bins.
std::pair<int, int> coarse_cell(const Illuminant& gt, int h, int q) {
  const auto uv = illuminant_to_uv(gt);
  const double s = static_cast<double>(q - 1) / (h - 1);
  return {static_cast<int>(std::lround(bin_index(h, uv[0]) * s)), static_cast<int>(std::lround(bin_index(h, uv[1]) * s))};
}

Grid peak_normalized(Grid g) {
  const double mx = *std::max_element(g.v.begin(), g.v.end());
  if (mx > 0.0) {
    for (double& v : g.v) v /= mx;
  } else {
    std::fill(g.v.begin(), g.v.end(), 1.0);
  }
  return g;
}

}  // namespace

std::vector<Grid> init_eccc_biases(const std::vector<std::vector<double>>& defs, const std::vector<Illuminant>& gts,
                                   int n, int h, std::uint64_t seed) {
  if (defs.size() != gts.size()) throw Error("bias init: DEF and ground-truth counts differ");
  if (n < 1) throw Error("bias init: n must be >= 1");
  const int q = h / 4;
  std::vector<Grid> maps(static_cast<std::size_t>(n), Grid(q, q));
  if (!defs.empty()) {
    const int k = std::min<int>(n, static_cast<int>(defs.size()));
    const ClusterModel cm = kmeans(normalize_rows(defs), k, seed);
    for (std::size_t i = 0; i < defs.size(); ++i) {
      const auto [r, c] = coarse_cell(gts[i], h, q);
      maps[static_cast<std::size_t>(cm.assignment[i])](r, c) += 1.0;
    }
  }
  for (auto& m : maps) m = peak_normalized(dilate_diamond(m));
  return maps;
}

Grid init_full_bias(const std::vector<Illuminant>& gts, int h) {
  Grid m(h, h);
  for (const auto& gt : gts) {
    const auto uv = illuminant_to_uv(gt);
    m(bin_index(h, uv[0]), bin_index(h, uv[1])) += 1.0;
  }
  return peak_normalized(dilate_diamond(m));
}

Illuminant ensemble(const Illuminant& a, const Illuminant& b) {
  const Illuminant m{(a.r + b.r) / 2.0, (a.g + b.g) / 2.0, (a.b + b.b) / 2.0};
  if (m.norm() < 1e-12) throw DomainError("ensemble of opposite illuminants");
  return m.normalized();
}

std::vector<PreparedSample> shuffle_labels(std::vector<PreparedSample> samples, std::uint64_t seed) {
  std::vector<Illuminant> gts;
  for (const auto& s : samples) gts.push_back(s.gt);
  Rng rng(mix_seed(seed, 0x5F1E));
  for (std::size_t i = gts.size(); i > 1; --i) std::swap(gts[i - 1], gts[rng.below(i)]);
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i].gt = gts[i];
  return samples;
}

Illuminant predict(const Model& m, const PreparedSample& s) {
  if (const auto* e = std::get_if<EmlpModel>(&m)) return e->predict(s.def);
  const auto& model = std::get<EcccModel>(m);
  return model.forward(EcccInputs{s.histograms, s.def}).illuminant;
}

double mean_error(const Model& m, const std::vector<PreparedSample>& samples) {
  if (samples.empty()) throw Error("mean_error: no samples");
  std::vector<double> err(samples.size());
  if (const auto* e = std::get_if<EmlpModel>(&m)) {
    parallel_for(samples.size(), [&](std::size_t i) { err[i] = angular_error(e->predict(samples[i].def), samples[i].gt); });
  } else {
    const auto& model = std::get<EcccModel>(m);
    const auto prep = model.prepare();
    parallel_for(samples.size(), [&](std::size_t i) {
      err[i] = angular_error(model.forward(prep, EcccInputs{samples[i].histograms, samples[i].def}).illuminant,
                             samples[i].gt);
    });
  }
  return std::accumulate(err.begin(), err.end(), 0.0) / static_cast<double>(err.size());
}

namespace {

Model build_model(const TrainConfig& cfg, const std::vector<PreparedSample>& data) {
  std::vector<std::vector<double>> defs;
  for (const auto& s : data) defs.push_back(s.def);
  const bool has_def = cfg.model == ModelKind::emlp || cfg.eccc.use_def;
  DefNormalizer norm;
  if (cfg.normalize_inputs && has_def && defs.size() > 1) norm = DefNormalizer::fit(defs);
  if (cfg.model == ModelKind::emlp) {
    EmlpModel m(cfg.emlp);
    m.init(mix_seed(cfg.seed, 1));
    m.set_normalizer(norm);
    return m;
  }
  EcccModel m(cfg.eccc);
  m.init(mix_seed(cfg.seed, 1));
  m.set_normalizer(norm);
  std::vector<Illuminant> gts;
  for (const auto& s : data) gts.push_back(s.gt);
  if (cfg.eccc.use_def) {
    const auto maps = init_eccc_biases(defs, gts, cfg.eccc.n_biases, cfg.eccc.hist_size, mix_seed(cfg.seed, 2));
    auto bank = m.params().tensor("bias.bank");
    for (std::size_t i = 0; i < maps.size(); ++i)
      std::copy(maps[i].v.begin(), maps[i].v.end(), bank.begin() + static_cast<std::ptrdiff_t>(i * maps[i].size()));
  } else {
    const Grid full = init_full_bias(gts, cfg.eccc.hist_size);
    std::copy(full.v.begin(), full.v.end(), m.params().tensor("bias.full").begin());
  }
  m.params().round_to_f32();
  return m;
}

void check_samples(const TrainConfig& cfg, const std::vector<PreparedSample>& data) {
  const bool eccc = cfg.model == ModelKind::eccc;
  const int def_len = eccc ? cfg.eccc.def.length() : cfg.emlp.def.length();
  const bool needs_def = !eccc || cfg.eccc.use_def;
  for (const auto& s : data) {
    if (needs_def && static_cast<int>(s.def.size()) != def_len)
      throw Error("sample " + s.scene_id + " has a DEF vector of the wrong length");
    if (eccc && static_cast<int>(s.histograms.size()) != cfg.eccc.filter_count())
      throw Error("sample " + s.scene_id + " lacks the histograms the model needs");
  }
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const std::vector<PreparedSample>& train_set,
                  const std::vector<PreparedSample>* val_set, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.empty()) throw Error("training set is empty");
  check_samples(cfg, train_set);
  if (val_set != nullptr && !val_set->empty()) check_samples(cfg, *val_set);

  TrainResult res{build_model(cfg, train_set), {}, 0, false};
  ParamStore& params = std::visit([](auto& m) -> ParamStore& { return m.params(); }, res.model);
  const std::size_t np = params.size();
  Adam adam(np, AdamConfig{0.9, 0.999, 1e-8, cfg.weight_decay});
  const std::size_t n = train_set.size();
  std::vector<std::size_t> order(n);
  std::vector<double> grad(np);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const int bs = cfg.batch_for_epoch(epoch);
    const double lr = cfg.lr_for_epoch(epoch);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const std::vector<double> snapshot(params.values().begin(), params.values().end());

    double loss_sum = 0.0, smooth_sum = 0.0;
    std::size_t counted = 0, batches = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(bs)) {
      const std::size_t b = std::min<std::size_t>(static_cast<std::size_t>(bs), n - start);
      std::vector<std::vector<double>> g(b, std::vector<double>(np, 0.0));
      std::vector<double> loss(b, 0.0), smooth(b, 0.0);
      std::vector<char> bad(b, 0);
      double smooth_filter = 0.0;
      std::fill(grad.begin(), grad.end(), 0.0);

      if (const auto* em = std::get_if<EmlpModel>(&res.model)) {
        parallel_for(b, [&](std::size_t k) {
          const auto& s = train_set[order[start + k]];
          try {
            loss[k] = em->loss_and_grad(s.def, s.gt, g[k]);
          } catch (const DomainError&) {
            bad[k] = 1;
          }
        });
      } else {
        const auto& model = std::get<EcccModel>(res.model);
        const auto prep = model.prepare();
        parallel_for(b, [&](std::size_t k) {
          const auto& s = train_set[order[start + k]];
          try {
            const EcccLoss l = model.loss_and_grad(prep, EcccInputs{s.histograms, s.def}, s.gt, g[k], false);
            loss[k] = l.angular;
            smooth[k] = l.smooth_bias;
          } catch (const DomainError&) {
            bad[k] = 1;
          }
        });
        smooth_filter = model.filter_smoothness(prep, grad);  // same for every sample of the batch
      }
      if (std::any_of(bad.begin(), bad.end(), [](char c) { return c != 0; })) {
        ++res.skipped_steps;
        continue;
      }
      const double inv = 1.0 / static_cast<double>(b);
      for (std::size_t k = 0; k < b; ++k) {
        for (std::size_t j = 0; j < np; ++j) grad[j] += g[k][j] * inv;
        loss_sum += loss[k];
        smooth_sum += smooth[k];
      }
      smooth_sum += smooth_filter * static_cast<double>(b);
      counted += b;
      ++batches;
      if (!adam.step(params.values(), grad, lr)) {
        ++res.skipped_steps;
        continue;
      }
      params.round_to_f32();
    }

    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    log.batch_size = bs;
    log.train_loss = counted > 0 ? loss_sum / static_cast<double>(counted) : std::numeric_limits<double>::quiet_NaN();
    log.smoothness = counted > 0 ? smooth_sum / static_cast<double>(counted) : 0.0;
    if (!std::isfinite(log.train_loss) || !std::isfinite(log.smoothness)) {
      std::copy(snapshot.begin(), snapshot.end(), params.values().begin());
      res.aborted = true;
      res.log.push_back(log);
      break;
    }
    const bool last = epoch + 1 == cfg.epochs;
    if (val_set != nullptr && !val_set->empty() && cfg.val_every > 0 && ((epoch + 1) % cfg.val_every == 0 || last))
      log.val_loss = mean_error(res.model, *val_set);
    res.log.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  return res;
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "epoch,split,loss_mean_deg,smoothness_terms,lr,batch_size\n";
  char buf[256];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%d,train,%.9g,%.9g,%.9g,%d\n", e.epoch, e.train_loss, e.smoothness, e.lr,
                  e.batch_size);
    out << buf;
    if (!std::isnan(e.val_loss)) {
      std::snprintf(buf, sizeof buf, "%d,val,%.9g,,%.9g,%d\n", e.epoch, e.val_loss, e.lr, e.batch_size);
      out << buf;
    }
  }
  if (!out) throw Error("loss log write failed: " + path.string());
}

}  // namespace duxwb

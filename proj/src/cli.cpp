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

#include "duxwb/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "duxwb/augment.hpp"
#include "duxwb/checkpoint.hpp"
#include "duxwb/dataset.hpp"
#include "duxwb/evaluation.hpp"
#include "duxwb/kernels.hpp"
#include "duxwb/parallel.hpp"
#include "duxwb/synth.hpp"
#include "duxwb/tensor_io.hpp"
#include "duxwb/trainer.hpp"

namespace duxwb {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct DefOptions {
  std::string color_repr = "rgb_chroma";
  std::string mapping = "cm";
  std::string direction = "short_to_long";
  bool no_cov = false;
  bool mask_saturated = false;

  void add(CLI::App* app) {
    app->add_option("--color-repr", color_repr, "Mapping color space: rgb, rg_chroma, rgb_chroma")
        ->capture_default_str();
    app->add_option("--mapping", mapping, "Mapping kind: cm (3x3), tm (affine), hm (homography)")
        ->capture_default_str();
    app->add_option("--direction", direction, "short_to_long or long_to_short")->capture_default_str();
    app->add_flag("--no-cov", no_cov, "Drop the ratio-covariance entries from the feature");
    app->add_flag("--mask-saturated", mask_saturated, "Exclude clipped pixels from the mapping fit");
  }

  DefConfig resolve() const {
    DefConfig c;
    c.color_repr = parse_color_repr(color_repr);
    c.mapping = parse_mapping(mapping);
    c.direction = parse_direction(direction);
    c.include_covariance = !no_cov;
    c.mask_saturated = mask_saturated;
    return c;
  }
};

ordered_json def_json(const DefConfig& c) {
  return {{"color_repr", to_string(c.color_repr)}, {"mapping", to_string(c.mapping)},
          {"direction", to_string(c.direction)},   {"include_covariance", c.include_covariance},
          {"mask_saturated", c.mask_saturated},    {"length", c.length()}};
}

void log_config(std::ostream& err, const std::string& command, ordered_json cfg) {
  cfg["threads"] = thread_count();
  cfg["isa"] = kernels::isa_name(kernels::active().isa);
  ordered_json line = {{"command", command}, {"config", cfg}};
  err << "config " << line.dump() << "\n";
}

std::optional<Split> parse_split_opt(const std::string& s) {
  if (s == "all") return std::nullopt;
  return parse_split(s);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

// gen-data -----------------------------------------------------------------

struct GenOptions {
  std::size_t scenes = 556;
  std::uint64_t seed = 1;
  std::string out;
  std::vector<int> exposures{2, 4, 8};
  bool small = false;
  int width = 0, height = 0;
  bool no_noise = false, no_clip = false;
  int bit_depth = 10;
};

void add_gen(CLI::App& app, GenOptions& o) {
  auto* c = app.add_subcommand("gen-data", "Render a synthetic dual-exposure dataset");
  c->add_option("--scenes", o.scenes, "Number of scenes (>= 10)")->capture_default_str();
  c->add_option("--seed", o.seed, "Dataset seed")->capture_default_str();
  c->add_option("--out", o.out, "Output directory")->required();
  c->add_option("--e", o.exposures, "Exposure factors to render")->delimiter(',')->capture_default_str();
  c->add_flag("--small", o.small, "48 x 32 scenes");
  c->add_option("--width", o.width, "Scene width (overrides --small)");
  c->add_option("--height", o.height, "Scene height (overrides --small)");
  c->add_flag("--no-noise", o.no_noise, "Disable sensor noise");
  c->add_flag("--no-clip", o.no_clip, "Disable clipping at 1");
  c->add_option("--bit-depth", o.bit_depth, "ADC bit depth, 0 disables quantization")->capture_default_str();
}

int cmd_gen(const GenOptions& o, std::ostream& out, std::ostream& err) {
  DatasetOptions d;
  d.n_scenes = o.scenes;
  d.seed = o.seed;
  d.exposures = o.exposures;
  d.synth = o.small ? SynthConfig::small() : SynthConfig{};
  if (o.width > 0) d.synth.width = o.width;
  if (o.height > 0) d.synth.height = o.height;
  d.synth.noise = !o.no_noise;
  d.synth.clip = !o.no_clip;
  d.synth.bit_depth = o.bit_depth;
  log_config(err, "gen-data",
             {{"scenes", d.n_scenes}, {"seed", d.seed}, {"out", o.out}, {"exposures", d.exposures},
              {"width", d.synth.width}, {"height", d.synth.height}, {"noise", d.synth.noise},
              {"clip", d.synth.clip}, {"bit_depth", d.synth.bit_depth}});
  const fs::path manifest = generate_dataset(d, o.out);
  out << manifest.string() << "\n";
  return 0;
}

// extract-def ----------------------------------------------------------------

struct DefCmdOptions {
  std::string data, split = "all", out, long_path, short_path;
  int e = 8;
  DefOptions def;
};

void add_extract(CLI::App& app, DefCmdOptions& o) {
  auto* c = app.add_subcommand("extract-def", "Compute DEF vectors for a dataset or a single pair");
  c->add_option("--data", o.data, "Dataset directory or manifest");
  c->add_option("--split", o.split, "train, val, test or all")->capture_default_str();
  c->add_option("--e", o.e, "Exposure factor")->capture_default_str();
  c->add_option("--out", o.out, "CSV output path (dataset mode)");
  c->add_option("--long", o.long_path, "Long-exposure tensor file (single-pair mode)");
  c->add_option("--short", o.short_path, "Short-exposure tensor file (single-pair mode)");
  o.def.add(c);
}

int cmd_extract(const DefCmdOptions& o, std::ostream& out, std::ostream& err) {
  const DefConfig cfg = o.def.resolve();
  const bool single = !o.long_path.empty() || !o.short_path.empty();
  if (single == !o.data.empty()) throw CLI::ValidationError("extract-def needs either --data or --long/--short");
  if (single && (o.long_path.empty() || o.short_path.empty()))
    throw CLI::ValidationError("--long and --short must be given together");
  if (!single && o.out.empty()) throw CLI::ValidationError("--out is required with --data");
  log_config(err, "extract-def",
             {{"data", o.data}, {"split", o.split}, {"e", o.e}, {"out", o.out}, {"long", o.long_path},
              {"short", o.short_path}, {"def", def_json(cfg)}});
  if (single) {
    DualExposurePair pair;
    pair.long_exposure = read_tensor(o.long_path);
    pair.short_exposure = read_tensor(o.short_path);
    pair.exposure_factor = o.e;
    const DefVector d = compute_def(pair, cfg);
    out << ordered_json{{"def", d.values}, {"degenerate", d.degenerate}}.dump() << "\n";
    return 0;
  }
  const ManifestSource src = ManifestSource::open(o.data, parse_split_opt(o.split));
  src.check_files(o.e);
  std::vector<DefVector> defs(src.size());
  parallel_for(src.size(), [&](std::size_t i) { defs[i] = compute_def(src.load_pair(i, o.e), cfg); });
  std::string csv = "scene_id,e";
  for (int k = 0; k < cfg.length(); ++k) csv += ",def" + std::to_string(k);
  csv += ",gt_r,gt_g,gt_b\n";
  char buf[64];
  std::size_t degenerate = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    degenerate += defs[i].degenerate;
    csv += src.scene_id(i) + "," + std::to_string(o.e);
    const Illuminant gt = src.ground_truth(i).normalized();
    for (double v : defs[i].values) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      csv += buf;
    }
    for (double v : {gt.r, gt.g, gt.b}) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      csv += buf;
    }
    csv += "\n";
  }
  if (degenerate > 0) err << "extract-def: " << degenerate << " degenerate fits\n";
  write_text(o.out, csv);
  return 0;
}

// train ------------------------------------------------------------------------

struct TrainOptions {
  std::string model = "emlp", data, out;
  int e = 8;
  std::uint64_t seed = 1;
  std::optional<int> epochs, batch;
  std::optional<double> lr, weight_decay;
  bool no_augment = false;
  int clusters = 80, copies = 3;
  int n = 20, h = 64;
  std::string variant = "both";
  bool no_def = false;
  DefOptions def;
};

void add_train(CLI::App& app, TrainOptions& o) {
  auto* c = app.add_subcommand("train", "Train an EMLP or ECCC model");
  c->add_option("--model", o.model, "emlp or eccc")->capture_default_str();
  c->add_option("--data", o.data, "Dataset directory or manifest")->required();
  c->add_option("--out", o.out, "Checkpoint path; <out>.bin and <out>.loss.csv are written next to it")->required();
  c->add_option("--e", o.e, "Exposure factor")->capture_default_str();
  c->add_option("--seed", o.seed, "Training seed")->capture_default_str();
  c->add_option("--epochs", o.epochs, "Epochs (default 1000 for emlp, 200 for eccc)");
  c->add_option("--batch", o.batch, "Batch size (default 32; eccc grows it 16 -> 32 -> 64)");
  c->add_option("--lr", o.lr, "Learning rate (default 1e-3 for emlp, 5e-3 cosine-annealed for eccc)");
  c->add_option("--weight-decay", o.weight_decay, "Decoupled weight decay (default 0 for emlp, 1e-5 for eccc)");
  c->add_flag("--no-augment", o.no_augment, "Skip Von Kries augmentation");
  c->add_option("--clusters", o.clusters, "Augmentation clusters")->capture_default_str();
  c->add_option("--copies", o.copies, "Augmented copies per scene")->capture_default_str();
  c->add_option("--n", o.n, "ECCC bias bank size")->capture_default_str();
  c->add_option("--hist-size", o.h, "ECCC histogram size")->capture_default_str();
  c->add_option("--variant", o.variant, "ECCC histograms: both, average, short, long")->capture_default_str();
  c->add_flag("--no-def", o.no_def, "ECCC with a single full-resolution bias and no DEF");
  o.def.add(c);
}

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  const ModelKind kind = parse_model_kind(o.model);
  TrainConfig cfg = TrainConfig::defaults(kind);
  cfg.seed = o.seed;
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.batch) cfg.batch_size = *o.batch;
  if (o.lr) cfg.lr = *o.lr;
  if (o.weight_decay) cfg.weight_decay = *o.weight_decay;
  cfg.emlp.def = o.def.resolve();
  cfg.eccc.def = cfg.emlp.def;
  cfg.eccc.hist_size = o.h;
  cfg.eccc.n_biases = o.n;
  cfg.eccc.input = parse_histogram_input(o.variant);
  cfg.eccc.use_def = !o.no_def;
  cfg.validate();
  if (kind == ModelKind::eccc) cfg.eccc.validate();

  log_config(err, "train",
             {{"model", o.model}, {"data", o.data}, {"out", o.out}, {"e", o.e}, {"seed", cfg.seed},
              {"epochs", cfg.epochs}, {"batch", cfg.batch_size}, {"incremental_batch", cfg.incremental_batch},
              {"lr", cfg.lr}, {"cosine", cfg.cosine}, {"weight_decay", cfg.weight_decay},
              {"augment", !o.no_augment}, {"clusters", o.clusters}, {"copies", o.copies},
              {"eccc", {{"h", cfg.eccc.hist_size}, {"n", cfg.eccc.n_biases}, {"variant", to_string(cfg.eccc.input)},
                        {"use_def", cfg.eccc.use_def}, {"lambda_bias", cfg.eccc.lambda_bias},
                        {"lambda_filter", cfg.eccc.lambda_filter}}},
              {"def", def_json(cfg.emlp.def)}});

  const fs::path out_path(o.out);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());

  const ManifestSource train_src = ManifestSource::open(o.data, Split::train);
  const ManifestSource val_src = ManifestSource::open(o.data, Split::val);
  if (train_src.size() == 0) throw Error("dataset has no training scenes");
  train_src.check_files(o.e);
  val_src.check_files(o.e);

  PrepareOptions prep;
  prep.e = o.e;
  prep.def = cfg.emlp.def;
  if (kind == ModelKind::eccc) prep.eccc = cfg.eccc;
  std::vector<PreparedSample> train_set = prepare_samples(train_src, prep);
  if (!o.no_augment && o.copies > 0) {
    std::vector<std::vector<double>> defs;
    for (const auto& s : train_set) defs.push_back(s.def);
    const AugmentPlan plan = plan_augmentation(defs, o.clusters, o.copies, mix_seed(cfg.seed, 7));
    if (plan.identity_copies > 0) err << "augment: " << plan.identity_copies << " identity copies\n";
    train_set = augment_samples(train_src, train_set, prep, plan);
  }
  const std::vector<PreparedSample> val_set = prepare_samples(val_src, prep);
  err << "train: " << train_set.size() << " samples, " << val_set.size() << " validation\n";

  const int every = std::max(1, cfg.epochs / 20);
  const TrainResult res = train(cfg, train_set, &val_set, [&](const EpochLog& l) {
    if ((l.epoch + 1) % every == 0 || l.epoch + 1 == cfg.epochs) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "epoch %d loss %.4f smooth %.4f val %.4f lr %.3g batch %d\n", l.epoch + 1,
                    l.train_loss, l.smoothness, l.val_loss, l.lr, l.batch_size);
      err << buf;
    }
  });
  if (res.skipped_steps > 0) err << "train: skipped " << res.skipped_steps << " steps\n";
  Meta meta{{"data", o.data}, {"e", std::to_string(o.e)}, {"seed", std::to_string(cfg.seed)},
            {"epochs", std::to_string(cfg.epochs)}, {"train_samples", std::to_string(train_set.size())}};
  save_model(o.out, res.model, meta);
  write_loss_csv(o.out + ".loss.csv", res.log);
  if (res.aborted) {
    err << "train: non-finite loss, saved the last good parameters\n";
    return 1;
  }
  out << o.out << "\n";
  return 0;
}

// eval / ensemble-eval ------------------------------------------------------------

struct EvalOptions {
  std::string ckpt, ckpt_b, baseline, data, split = "test", out;
  std::optional<int> e;
  double p = 6.0;
};

void add_eval(CLI::App& app, EvalOptions& o) {
  auto* c = app.add_subcommand("eval", "Evaluate a checkpoint or a baseline");
  auto* ck = c->add_option("--ckpt", o.ckpt, "Checkpoint manifest");
  auto* bl = c->add_option("--baseline", o.baseline, "gray_world or shades_of_gray");
  ck->excludes(bl);
  c->add_option("--p", o.p, "Minkowski norm for shades_of_gray")->capture_default_str();
  c->add_option("--data", o.data, "Dataset (defaults to the one recorded in the checkpoint)");
  c->add_option("--split", o.split, "train, val, test or all")->capture_default_str();
  c->add_option("--e", o.e, "Exposure factor (defaults to the checkpoint's)");
  c->add_option("--out", o.out, "Directory for report.json and scenes.csv");
}

void add_ensemble(CLI::App& app, EvalOptions& o) {
  auto* c = app.add_subcommand("ensemble-eval", "Evaluate the average of two models' predictions");
  c->add_option("--ckpt-a", o.ckpt, "First checkpoint")->required();
  c->add_option("--ckpt-b", o.ckpt_b, "Second checkpoint")->required();
  c->add_option("--data", o.data, "Dataset (defaults to the one recorded in the first checkpoint)");
  c->add_option("--split", o.split, "train, val, test or all")->capture_default_str();
  c->add_option("--e", o.e, "Exposure factor (defaults to the first checkpoint's)");
  c->add_option("--out", o.out, "Directory for report.json and scenes.csv");
}

std::string meta_or(const Meta& m, const std::string& key, const std::string& fallback) {
  const auto it = m.find(key);
  return it == m.end() ? fallback : it->second;
}

int finish_eval(const Evaluation& ev, const std::string& model, const std::string& split, int e,
                const std::string& out_dir, std::ostream& out) {
  const std::string json = report_json(ev.report, model, split, e);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "report.json", json + "\n");
    write_scene_csv(fs::path(out_dir) / "scenes.csv", ev.scenes);
  }
  out << json << "\n";
  return 0;
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  if (o.ckpt.empty() == o.baseline.empty()) throw CLI::ValidationError("eval needs exactly one of --ckpt or --baseline");
  std::optional<LoadedModel> lm;
  if (!o.ckpt.empty()) lm = load_model(o.ckpt);
  const Meta meta = lm ? lm->meta : Meta{};
  const std::string data = !o.data.empty() ? o.data : meta_or(meta, "data", "");
  if (data.empty()) throw CLI::ValidationError("--data is required");
  const int e = o.e ? *o.e : std::stoi(meta_or(meta, "e", "8"));
  const std::string model = lm ? model_kind(lm->model) : o.baseline;
  if (!lm && o.baseline != "gray_world" && o.baseline != "shades_of_gray")
    throw CLI::ValidationError("unknown baseline: " + o.baseline);
  log_config(err, "eval",
             {{"ckpt", o.ckpt}, {"baseline", o.baseline}, {"p", o.p}, {"data", data}, {"split", o.split}, {"e", e},
              {"out", o.out}});
  const ManifestSource src = ManifestSource::open(data, parse_split_opt(o.split));
  src.check_files(lm ? e : 0);
  Evaluation ev;
  if (lm) {
    ev = evaluate(src, [&](std::size_t i) { return predict(lm->model, src.load_pair(i, e)); });
  } else if (o.baseline == "gray_world") {
    ev = evaluate(src, [&](std::size_t i) { return gray_world(src.load_auto(i)); });
  } else {
    ev = evaluate(src, [&](std::size_t i) { return shades_of_gray(src.load_auto(i), o.p); });
  }
  return finish_eval(ev, model, o.split, e, o.out, out);
}

int cmd_ensemble(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  const LoadedModel a = load_model(o.ckpt), b = load_model(o.ckpt_b);
  const std::string data = !o.data.empty() ? o.data : meta_or(a.meta, "data", "");
  if (data.empty()) throw CLI::ValidationError("--data is required");
  const int e = o.e ? *o.e : std::stoi(meta_or(a.meta, "e", "8"));
  log_config(err, "ensemble-eval",
             {{"ckpt_a", o.ckpt}, {"ckpt_b", o.ckpt_b}, {"data", data}, {"split", o.split}, {"e", e}, {"out", o.out}});
  const ManifestSource src = ManifestSource::open(data, parse_split_opt(o.split));
  src.check_files(e);
  const Evaluation ev = evaluate(src, [&](std::size_t i) {
    const DualExposurePair pair = src.load_pair(i, e);
    return ensemble(predict(a.model, pair), predict(b.model, pair));
  });
  return finish_eval(ev, model_kind(a.model) + "+" + model_kind(b.model), o.split, e, o.out, out);
}

// infer ------------------------------------------------------------------------

struct InferOptions {
  std::string ckpt, long_path, short_path;
};

void add_infer(CLI::App& app, InferOptions& o) {
  auto* c = app.add_subcommand("infer", "Estimate the illuminant of one dual-exposure pair");
  c->add_option("--ckpt", o.ckpt, "Checkpoint manifest")->required();
  c->add_option("--long", o.long_path, "Long-exposure tensor file")->required();
  c->add_option("--short", o.short_path, "Short-exposure tensor file")->required();
}

int cmd_infer(const InferOptions& o, std::ostream& out, std::ostream& err) {
  log_config(err, "infer", {{"ckpt", o.ckpt}, {"long", o.long_path}, {"short", o.short_path}});
  const LoadedModel m = load_model(o.ckpt);
  DualExposurePair pair;
  pair.long_exposure = read_tensor(o.long_path);
  pair.short_exposure = read_tensor(o.short_path);
  const Illuminant l = predict(m.model, pair);
  out << ordered_json{{"model", model_kind(m.model)}, {"illuminant", {l.r, l.g, l.b}}}.dump() << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual-exposure white balance: data generation, training and evaluation", "duxwb"};
  app.require_subcommand(1);
  GenOptions gen;
  DefCmdOptions def;
  TrainOptions tr;
  EvalOptions ev, ens;
  InferOptions inf;
  add_gen(app, gen);
  add_extract(app, def);
  add_train(app, tr);
  add_eval(app, ev);
  add_infer(app, inf);
  add_ensemble(app, ens);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    // Help requests print through CLI11 and succeed; anything else is a usage error.
    return app.exit(ex, out, err) == 0 ? 0 : 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "gen-data") return cmd_gen(gen, out, err);
    if (cmd == "extract-def") return cmd_extract(def, out, err);
    if (cmd == "train") return cmd_train(tr, out, err);
    if (cmd == "eval") return cmd_eval(ev, out, err);
    if (cmd == "infer") return cmd_infer(inf, out, err);
    if (cmd == "ensemble-eval") return cmd_ensemble(ens, out, err);
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
  return 2;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"duxwb"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace duxwb

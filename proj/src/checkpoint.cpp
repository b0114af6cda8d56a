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

#include "duxwb/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "duxwb/tensor_io.hpp"

namespace duxwb {
namespace {

std::string shape_string(const std::vector<int>& shape) {
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s;
}

std::vector<int> parse_shape(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt_double(v[i]);
  return s;
}

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

void write_normalizer(const DefNormalizer& n, Meta& meta) {
  if (n.empty()) return;
  meta["input_norm.scale"] = join_doubles(n.scale);
  meta["input_norm.mean"] = join_doubles(n.mean);
  meta["input_norm.std"] = join_doubles(n.stddev);
  meta["input_norm.clip"] = fmt_double(n.clip);
}


const std::string& need(const Meta& meta, const std::string& key) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw Error("checkpoint is missing meta entry '" + key + "'");
  return it->second;
}

DefNormalizer read_normalizer(const Meta& meta) {
  DefNormalizer n;
  if (meta.find("input_norm.scale") == meta.end()) return n;
  n.scale = split_doubles(need(meta, "input_norm.scale"));
  n.mean = split_doubles(need(meta, "input_norm.mean"));
  n.stddev = split_doubles(need(meta, "input_norm.std"));
  n.clip = std::stod(need(meta, "input_norm.clip"));
  if (n.mean.size() != n.scale.size() || n.stddev.size() != n.scale.size())
    throw Error("checkpoint input normalizer entries have different lengths");
  return n;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::string& kind, const Meta& meta,
                     const ParamStore& params) {
  const std::filesystem::path blob = path.string() + ".bin";
  std::ostringstream man;
  man << "duxwb-checkpoint 1\n";
  man << "kind " << kind << "\n";
  for (const auto& [k, v] : meta) {
    if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos)
      throw Error("checkpoint meta entries may not contain spaces in keys or newlines");
    man << "meta " << k << " " << v << "\n";
  }
  man << "blob " << blob.filename().string() << "\n";
  std::string data;
  data.reserve(4 * params.size());
  for (const auto& t : params.specs()) {
    man << "tensor " << t.name << " f32 " << shape_string(t.shape) << " " << data.size() << "\n";
    for (std::size_t i = 0; i < t.size(); ++i) append_f32_le(data, static_cast<float>(params.values()[t.offset + i]));
  }
  std::ofstream b(blob, std::ios::binary | std::ios::trunc);
  if (!b) throw Error("cannot write " + blob.string());
  b.write(data.data(), static_cast<std::streamsize>(data.size()));
  std::ofstream m(path, std::ios::trunc);
  if (!m) throw Error("cannot write " + path.string());
  m << man.str();
  if (!b || !m) throw Error("checkpoint write failed: " + path.string());
}

CheckpointData load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  CheckpointData ck;
  std::string line, blob_name;
  std::vector<std::size_t> offsets;
  std::getline(in, line);
  if (line != "duxwb-checkpoint 1") throw Error("not a checkpoint manifest: " + path.string());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "kind") {
      ls >> ck.kind;
    } else if (tag == "meta") {
      std::string key, value;
      ls >> key;
      std::getline(ls >> std::ws, value);
      ck.meta[key] = value;
    } else if (tag == "blob") {
      ls >> blob_name;
    } else if (tag == "tensor") {
      TensorSpec t;
      std::string dtype, shape;
      std::size_t offset = 0;
      ls >> t.name >> dtype >> shape >> offset;
      if (!ls || dtype != "f32") throw Error("bad tensor line in checkpoint: " + line);
      t.shape = parse_shape(shape);
      ck.tensors.push_back(t);
      offsets.push_back(offset);
    } else {
      throw Error("unknown checkpoint line: " + line);
    }
  }
  if (blob_name.empty()) throw Error("checkpoint has no blob entry");
  const auto blob_path = path.parent_path() / blob_name;
  std::ifstream b(blob_path, std::ios::binary);
  if (!b) throw Error("cannot open checkpoint blob " + blob_path.string());
  const std::string data((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  for (std::size_t i = 0; i < ck.tensors.size(); ++i) {
    auto& t = ck.tensors[i];
    t.offset = ck.values.size();
    if (offsets[i] + 4 * t.size() > data.size()) throw Error("checkpoint blob is truncated");
    for (std::size_t j = 0; j < t.size(); ++j) ck.values.push_back(read_f32_le(p + offsets[i] + 4 * j));
  }
  return ck;
}

void write_def_meta(const DefConfig& cfg, Meta& meta) {
  meta["def.color_repr"] = std::string(to_string(cfg.color_repr));
  meta["def.mapping"] = std::string(to_string(cfg.mapping));
  meta["def.direction"] = std::string(to_string(cfg.direction));
  meta["def.eps_ratio"] = fmt_double(cfg.eps_ratio);
  meta["def.eps_chroma"] = fmt_double(cfg.eps_chroma);
  meta["def.include_covariance"] = cfg.include_covariance ? "1" : "0";
  meta["def.mask_saturated"] = cfg.mask_saturated ? "1" : "0";
  meta["def.saturation_level"] = fmt_double(cfg.saturation_level);
}

DefConfig read_def_meta(const Meta& meta) {
  DefConfig cfg;
  cfg.color_repr = parse_color_repr(need(meta, "def.color_repr"));
  cfg.mapping = parse_mapping(need(meta, "def.mapping"));
  cfg.direction = parse_direction(need(meta, "def.direction"));
  cfg.eps_ratio = std::stod(need(meta, "def.eps_ratio"));
  cfg.eps_chroma = std::stod(need(meta, "def.eps_chroma"));
  cfg.include_covariance = need(meta, "def.include_covariance") == "1";
  cfg.mask_saturated = need(meta, "def.mask_saturated") == "1";
  cfg.saturation_level = static_cast<float>(std::stod(need(meta, "def.saturation_level")));
  return cfg;
}

std::string model_kind(const Model& m) { return std::holds_alternative<EmlpModel>(m) ? "emlp" : "eccc"; }

const DefConfig& def_config(const Model& m) {
  if (const auto* e = std::get_if<EmlpModel>(&m)) return e->config().def;
  return std::get<EcccModel>(m).config().def;
}

Meta model_meta(const Model& m) {
  Meta meta;
  write_def_meta(def_config(m), meta);
  if (const auto* e = std::get_if<EmlpModel>(&m)) {
    meta["leaky_slope"] = fmt_double(e->config().leaky_slope);
    write_normalizer(e->normalizer(), meta);
  } else {
    const auto& c = std::get<EcccModel>(m).config();
    meta["leaky_slope"] = fmt_double(c.leaky_slope);
    meta["hist_size"] = std::to_string(c.hist_size);
    meta["n_biases"] = std::to_string(c.n_biases);
    meta["variant"] = std::string(to_string(c.input));
    meta["use_def"] = c.use_def ? "1" : "0";
    meta["lambda_bias"] = fmt_double(c.lambda_bias);
    meta["lambda_filter"] = fmt_double(c.lambda_filter);
    write_normalizer(std::get<EcccModel>(m).normalizer(), meta);
  }
  return meta;
}

Illuminant predict(const Model& m, const DualExposurePair& pair) {
  if (const auto* e = std::get_if<EmlpModel>(&m)) return e->predict(compute_def(pair, e->config().def).values);
  return std::get<EcccModel>(m).predict(pair);
}

void save_model(const std::filesystem::path& path, const Model& m, const Meta& extra) {
  Meta meta = extra;
  for (const auto& [k, v] : model_meta(m)) meta[k] = v;
  std::visit([&](const auto& model) { save_checkpoint(path, model_kind(m), meta, model.params()); }, m);
}

namespace {

template <class M>
void fill_params(M& model, const CheckpointData& ck) {
  ParamStore& ps = model.params();
  if (ps.specs().size() != ck.tensors.size()) throw Error("checkpoint tensors do not match the model");
  for (const auto& t : ck.tensors) {
    if (!ps.has(t.name)) throw Error("unexpected tensor in checkpoint: " + t.name);
    if (ps.spec(t.name).shape != t.shape) throw Error("tensor shape mismatch for " + t.name);
    auto dst = ps.tensor(t.name);
    std::copy(ck.values.begin() + static_cast<std::ptrdiff_t>(t.offset),
              ck.values.begin() + static_cast<std::ptrdiff_t>(t.offset + t.size()), dst.begin());
  }
}

}  // namespace

LoadedModel load_model(const std::filesystem::path& path) {
  CheckpointData ck = load_checkpoint(path);
  if (ck.kind == "emlp") {
    EmlpConfig cfg;
    cfg.def = read_def_meta(ck.meta);
    cfg.leaky_slope = std::stod(need(ck.meta, "leaky_slope"));
    EmlpModel m(cfg);
    fill_params(m, ck);
    m.set_normalizer(read_normalizer(ck.meta));
    return {Model(std::move(m)), std::move(ck.meta)};
  }
  if (ck.kind == "eccc") {
    EcccConfig cfg;
    cfg.def = read_def_meta(ck.meta);
    cfg.leaky_slope = std::stod(need(ck.meta, "leaky_slope"));
    cfg.hist_size = std::stoi(need(ck.meta, "hist_size"));
    cfg.n_biases = std::stoi(need(ck.meta, "n_biases"));
    cfg.input = parse_histogram_input(need(ck.meta, "variant"));
    cfg.use_def = need(ck.meta, "use_def") == "1";
    cfg.lambda_bias = std::stod(need(ck.meta, "lambda_bias"));
    cfg.lambda_filter = std::stod(need(ck.meta, "lambda_filter"));
    EcccModel m(cfg);
    fill_params(m, ck);
    m.set_normalizer(read_normalizer(ck.meta));
    return {Model(std::move(m)), std::move(ck.meta)};
  }
  throw Error("unknown model kind in checkpoint: " + ck.kind);
}

}  // namespace duxwb

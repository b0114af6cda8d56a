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

#include "duxwb/params.hpp"

#include <functional>
#include <numeric>

#include "duxwb/core.hpp"

namespace duxwb {

std::size_t TensorSpec::size() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
}

std::size_t ParamStore::add(std::string name, std::vector<int> shape) {
  if (has(name)) throw Error("duplicate tensor name: " + name);
  TensorSpec spec{std::move(name), std::move(shape), values_.size()};
  values_.resize(values_.size() + spec.size(), 0.0);
  specs_.push_back(std::move(spec));
  return specs_.back().offset;
}

const TensorSpec& ParamStore::spec(std::string_view name) const {
  for (const auto& s : specs_)
    if (s.name == name) return s;
  throw Error("unknown tensor: " + std::string(name));
}

bool ParamStore::has(std::string_view name) const {
  for (const auto& s : specs_)
    if (s.name == name) return true;
  return false;
}

std::span<double> ParamStore::tensor(std::string_view name) {
  const auto& s = spec(name);
  return {values_.data() + s.offset, s.size()};
}

std::span<const double> ParamStore::tensor(std::string_view name) const {
  const auto& s = spec(name);
  return {values_.data() + s.offset, s.size()};
}

void ParamStore::round_to_f32() {
  for (double& v : values_) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace duxwb

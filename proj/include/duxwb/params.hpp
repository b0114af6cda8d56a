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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace duxwb {

struct TensorSpec {
  std::string name;
  std::vector<int> shape;
  std::size_t offset = 0;

  std::size_t size() const;
};

/// Flat parameter vector partitioned into named tensors. Gradients and
/// optimizer moments use the same layout, so they are plain vectors of
/// size().
class ParamStore {
 public:
  /// Appends a zero-initialized tensor; returns its offset.
  std::size_t add(std::string name, std::vector<int> shape);

  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<TensorSpec>& specs() const { return specs_; }

  const TensorSpec& spec(std::string_view name) const;
  bool has(std::string_view name) const;
  std::span<double> tensor(std::string_view name);
  std::span<const double> tensor(std::string_view name) const;

  /// Rounds every value to the nearest float32.
  void round_to_f32();

 private:
  std::vector<TensorSpec> specs_;
  std::vector<double> values_;
};

}  // namespace duxwb

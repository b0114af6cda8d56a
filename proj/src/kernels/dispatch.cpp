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

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "duxwb/kernels.hpp"

namespace duxwb::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  const auto isas = supported_isas();
  if (const char* env = std::getenv("DUXWB_ISA")) {
    const std::string want(env);
    for (Isa isa : isas)
      if (isa_name(isa) == want) return table(isa);
  }
  return table(isas.back());
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

std::vector<Isa> supported_isas() {
  std::vector<Isa> out{Isa::scalar};
  if (detail::avx2_table() != nullptr && cpu_has_avx2()) out.push_back(Isa::avx2);
  if (detail::neon_table() != nullptr) out.push_back(Isa::neon);
  return out;
}

const KernelTable& table(Isa isa) {
  switch (isa) {
    case Isa::scalar: return scalar_table();
    case Isa::avx2:
      if (const auto* t = detail::avx2_table(); t != nullptr && cpu_has_avx2()) return *t;
      break;
    case Isa::neon:
      if (const auto* t = detail::neon_table()) return *t;
      break;
  }
  throw std::invalid_argument("kernel variant not available: " + std::string(isa_name(isa)));
}

const KernelTable& active() {
  static const KernelTable& t = select();
  return t;
}

}  // namespace duxwb::kernels

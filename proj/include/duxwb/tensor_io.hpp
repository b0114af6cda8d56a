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

// Raw tensor files: "DXT1", an ASCII header "h w 3 f32 le\n", then planar
// little-endian float32 R, G, B.

#pragma once

#include <filesystem>

#include "duxwb/core.hpp"

namespace duxwb {

void write_tensor(const std::filesystem::path& path, const RawImage& img);
RawImage read_tensor(const std::filesystem::path& path);

/// Little-endian float32 encoding helpers shared with checkpoints.
void append_f32_le(std::string& out, float v);
float read_f32_le(const unsigned char* p);

}  // namespace duxwb

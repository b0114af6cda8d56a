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

#include "duxwb/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace duxwb {

void append_f32_le(std::string& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

float read_f32_le(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

void write_tensor(const std::filesystem::path& path, const RawImage& img) {
  if (img.data.size() != 3 * img.pixels()) throw Error("write_tensor: buffer does not match dimensions");
  std::string buf = "DXT1" + std::to_string(img.height) + " " + std::to_string(img.width) + " 3 f32 le\n";
  buf.reserve(buf.size() + 4 * img.data.size());
  for (float v : img.data) append_f32_le(buf, v);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("write failed: " + path.string());
}

RawImage read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open tensor file: " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 4 || buf.compare(0, 4, "DXT1") != 0) throw Error("not a DXT1 tensor file: " + path.string());
  const auto eol = buf.find('\n', 4);
  if (eol == std::string::npos) throw Error("truncated tensor header: " + path.string());
  std::istringstream header(buf.substr(4, eol - 4));
  long h = 0, w = 0, c = 0;
  std::string dtype, order, extra;
  header >> h >> w >> c >> dtype >> order;
  if (!header || (header >> extra) || c != 3 || dtype != "f32" || order != "le" || h <= 0 || w <= 0)
    throw Error("unsupported tensor header in " + path.string());
  RawImage img(static_cast<int>(w), static_cast<int>(h));
  const std::size_t need = 4 * img.data.size();
  if (buf.size() - eol - 1 != need) throw Error("tensor payload size mismatch: " + path.string());
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data()) + eol + 1;
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = read_f32_le(p + 4 * i);
  return img;
}

}  // namespace duxwb

// Copyright 2026 The hcsmap Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HCSMAP_COMMON_IO_UTIL_H_
#define HCSMAP_COMMON_IO_UTIL_H_

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hcs {

std::string ReadFileBytes(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written artifact.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view bytes);

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view bytes);
std::string Sha256File(const std::filesystem::path& path);

// Little-endian byte packing. The host is assumed little-endian; a static
// assertion in io_util.cc enforces that.
inline void AppendU32(std::string& out, uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

inline uint32_t ReadU32(std::string_view bytes, size_t offset) {
  uint32_t v;
  std::memcpy(&v, bytes.data() + offset, 4);
  return v;
}

inline void AppendF32(std::string& out, std::span<const float> values) {
  out.append(reinterpret_cast<const char*>(values.data()),
             values.size() * sizeof(float));
}

// Packs booleans LSB-first, eight per byte.
std::string PackBits(std::span<const uint8_t> flags);
std::vector<uint8_t> UnpackBits(std::string_view bytes, size_t count);

}  // namespace hcs

#endif  // HCSMAP_COMMON_IO_UTIL_H_

/*
   Copyright 2026 The vortlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "vortlab/fields.hpp"

namespace vortlab {

// Binary field snapshot (.vlf), little-endian:
//
//   offset  size  content
//   0       8     magic "VLFIELD1"
//   8       8     f64 box size L
//   16      4     u32 resolution n
//   20      8     f64 time
//   28      4     u32 name length k
//   32      k     name, UTF-8, not terminated
//   32+k    8n^2  f64 values, row-major, x2 index slow
//
// A JSON sidecar "<file>.json" carries provenance (config hash, seed, ...).
struct FieldSnapshot {
  ScalarField field;
  double time = 0.0;
  std::string name;
};

void write_field(const std::filesystem::path& path, const ScalarField& field, double time,
                 std::string_view name, const nlohmann::json& provenance);

FieldSnapshot read_field(const std::filesystem::path& path);

nlohmann::json read_sidecar(const std::filesystem::path& path);

// Writes to a temporary sibling, then renames over `path`.
void write_atomically(const std::filesystem::path& path, std::string_view bytes);

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace vortlab

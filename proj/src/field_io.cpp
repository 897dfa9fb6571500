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

#include "vortlab/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

namespace vortlab {

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian; add byte swapping for this target");

namespace {

constexpr char kMagic[8] = {'V', 'L', 'F', 'I', 'E', 'L', 'D', '1'};

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw std::runtime_error("snapshot: truncated file");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

void write_atomically(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_field(const std::filesystem::path& path, const ScalarField& field, double time,
                 std::string_view name, const nlohmann::json& provenance) {
  const Grid2D& g = field.grid();
  std::string buf;
  buf.reserve(32 + name.size() + 8 * g.size());
  buf.append(kMagic, sizeof(kMagic));
  put<double>(buf, g.box_size());
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(g.n()));
  put<double>(buf, time);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(name.size()));
  buf.append(name);
  const auto values = field.values();
  buf.append(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(double));
  write_atomically(path, buf);

  nlohmann::json sidecar = provenance;
  sidecar["name"] = std::string(name);
  sidecar["time"] = time;
  sidecar["box_size"] = g.box_size();
  sidecar["n"] = g.n();
  sidecar["content_hash"] = hex64(fnv1a(buf));
  auto side = path;
  side += ".json";
  write_atomically(side, sidecar.dump(2));
}

FieldSnapshot read_field(const std::filesystem::path& path) {
  const std::string in = slurp(path);
  if (in.size() < sizeof(kMagic) || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("snapshot: bad magic in " + path.string());
  }
  std::size_t pos = sizeof(kMagic);
  const double box = take<double>(in, pos);
  const auto n = take<std::uint32_t>(in, pos);
  const double time = take<double>(in, pos);
  const auto name_len = take<std::uint32_t>(in, pos);
  if (pos + name_len > in.size()) throw std::runtime_error("snapshot: truncated name");
  std::string name = in.substr(pos, name_len);
  pos += name_len;
  Grid2D grid(box, static_cast<int>(n));
  if (in.size() - pos != grid.size() * sizeof(double)) {
    throw std::runtime_error("snapshot: payload size does not match header");
  }
  std::vector<double> values(grid.size());
  std::memcpy(values.data(), in.data() + pos, grid.size() * sizeof(double));
  return FieldSnapshot{ScalarField(grid, std::move(values)), time, std::move(name)};
}

nlohmann::json read_sidecar(const std::filesystem::path& path) {
  auto side = path;
  side += ".json";
  return nlohmann::json::parse(slurp(side));
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << value;
  return out.str();
}

}  // namespace vortlab

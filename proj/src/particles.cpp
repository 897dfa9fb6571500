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

#include "vortlab/particles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "vortlab/field_io.hpp"
#include "vortlab/point_velocity.hpp"
#include "vortlab/rng.hpp"

namespace vortlab {

Point ParticleEnsemble::centroid() const {
  if (positions.empty()) return {0.0, 0.0};
  double x = 0.0, y = 0.0;
  for (const auto& p : positions) {
    x += p[0];
    y += p[1];
  }
  return {x / size(), y / size()};
}

double ParticleEnsemble::spread() const {
  if (positions.size() < 2) return 0.0;
  const Point c = centroid();
  double s = 0.0;
  for (const auto& p : positions) s += (p[0] - c[0]) * (p[0] - c[0]) + (p[1] - c[1]) * (p[1] - c[1]);
  return std::sqrt(0.5 * s / (size() - 1));
}

double ParticleEnsemble::radius() const {
  const Point c = centroid();
  double r2 = 0.0;
  for (const auto& p : positions) {
    r2 = std::max(r2, (p[0] - c[0]) * (p[0] - c[0]) + (p[1] - c[1]) * (p[1] - c[1]));
  }
  return std::sqrt(r2);
}

void ParticleEnsemble::validate() const {
  if (positions.empty()) throw std::invalid_argument("ensemble: no particles");
  for (const auto& p : positions) {
    if (!std::isfinite(p[0]) || !std::isfinite(p[1])) {
      throw std::domain_error("ensemble: non-finite particle position");
    }
  }
}

ParticleEnsemble sample_initial(const ScalarField& density, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("sample_initial: need at least one particle");
  const double peak = density.max_abs();
  if (density.min() < -1e-8 * peak) throw std::invalid_argument("sample_initial: law is not nonnegative");
  const double mass = integral(density);
  if (std::abs(mass - 1.0) > 1e-8) {
    std::ostringstream os;
    os << "sample_initial: law has mass " << mass << ", expected 1";
    throw std::invalid_argument(os.str());
  }
  const Grid2D& g = density.grid();
  std::vector<double> cdf(g.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    acc += std::max(density[k], 0.0);
    cdf[k] = acc;
  }
  const ParticleStreams streams(seed);
  ParticleEnsemble ens;
  ens.seed = seed;
  ens.positions.resize(count);
  const double dx = g.dx();
  for (std::size_t p = 0; p < count; ++p) {
    const auto pick = streams.uniforms(p, 0, StreamPurpose::kInitialSample);
    const auto jitter = streams.uniforms(p, 1, StreamPurpose::kInitialSample);
    const double target = pick[0] * acc;
    auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    if (it == cdf.end()) --it;
    const auto cell = static_cast<std::size_t>(it - cdf.begin());
    const int i = static_cast<int>(cell % g.n());
    const int j = static_cast<int>(cell / g.n());
    ens.positions[p] = {g.coord(i) + (jitter[0] - 0.5) * dx, g.coord(j) + (jitter[1] - 0.5) * dx};
  }
  return ens;
}

ParticleEnsemble sample_initial(std::span<const Atom> atoms, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("sample_initial: need at least one particle");
  if (atoms.empty()) throw std::invalid_argument("sample_initial: no atoms");
  std::vector<double> cdf;
  double acc = 0.0;
  for (const auto& a : atoms) {
    if (!(a.weight >= 0.0)) throw std::invalid_argument("sample_initial: negative atom weight");
    acc += a.weight;
    cdf.push_back(acc);
  }
  if (std::abs(acc - 1.0) > 1e-12) throw std::invalid_argument("sample_initial: atom weights must sum to 1");
  const ParticleStreams streams(seed);
  ParticleEnsemble ens;
  ens.seed = seed;
  ens.positions.resize(count);
  for (std::size_t p = 0; p < count; ++p) {
    std::size_t k = 0;
    if (atoms.size() > 1) {
      const double target = streams.uniforms(p, 0, StreamPurpose::kInitialSample)[0] * acc;
      k = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), target) - cdf.begin());
      k = std::min(k, atoms.size() - 1);
    }
    ens.positions[p] = atoms[k].position;
  }
  return ens;
}

ScalarField marginal_density(const ParticleEnsemble& ens, const Grid2D& grid, double bandwidth) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("marginal_density: bandwidth must be positive");
  ens.validate();
  return kde_density(ens.positions, ens.weights(), grid, bandwidth);
}

double silverman_bandwidth(double sigma, std::size_t count) {
  return 1.06 * sigma * std::pow(static_cast<double>(count), -1.0 / 6.0);
}

double default_blob_length(double diameter, std::size_t count) {
  return 2.0 * diameter / std::sqrt(static_cast<double>(count));
}

// --- snapshot files -------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'V', 'L', 'P', 'A', 'R', 'T', '0', '1'};

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw std::runtime_error("particles: truncated file");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

void write_particles(const std::filesystem::path& path, const ParticleEnsemble& ens,
                     const std::string& config_hash) {
  static_assert(std::endian::native == std::endian::little);
  std::string buf;
  buf.reserve(40 + config_hash.size() + 16 * ens.size());
  buf.append(kMagic, sizeof(kMagic));
  put<std::uint64_t>(buf, ens.size());
  put<double>(buf, ens.time);
  put<std::uint64_t>(buf, ens.seed);
  put<std::uint32_t>(buf, ens.step);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(config_hash.size()));
  buf.append(config_hash);
  buf.append(reinterpret_cast<const char*>(ens.positions.data()), ens.size() * sizeof(Point));
  write_atomically(path, buf);
}

ParticleFile read_particles(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path.string());
  const std::string in(std::istreambuf_iterator<char>(file), {});
  if (in.size() < sizeof(kMagic) || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("particles: bad magic in " + path.string());
  }
  std::size_t pos = sizeof(kMagic);
  ParticleFile out;
  const auto count = take<std::uint64_t>(in, pos);
  out.ensemble.time = take<double>(in, pos);
  out.ensemble.seed = take<std::uint64_t>(in, pos);
  out.ensemble.step = take<std::uint32_t>(in, pos);
  const auto len = take<std::uint32_t>(in, pos);
  if (pos + len > in.size()) throw std::runtime_error("particles: truncated header");
  out.config_hash = in.substr(pos, len);
  pos += len;
  if (in.size() - pos != count * sizeof(Point)) {
    throw std::runtime_error("particles: payload size does not match header");
  }
  out.ensemble.positions.resize(count);
  std::memcpy(out.ensemble.positions.data(), in.data() + pos, count * sizeof(Point));
  return out;
}

}  // namespace vortlab

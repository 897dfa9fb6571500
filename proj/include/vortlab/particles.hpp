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
#include <span>
#include <string>
#include <vector>

#include "vortlab/fields.hpp"
#include "vortlab/profiles.hpp"
#include "vortlab/solver.hpp"

namespace vortlab {

// N particles of weight 1/N. The RNG state is (seed, step): draws for step k
// of particle p depend on nothing else.
struct ParticleEnsemble {
  std::vector<Point> positions;
  std::uint64_t seed = 0;
  double time = 0.0;
  std::uint32_t step = 0;

  std::size_t size() const { return positions.size(); }
  double weight() const { return 1.0 / static_cast<double>(positions.size()); }
  std::vector<double> weights() const { return std::vector<double>(size(), weight()); }
  Point centroid() const;
  // Per-coordinate sample standard deviation, both axes pooled.
  double spread() const;
  // Largest distance from the centroid.
  double radius() const;
  void validate() const;
};

// Inverse-CDF over grid cells (nodes at cell centres) plus uniform jitter
// within the cell. Undershoot down to -1e-8 max|u| is clipped for sampling.
ParticleEnsemble sample_initial(const ScalarField& density, std::size_t count, std::uint64_t seed);
// Categorical draw over atoms; particles sit exactly on their atom.
ParticleEnsemble sample_initial(std::span<const Atom> atoms, std::size_t count, std::uint64_t seed);

// Gaussian KDE binned to the grid.
ScalarField marginal_density(const ParticleEnsemble& ens, const Grid2D& grid, double bandwidth);

// 1.06 sigma N^{-1/6}.
double silverman_bandwidth(double sigma, std::size_t count);
// 2 diam N^{-1/2}.
double default_blob_length(double diameter, std::size_t count);

// Particle snapshot (.vlp), little-endian:
//
//   offset  size  content
//   0       8     magic "VLPART01"
//   8       8     u64 N
//   16      8     f64 time
//   24      8     u64 seed
//   32      4     u32 step index
//   36      4     u32 config hash length k
//   40      k     config hash, ASCII
//   40+k    16N   f64 (x, y) pairs
void write_particles(const std::filesystem::path& path, const ParticleEnsemble& ens,
                     const std::string& config_hash);

struct ParticleFile {
  ParticleEnsemble ensemble;
  std::string config_hash;
};
ParticleFile read_particles(const std::filesystem::path& path);

}  // namespace vortlab

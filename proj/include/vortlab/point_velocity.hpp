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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vortlab/fields.hpp"
#include "vortlab/profiles.hpp"
#include "vortlab/treecode.hpp"

namespace vortlab {

enum class DriftMethod { kDirect, kTreecode, kGrid };

DriftMethod parse_drift_method(const std::string& name);
std::string to_string(DriftMethod method);

struct PointVelocityOptions {
  DriftMethod method = DriftMethod::kTreecode;
  double delta = 0.0;  // blob length, direct and treecode
  TreecodeParams tree;
  std::optional<Grid2D> grid;  // grid method
  double bandwidth = 0.0;      // grid method KDE bandwidth
};

// Sum over sources of weight * k_delta(target - source) (direct, treecode),
// or KDE density -> biot_savart_field -> bilinear interpolation (grid).
std::vector<Point> velocity_at_points(std::span<const Point> sources,
                                      std::span<const double> weights,
                                      std::span<const Point> targets,
                                      const PointVelocityOptions& options);

// Same, with targets = sources and each source excluded from its own sum.
std::vector<Point> velocity_at_sources(std::span<const Point> sources,
                                       std::span<const double> weights,
                                       const PointVelocityOptions& options);

// Gaussian kernel density estimate on the grid. Each point deposits a
// separable Gaussian stencil normalized to its weight (periodic wrap), so the
// result is nonnegative and carries the total weight exactly.
ScalarField kde_density(std::span<const Point> points, std::span<const double> weights,
                        const Grid2D& grid, double bandwidth);

// Bilinear interpolation of a grid velocity; points outside the node lattice
// see the far field of a point vortex of circulation `mass` at `centroid`.
std::vector<Point> interpolate_velocity(const VelocityField& v, std::span<const Point> points,
                                        double mass = 1.0, Point centroid = {0.0, 0.0});

struct KernelBenchRow {
  std::size_t n = 0;
  std::string method;
  double wall_ms = 0.0;
  double max_rel_err_vs_direct = 0.0;  // max |v - v_direct| / max |v_direct|
  std::size_t timed_targets = 0;
};

// N sources from a unit Gaussian, delta = 8 N^{-1/2}, all N targets.
// Direct sums above `direct_targets` targets are timed on an evenly strided
// subsample and scaled by N / targets; errors are measured on that subsample.
std::vector<KernelBenchRow> kernel_bench(std::size_t n, std::uint64_t seed, const TreecodeParams& tree = {},
                                         std::size_t direct_targets = 20000);

}  // namespace vortlab

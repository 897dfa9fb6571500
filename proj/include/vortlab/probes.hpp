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
#include <vector>

#include "json.hpp"
#include "vortlab/particles.hpp"
#include "vortlab/solver.hpp"

namespace vortlab {

struct MarkovProbeConfig {
  double nu = 0.05;
  double dt = 0.01;
  double r = 0.5;  // conditioning time (runs start at 0)
  double t = 1.0;
  std::size_t particles = 100000;
  std::uint64_t seed = 0;
  double bandwidth = 0.0;           // KDE bandwidth at r; 0 selects 1.06 sigma N^{-1/6}
  double bin_radius_factor = 3.0;   // bin radius in bandwidths
  std::vector<Point> bin_centers;   // empty: four points on the ring of maximal speed
  int coarse_bins = 32;
  std::size_t min_population = 500;

  nlohmann::json to_json() const;
};

struct MarkovBin {
  Point center{};
  std::size_t population = 0;
  double distance = 0.0;  // binned L1, conditional law vs linearized reference
  bool skipped = false;
};

struct MarkovRun {
  double bandwidth = 0.0;
  double bin_radius = 0.0;
  std::vector<MarkovBin> bins;
};

struct MarkovProbeReport {
  MarkovRun drift;        // particles driven by K(u(t)) of the reference
  MarkovRun calibration;  // drift-free run with matched N, dt, seed and bins
  double factor = 3.0;
  bool pass = false;      // drift distance <= factor * floor at every populated bin

  nlohmann::json to_json() const;
};

// Conditional law of X(t) given |X(r) - y| <= bin radius, against the
// linearized equation started at r from u(r) restricted to the bin. The
// reference trajectory supplies u(t) on its own grid, which is also the grid
// of the linearized reference solves.
MarkovProbeReport markov_probe(const ScalarField& u0, const Trajectory& reference,
                               const MarkovProbeConfig& cfg);

// One leg of the probe; drift_free selects the calibration.
MarkovRun markov_run(const ScalarField& u0, const Trajectory& reference, const MarkovProbeConfig& cfg,
                     bool drift_free, const std::vector<Point>& centers, double bin_radius);

// Four points on the ring where |K(u)| peaks, around the centroid of u.
std::vector<Point> max_speed_ring(const ScalarField& u);

}  // namespace vortlab

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
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vortlab/particles.hpp"
#include "vortlab/point_velocity.hpp"
#include "vortlab/solver.hpp"

namespace vortlab {

struct SdeConfig {
  double nu = 0.05;  // 0 switches the noise off
  double dt = 0.01;
  // Under kCfl, simulate caps each step at the admissible one; under kFixed a
  // violation propagates from em_step.
  DtPolicy::Kind dt_policy = DtPolicy::Kind::kCfl;
  double t_end = 1.0;
  DriftMethod method = DriftMethod::kTreecode;
  double delta = 0.0;      // blob length; 0 selects the default
  TreecodeParams tree;
  double box_size = 20.0;  // KDE / grid-drift lattice
  int resolution = 256;
  double bandwidth = 0.0;  // KDE bandwidth; 0 selects the default
  std::vector<double> snapshot_times;
  std::uint64_t seed = 0;
  std::size_t particles = 4096;

  Grid2D grid() const { return Grid2D(box_size, resolution); }
  void validate() const;
  nlohmann::json to_json() const;
  static SdeConfig from_json(const nlohmann::json& j);
  std::string hash() const;

  // Fills delta and bandwidth from the spread expected at t_end,
  // sigma_T^2 = spread(initial)^2 + 2 nu t_end:
  //   delta = 2 (4 sigma_T) N^{-1/2},  bandwidth = 1.06 sigma_T N^{-1/6}.
  SdeConfig resolved(const ParticleEnsemble& initial) const;
  PointVelocityOptions drift_options() const;
};

// Euler-Maruyama update with a precomputed drift:
//   X <- X + drift dt + sqrt(2 nu dt) G,   G from stream (seed, particle, step).
ParticleEnsemble advance(const ParticleEnsemble& ens, std::span<const Point> drift, double dt,
                         double nu);

// Self-consistent step: drift = velocity_at_sources of the ensemble's own
// law. Throws CflViolation when dt exceeds delta / max speed (direct,
// treecode) or dx / max speed (grid).
ParticleEnsemble em_step(const ParticleEnsemble& ens, const SdeConfig& cfg);

struct ParticleDiagnostics {
  double time = 0.0;
  Point centroid{};
  double spread = 0.0;
  double max_speed = 0.0;
  double marginal_l43 = 0.0;  // |KDE marginal|_{4/3}, the uniqueness-class proxy
  double discrepancy = std::numeric_limits<double>::quiet_NaN();  // L1(KDE, reference)
};

struct ParticleSnapshot {
  double time;
  ParticleEnsemble ensemble;
  ScalarField marginal;
};

struct ParticleTrajectory {
  std::vector<ParticleSnapshot> snapshots;
  std::vector<ParticleDiagnostics> diagnostics;  // one per snapshot
  std::string config_hash;
  nlohmann::json metadata = nlohmann::json::object();
};

// Reference density at time t on the given grid; nullopt where it has none
// (an atomic initial law, say).
using ReferenceFn = std::function<std::optional<ScalarField>(double t, const Grid2D& grid)>;

ParticleTrajectory simulate(const ParticleEnsemble& initial, const SdeConfig& cfg,
                            const ReferenceFn& reference = {});
ParticleTrajectory simulate(const ScalarField& u0, const SdeConfig& cfg,
                            const ReferenceFn& reference = {});
ParticleTrajectory simulate(std::span<const Atom> atoms, const SdeConfig& cfg,
                            const ReferenceFn& reference = {});

// y = K(law): KDE then biot_savart_field.
VelocityField velocity_representation(const ParticleEnsemble& ens, const Grid2D& grid,
                                      double bandwidth);
VelocityField velocity_representation(const ScalarField& density);

// K(u(t)) of a reference trajectory, computed on `grid` and interpolated
// bilinearly at particle positions.
class TrajectoryDrift {
 public:
  TrajectoryDrift(const Trajectory& reference, Grid2D grid);
  std::vector<Point> operator()(double t, std::span<const Point> points) const;
  const Grid2D& grid() const { return grid_; }

 private:
  const Trajectory* reference_;
  Grid2D grid_;
};

using ExternalDrift = std::function<std::vector<Point>(double t, std::span<const Point>)>;

// Ordinary SDE dX = b(t, X) dt + sqrt(2 nu) dW; returns the ensemble at each
// requested time (sorted, within [ens.time, ...]).
std::vector<ParticleEnsemble> evolve_in_drift(const ParticleEnsemble& ens, double nu, double dt,
                                              const ExternalDrift& drift,
                                              std::span<const double> times);

struct PathwiseProbeConfig {
  SdeConfig sde;                     // nu, dt, t_end, seed, particles
  std::vector<int> resolutions;      // drift grids, each double the previous
  std::uint64_t seed_a = 0;
  std::uint64_t seed_b = 0;
  double initial_shift = 1e-3;       // for the perturbed-start companion run
};

struct PathwiseProbeReport {
  std::vector<double> times;
  // gaps[k][s]: mean |X - X~| between resolutions k and k+1 at times[s].
  std::vector<std::vector<double>> gaps;
  std::vector<double> sup_gaps;          // per resolution pair
  std::vector<double> refinement_ratios; // sup_gaps[k] / sup_gaps[k+1]
  double shifted_gap = 0.0;              // perturbed start, same noise, finest drift, at t_end
  double lipschitz = 0.0;                // sup_t |grad K(u)|_inf
  double gronwall_bound = 0.0;           // shift * exp(lipschitz * t_end)
  nlohmann::json to_json() const;
};

// Same-noise particle systems driven by K(u(t)) at each drift resolution.
PathwiseProbeReport pathwise_uniqueness_probe(const ScalarField& u0, const PathwiseProbeConfig& cfg,
                                              const Trajectory& reference);

}  // namespace vortlab

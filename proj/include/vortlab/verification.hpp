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

#include "json.hpp"
#include "vortlab/particles.hpp"
#include "vortlab/sde.hpp"
#include "vortlab/solver.hpp"
#include "vortlab/test_function.hpp"

namespace vortlab {

// Serialized check outcome: {check, inputs_hash, values, thresholds, pass}.
struct CheckReport {
  std::string check;
  std::string inputs_hash;
  nlohmann::json values = nlohmann::json::object();
  nlohmann::json thresholds = nlohmann::json::object();
  bool pass = false;

  nlohmann::json to_json() const;
};

// --- weak-form residuals -----------------------------------------------------

struct MemberResidual {
  std::string label;
  double residual = 0.0;
  double normalized = 0.0;   // residual / (|phi|_{W^{2,inf}} |u|_{L1 L1})
  int quadrature_points = 0; // snapshots inside the temporal support
  double noise_floor = 0.0;  // |residual - residual on every other snapshot|, normalized
};

struct ResidualReport {
  std::vector<MemberResidual> members;
  double max_normalized = 0.0;
  double max_noise_floor = 0.0;

  nlohmann::json to_json() const;
};

// int int u (phi_t + nu Delta phi + K(u).grad phi) dx dt + int phi(0) u0 dx,
// midpoint rule in space, trapezoid over the snapshot times.
ResidualReport weak_residual(const Trajectory& traj, const ScalarField& u0,
                             std::span<const TestFunction> bank, double nu);

// Same with the drift K(u) taken from u_traj at the snapshot times of v_traj.
ResidualReport linearized_weak_residual(const Trajectory& v_traj, const Trajectory& u_traj,
                                        std::span<const TestFunction> bank, double nu);

// --- uniqueness diagnostic ----------------------------------------------------

struct UniquenessSeries {
  double eps = 0.0;
  std::vector<double> times;
  std::vector<double> h;             // (Phi_eps z, z)_2
  std::vector<double> h_decomposed;  // |K_eps z|_2^2 + eps |Phi_eps z|_2^2
  std::vector<double> kz_norm;       // |K(z)|_2
  std::vector<double> hm1_norm;      // H^{-1} surrogate of z, diagnostic only
  std::vector<double> envelope;      // h(0) + C int_0^t (1 + |u1|_4^4 + |u2|_{4/3}^4) |K(z)|_2^2 ds
  double gronwall_constant = 0.0;
  bool constant_fitted = false;
  double max_h = 0.0;
  double max_decomposition_error = 0.0;  // relative
  bool envelope_dominates = false;

  nlohmann::json to_json() const;
};

// z = u1 - u2 with the unpaired Nyquist lines removed. Without a constant, C
// is fitted as the smallest value for which the envelope dominates h.
UniquenessSeries uniqueness_functional(const Trajectory& u1, const Trajectory& u2, double eps,
                                       std::optional<double> gronwall_constant = std::nullopt);

// Every snapshot resampled onto `grid`.
Trajectory restrict_trajectory(const Trajectory& traj, const Grid2D& grid);

// --- decay laws ---------------------------------------------------------------

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;

  nlohmann::json to_json() const;
};

// Least squares of log value against log time over t in [t_lo, t_hi].
DecayFit decay_fit(std::span<const double> times, std::span<const double> values, double t_lo,
                   double t_hi);

enum class DecayQuantity { kVorticity, kVelocity };
DecayFit decay_fit(const Trajectory& traj, DecayQuantity quantity, double r, double t_lo,
                   double t_hi);

// Start of the admissible fit window for mollified atoms: 5 sigma0^2 / (4 nu).
inline double mollification_transient(double mollifier_variance, double nu) {
  return 5.0 * mollifier_variance / (4.0 * nu);
}

// --- flow property ------------------------------------------------------------

struct FlowCheckResult {
  double discrepancy = 0.0;       // L1 at t: continuous vs restarted at r
  double self_convergence = 0.0;  // L1 at t: (dx, dt) vs (dx/2, dt/2)
  ScalarField continuous;
  ScalarField restarted;

  nlohmann::json to_json() const;
};

// Times are absolute; the equation is autonomous so runs start at s. The
// continuous run takes no snapshot at r.
FlowCheckResult flow_property_check(const ScalarField& u0, double s, double r, double t,
                                    const SolverConfig& cfg, bool measure_self_convergence = true);

// Particle version: continuous run with a snapshot at r versus a run
// restarted from the ensemble at r. True when bitwise identical at t.
bool particle_flow_check(const ParticleEnsemble& initial, double r, double t, const SdeConfig& cfg);

}  // namespace vortlab

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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "vortlab/fields.hpp"
#include "vortlab/profiles.hpp"

namespace vortlab {

struct DtPolicy {
  enum class Kind { kFixed, kCfl };
  Kind kind = Kind::kFixed;
  double dt = 0.01;      // fixed step, or the upper bound under CFL control
  double safety = 0.5;   // admissible dt = safety * dx / max|K(u)|
};

struct SolverConfig {
  double nu = 0.05;
  DtPolicy dt;
  double t_end = 1.0;
  std::vector<double> snapshot_times;  // t = 0 is always recorded
  bool dealias = true;
  double box_size = 20.0;
  int resolution = 256;
  double blowup_factor = 10.0;

  Grid2D grid() const { return Grid2D(box_size, resolution); }
  void validate() const;

  nlohmann::json to_json() const;
  static SolverConfig from_json(const nlohmann::json& j);
  std::string hash() const;

  // Evenly spaced snapshots: count intervals over [0, t_end].
  SolverConfig with_uniform_snapshots(int count) const;
};

// Norm exponents recorded per step.
inline constexpr std::array<double, 5> kDiagnosticExponents = {1.0, 4.0 / 3.0, 2.0, 4.0, kInfNorm};

struct DiagnosticRow {
  double time = 0.0;
  double mass = 0.0;
  double min = 0.0;
  std::array<double, 5> norms{};  // |u|_p for kDiagnosticExponents
  double cfl = 0.0;               // dt * max|K(u)| / dx of the step that produced this state
  double dt = 0.0;
};

struct Snapshot {
  double time;
  ScalarField field;
};

// RunRecord of a spectral solve.
struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::vector<DiagnosticRow> diagnostics;
  std::string config_hash;
  nlohmann::json metadata = nlohmann::json::object();

  const Grid2D& grid() const { return snapshots.front().field.grid(); }
  std::vector<double> times() const;
  // Snapshot at exactly time t (within 1e-12), if present.
  const ScalarField* find(double t) const;
  // Linear interpolation between bracketing snapshots.
  ScalarField at(double t) const;
};

class CflViolation : public std::runtime_error {
 public:
  CflViolation(double requested, double admissible);
  double requested() const { return requested_; }
  double admissible() const { return admissible_; }

 private:
  double requested_;
  double admissible_;
};

class SolverAbort : public std::runtime_error {
 public:
  SolverAbort(const std::string& what, Trajectory partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

// One integrating-factor RK2 (Heun) step of u_t = nu Delta u - div(K(u) u):
//
//   u*      = E (u + dt N(u))
//   u_next  = E u + dt/2 (E N(u) + N(u*)),    E = e^{nu dt Delta},
//
// with N(u) = -div(K(u) u) evaluated pseudo-spectrally. The mean mode of N
// is zero, so mass is preserved.
ScalarField step_mild(const ScalarField& u, double dt, const SolverConfig& cfg);

Trajectory solve(const ScalarField& u0, const SolverConfig& cfg);

// v_t = nu Delta v - div(K(u(t)) v) with u frozen from u_traj; the drift is
// K of each snapshot, linearly interpolated in time.
Trajectory solve_linearized(const ScalarField& v0, const Trajectory& u_traj,
                            const SolverConfig& cfg);

struct Atom {
  Point position;
  double weight;
};

// Atoms are mollified to Gaussians of variance `mollifier_variance`
// (default 4 dx^2) before solving. The trajectory metadata records it.
Trajectory solve_from_measure(std::span<const Atom> atoms, const SolverConfig& cfg,
                              std::optional<double> mollifier_variance = std::nullopt);

ScalarField mollify_atoms(std::span<const Atom> atoms, const Grid2D& grid, double variance);

DiagnosticRow diagnose(const ScalarField& u, double time, double dt, double cfl);

}  // namespace vortlab

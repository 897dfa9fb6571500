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

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "vortlab/sde.hpp"
#include "vortlab/solver.hpp"

namespace vortlab {

// Trajectory directory layout:
//
//   <dir>/manifest.json          schema, config, grid, snapshot index, diagnostics
//   <dir>/snapshot_00000.vlf     one field file per snapshot (+ .json sidecar)
//
// Manifests name every file they own through "file" entries or the
// "artifacts" list; nested manifests are followed by check_outputs.
inline constexpr int kManifestSchemaVersion = 1;
inline constexpr const char* kManifestName = "manifest.json";

nlohmann::json diagnostics_table(const std::vector<DiagnosticRow>& rows);
std::vector<DiagnosticRow> parse_diagnostics(const nlohmann::json& table);

// Writes snapshots and the manifest; `extra` is merged into the manifest.
void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj,
                      const nlohmann::json& config, const nlohmann::json& extra = {});

struct LoadedTrajectory {
  Trajectory trajectory;
  nlohmann::json manifest;
};

// Rejects unknown schema versions.
LoadedTrajectory read_trajectory(const std::filesystem::path& dir);

// Particle runs share the layout: per snapshot an ensemble file
// (particles_*.vlp) and its KDE marginal (marginal_*.vlf).
void write_particle_trajectory(const std::filesystem::path& dir, const ParticleTrajectory& traj,
                               const nlohmann::json& config, const nlohmann::json& extra = {});
ParticleTrajectory read_particle_trajectory(const std::filesystem::path& dir);

nlohmann::json read_manifest(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir, const nlohmann::json& manifest);

// Problems found: orphan files, files referenced more than once, and
// references to missing files. Empty when the directory is consistent.
std::vector<std::string> check_outputs(const std::filesystem::path& dir);

// Library, FFTW and compiler versions for run manifests.
nlohmann::json build_info();

}  // namespace vortlab

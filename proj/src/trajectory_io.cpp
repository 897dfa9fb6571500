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

#include "vortlab/trajectory_io.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <stdexcept>

#include "vortlab/field_io.hpp"

namespace vortlab {
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kColumns = {"time",   "mass",   "min",    "norm_1", "norm_4/3",
                                           "norm_2", "norm_4", "norm_inf", "cfl",  "dt"};

const std::vector<std::string> kParticleColumns = {"time",      "centroid_x",   "centroid_y", "spread",
                                                   "max_speed", "marginal_l43", "discrepancy"};

std::string numbered(const char* stem, std::size_t k, const char* ext) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s_%05zu%s", stem, k, ext);
  return buf;
}

std::string snapshot_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%05zu.vlf", k);
  return buf;
}

// Every string under a "file" key, plus "artifacts" entries.
void collect_refs(const nlohmann::json& j, std::vector<std::string>& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      if (key == "file" && value.is_string()) {
        out.push_back(value.get<std::string>());
      } else if (key == "artifacts" && value.is_array()) {
        for (const auto& a : value) {
          if (a.is_string()) out.push_back(a.get<std::string>());
        }
      } else {
        collect_refs(value, out);
      }
    }
  } else if (j.is_array()) {
    for (const auto& v : j) collect_refs(v, out);
  }
}

void gather(const fs::path& root, const fs::path& manifest_dir, std::map<std::string, int>& refs,
            std::vector<std::string>& problems) {
  const auto manifest = read_manifest(manifest_dir);
  std::vector<std::string> names;
  collect_refs(manifest, names);
  for (const auto& name : names) {
    const fs::path p = manifest_dir / name;
    const std::string rel = fs::relative(p, root).generic_string();
    if (!fs::exists(p)) {
      problems.push_back("missing: " + rel);
      continue;
    }
    ++refs[rel];
    if (p.extension() == ".vlf") {
      auto side = p;
      side += ".json";
      if (fs::exists(side)) ++refs[fs::relative(side, root).generic_string()];
    }
    if (p.filename() == kManifestName && refs[rel] == 1) gather(root, p.parent_path(), refs, problems);
  }
}

}  // namespace

nlohmann::json diagnostics_table(const std::vector<DiagnosticRow>& rows) {
  nlohmann::json out = {{"columns", kColumns}, {"rows", nlohmann::json::array()}};
  for (const auto& r : rows) {
    nlohmann::json row = {r.time, r.mass, r.min};
    for (double v : r.norms) row.push_back(v);
    row.push_back(r.cfl);
    row.push_back(r.dt);
    out["rows"].push_back(std::move(row));
  }
  return out;
}

std::vector<DiagnosticRow> parse_diagnostics(const nlohmann::json& table) {
  if (table.at("columns").get<std::vector<std::string>>() != kColumns) {
    throw std::runtime_error("diagnostics: unexpected column layout");
  }
  std::vector<DiagnosticRow> rows;
  for (const auto& r : table.at("rows")) {
    DiagnosticRow d;
    d.time = r.at(0).get<double>();
    d.mass = r.at(1).get<double>();
    d.min = r.at(2).get<double>();
    for (std::size_t k = 0; k < d.norms.size(); ++k) d.norms[k] = r.at(3 + k).get<double>();
    d.cfl = r.at(8).get<double>();
    d.dt = r.at(9).get<double>();
    rows.push_back(d);
  }
  return rows;
}

nlohmann::json read_manifest(const fs::path& dir) {
  std::ifstream in(dir / kManifestName);
  if (!in) throw std::runtime_error("no manifest in " + dir.string());
  auto manifest = nlohmann::json::parse(in);
  if (manifest.value("schema_version", 0) != kManifestSchemaVersion) {
    throw std::runtime_error("unsupported manifest schema version in " + dir.string());
  }
  return manifest;
}

void write_manifest(const fs::path& dir, const nlohmann::json& manifest) {
  fs::create_directories(dir);
  write_atomically(dir / kManifestName, manifest.dump(2));
}

void write_trajectory(const fs::path& dir, const Trajectory& traj, const nlohmann::json& config,
                      const nlohmann::json& extra) {
  if (traj.snapshots.empty()) throw std::invalid_argument("write_trajectory: no snapshots");
  fs::create_directories(dir);
  const Grid2D& g = traj.grid();
  nlohmann::json index = nlohmann::json::array();
  const nlohmann::json provenance = {{"config_hash", traj.config_hash}};
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const auto name = snapshot_name(k);
    write_field(dir / name, traj.snapshots[k].field, traj.snapshots[k].time, "u", provenance);
    index.push_back({{"index", k}, {"time", traj.snapshots[k].time}, {"file", name}});
  }
  nlohmann::json manifest = {
      {"schema", "vortlab.trajectory"},
      {"schema_version", kManifestSchemaVersion},
      {"config", config},
      {"config_hash", traj.config_hash},
      {"grid", {{"box_size", g.box_size()}, {"resolution", g.n()}}},
      {"snapshots", index},
      {"diagnostics", diagnostics_table(traj.diagnostics)},
      {"metadata", traj.metadata},
  };
  if (extra.is_object()) manifest.update(extra);
  write_manifest(dir, manifest);
}

LoadedTrajectory read_trajectory(const fs::path& dir) {
  LoadedTrajectory out;
  out.manifest = read_manifest(dir);
  auto& traj = out.trajectory;
  traj.config_hash = out.manifest.value("config_hash", std::string());
  traj.metadata = out.manifest.value("metadata", nlohmann::json::object());
  for (const auto& s : out.manifest.at("snapshots")) {
    auto snap = read_field(dir / s.at("file").get<std::string>());
    traj.snapshots.push_back({s.at("time").get<double>(), std::move(snap.field)});
  }
  traj.diagnostics = parse_diagnostics(out.manifest.at("diagnostics"));
  return out;
}

std::vector<std::string> check_outputs(const fs::path& dir) {
  std::vector<std::string> problems;
  std::map<std::string, int> refs;
  refs[kManifestName] = 1;
  gather(dir, dir, refs, problems);
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), dir).generic_string();
    const auto it = refs.find(rel);
    if (it == refs.end()) {
      problems.push_back("orphan: " + rel);
    } else if (it->second > 1) {
      problems.push_back("referenced " + std::to_string(it->second) + " times: " + rel);
    }
  }
  return problems;
}

void write_particle_trajectory(const fs::path& dir, const ParticleTrajectory& traj,
                               const nlohmann::json& config, const nlohmann::json& extra) {
  if (traj.snapshots.empty()) throw std::invalid_argument("write_particle_trajectory: no snapshots");
  fs::create_directories(dir);
  const Grid2D& g = traj.snapshots.front().marginal.grid();
  const nlohmann::json provenance = {{"config_hash", traj.config_hash}};
  nlohmann::json index = nlohmann::json::array();
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const auto& s = traj.snapshots[k];
    const auto particles = numbered("particles", k, ".vlp");
    const auto marginal = numbered("marginal", k, ".vlf");
    write_particles(dir / particles, s.ensemble, traj.config_hash);
    write_field(dir / marginal, s.marginal, s.time, "marginal", provenance);
    index.push_back({{"index", k},
                     {"time", s.time},
                     {"particles", {{"file", particles}, {"count", s.ensemble.size()}}},
                     {"marginal", {{"file", marginal}}}});
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& d : traj.diagnostics) {
    rows.push_back({d.time, d.centroid[0], d.centroid[1], d.spread, d.max_speed, d.marginal_l43,
                    std::isnan(d.discrepancy) ? nlohmann::json() : nlohmann::json(d.discrepancy)});
  }
  nlohmann::json manifest = {
      {"schema", "vortlab.particles"},
      {"schema_version", kManifestSchemaVersion},
      {"config", config},
      {"config_hash", traj.config_hash},
      {"grid", {{"box_size", g.box_size()}, {"resolution", g.n()}}},
      {"snapshots", index},
      {"diagnostics", {{"columns", kParticleColumns}, {"rows", rows}}},
      {"metadata", traj.metadata},
  };
  if (extra.is_object()) manifest.update(extra);
  write_manifest(dir, manifest);
}

ParticleTrajectory read_particle_trajectory(const fs::path& dir) {
  const auto manifest = read_manifest(dir);
  if (manifest.value("schema", std::string()) != "vortlab.particles") {
    throw std::runtime_error("not a particle trajectory: " + dir.string());
  }
  ParticleTrajectory traj;
  traj.config_hash = manifest.value("config_hash", std::string());
  traj.metadata = manifest.value("metadata", nlohmann::json::object());
  for (const auto& s : manifest.at("snapshots")) {
    auto ens = read_particles(dir / s.at("particles").at("file").get<std::string>());
    auto marginal = read_field(dir / s.at("marginal").at("file").get<std::string>());
    traj.snapshots.push_back({s.at("time").get<double>(), std::move(ens.ensemble), std::move(marginal.field)});
  }
  const auto& table = manifest.at("diagnostics");
  if (table.at("columns").get<std::vector<std::string>>() != kParticleColumns) {
    throw std::runtime_error("particle diagnostics: unexpected column layout");
  }
  for (const auto& r : table.at("rows")) {
    ParticleDiagnostics d;
    d.time = r.at(0).get<double>();
    d.centroid = {r.at(1).get<double>(), r.at(2).get<double>()};
    d.spread = r.at(3).get<double>();
    d.max_speed = r.at(4).get<double>();
    d.marginal_l43 = r.at(5).get<double>();
    if (!r.at(6).is_null()) d.discrepancy = r.at(6).get<double>();
    traj.diagnostics.push_back(d);
  }
  return traj;
}

nlohmann::json build_info() {
  return {{"vortlab", VORTLAB_VERSION},
          {"fftw", std::string(fftw_version)},
          {"compiler", __VERSION__},
          {"manifest_schema", kManifestSchemaVersion}};
}

}  // namespace vortlab

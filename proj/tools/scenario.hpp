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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "vortlab/probes.hpp"
#include "vortlab/sde.hpp"
#include "vortlab/solver.hpp"

namespace vortlab::cli {

enum class ScenarioKind {
  kSpectralRun,
  kParticleRun,
  kVerifyWeak,
  kVerifyUniqueness,
  kFlowCheck,
  kMarkovProbe,
  kKernelBench,
  kConvergenceStudy,
};

std::string to_string(ScenarioKind kind);
ScenarioKind parse_kind(const std::string& name);  // throws std::invalid_argument

// Invalid scenario content. The message names the field and, when parsed
// from TOML, the file position.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A referenced input file that does not exist.
class MissingInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Blob {
  Point center{};
  double variance = 1.0;
  double mass = 1.0;
};

struct InitialCondition {
  enum class Type { kLambOseen, kGaussians, kAtoms, kField };
  Type type = Type::kLambOseen;
  double t0 = 0.5;  // Lamb-Oseen virtual origin
  std::vector<Blob> blobs;
  std::vector<Atom> atoms;
  std::filesystem::path file;  // .vlf, absolute after parsing
};

struct WeakOptions {
  double horizon = 0.0;  // 0: solver t_end
  double base_radius = 2.0;
  double max_normalized = 1e-3;
  bool linearized = true;
};

struct UniquenessOptions {
  std::vector<int> resolutions = {128, 256, 512};
  std::vector<double> eps = {0.01, 0.1, 1.0};
  double ratio_eps = 1.0;
  double min_ratio = 3.0;
};

struct FlowOptions {
  double s = 0.0;
  double r = 0.5;
  double t = 1.0;
  double factor = 2.0;
};

struct MarkovOptions {
  double r = 0.5;
  double t = 1.0;
  double dt = 0.01;
  std::size_t particles = 100000;
  double bin_radius_factor = 3.0;
  int coarse_bins = 32;
  std::size_t min_population = 500;
  int reference_snapshots = 100;
};

struct BenchOptions {
  std::vector<std::size_t> sizes = {1000, 4000};
  double max_rel_err = 1e-3;
  std::size_t direct_targets = 20000;
};

struct ConvergenceOptions {
  enum class Parameter { kResolution, kParticles };
  Parameter parameter = Parameter::kResolution;
  int levels = 3;
  double min_order = 1.8;  // 0 disables the order check
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kSpectralRun;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;  // empty: chosen by the runner
  std::string name;                  // scenario file stem

  InitialCondition initial;
  SolverConfig solver;
  SdeConfig particles;
  std::optional<double> max_l1_error;     // spectral-run, Lamb-Oseen data
  std::optional<double> max_discrepancy;  // particle-run
  WeakOptions weak;
  UniquenessOptions uniqueness;
  FlowOptions flow;
  MarkovOptions markov;
  BenchOptions bench;
  ConvergenceOptions convergence;

  // Cross-field checks; throws SchemaError.
  void validate() const;
  nlohmann::json to_json() const;
  static ScenarioConfig from_json(const nlohmann::json& j);
  std::string hash() const;
};

// Parses and validates a TOML scenario. Relative input paths resolve against
// the scenario's directory.
ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(std::string_view toml_text, const std::string& source_name,
                              const std::filesystem::path& base_dir);

// "1e4" and "10000" alike; throws std::invalid_argument.
std::size_t parse_count(const std::string& text);

}  // namespace vortlab::cli

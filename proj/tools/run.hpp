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

#include "scenario.hpp"
#include "vortlab/point_velocity.hpp"

namespace vortlab::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,         // bad arguments or scenario schema violations
  kMissingInput = 3,  // scenario or referenced input file absent
  kSolverAbort = 4,   // blow-up guard, non-finite state, CFL violation
  kIoError = 5,       // output directory or artifact write failure
  kOutputCheck = 6,   // --check-outputs found orphans, duplicates or missing files
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::filesystem::path output_dir;
  int jobs = 1;
  bool check_outputs = false;
};

struct RunResult {
  bool pass = true;
  std::filesystem::path output_dir;
  std::vector<std::string> output_problems;
};

// Runs the scenario into options.output_dir, which must be empty, absent, or
// a previous run directory (replaced).
RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options);

// Default output directory: $VORTLAB_OUTPUT_ROOT/<name>, else runs/<name>.
std::filesystem::path default_output_dir(const ScenarioConfig& cfg);

std::string bench_csv(const std::vector<KernelBenchRow>& rows);

}  // namespace vortlab::cli

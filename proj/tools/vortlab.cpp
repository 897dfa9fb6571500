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

// vortlab: scenario runner for the vorticity solver, particle system and
// verification checks.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "run.hpp"
#include "scenario.hpp"
#include "vortlab/log.hpp"
#include "vortlab/solver.hpp"

namespace cli = vortlab::cli;

namespace {

constexpr const char* kFooter = R"(Exit codes:
  0  success, every enabled check passed
  1  a check failed (see report.json)
  2  usage error or scenario schema violation
  3  missing input (scenario file or referenced field file)
  4  solver abort (blow-up guard, non-finite state, CFL violation)
  5  I/O failure writing artifacts
  6  --check-outputs found orphaned, duplicated or missing artifacts

Environment:
  VORTLAB_OUTPUT_ROOT   default parent of run directories (else ./runs)
  VORTLAB_KERNEL_CACHE  directory for cached Biot-Savart kernel tables)";

struct Common {
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool quiet = false;
  bool check_outputs = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--output-dir,-o", c.output_dir, "Run directory (replaced if it holds a previous run)");
  sub->add_option("--seed", c.seed, "Override the scenario seed");
  sub->add_option("--jobs,-j", c.jobs, "Parallel levels in a convergence study")->check(CLI::PositiveNumber);
  sub->add_flag("--quiet,-q", c.quiet, "Suppress progress and warnings");
  sub->add_flag("--check-outputs", c.check_outputs, "Verify every artifact is referenced by exactly one manifest");
}

int execute(cli::ScenarioConfig cfg, const Common& common, bool print_csv = false) {
  if (common.seed) {
    cfg.seed = *common.seed;
    cfg.particles.seed = *common.seed;
  }
  cli::RunOptions options;
  options.output_dir = common.output_dir;
  options.jobs = common.jobs;
  options.check_outputs = common.check_outputs;
  const auto result = cli::run_scenario(cfg, options);
  if (print_csv && !common.quiet) {
    std::ifstream in(result.output_dir / "bench.csv");
    std::cout << in.rdbuf();
  }
  for (const auto& p : result.output_problems) std::cerr << "output check: " << p << '\n';
  if (!common.quiet) {
    std::cout << (result.pass ? "passed" : "FAILED") << ": " << cli::to_string(cfg.kind) << " -> "
              << result.output_dir.string() << '\n';
  }
  if (!result.output_problems.empty()) return cli::kOutputCheck;
  return result.pass ? cli::kOk : cli::kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vorticity solver, particle representation and verification runner"};
  app.footer(kFooter);
  app.require_subcommand(1);

  Common common;
  std::string scenario_path;

  auto* run = app.add_subcommand("run", "Run a TOML scenario of any kind");
  run->add_option("scenario", scenario_path, "Scenario file (.toml)")->required();
  add_common(run, common);

  auto* exporter = app.add_subcommand("export", "Print a validated scenario as JSON");
  exporter->add_option("scenario", scenario_path, "Scenario file (.toml)")->required();

  std::vector<std::pair<CLI::App*, cli::ScenarioKind>> kinds;
  std::vector<std::string> bench_sizes;
  int levels = 0;
  for (auto kind : {cli::ScenarioKind::kSpectralRun, cli::ScenarioKind::kParticleRun, cli::ScenarioKind::kVerifyWeak,
                    cli::ScenarioKind::kVerifyUniqueness, cli::ScenarioKind::kFlowCheck,
                    cli::ScenarioKind::kMarkovProbe, cli::ScenarioKind::kKernelBench,
                    cli::ScenarioKind::kConvergenceStudy}) {
    auto* sub = app.add_subcommand(cli::to_string(kind), "Run a scenario as " + cli::to_string(kind));
    auto* file = sub->add_option("scenario", scenario_path, "Scenario file (.toml)");
    if (kind == cli::ScenarioKind::kKernelBench) {
      sub->add_option("--n", bench_sizes, "Source counts, e.g. 1e3,4e3")->delimiter(',');
    } else {
      file->required();
    }
    if (kind == cli::ScenarioKind::kConvergenceStudy) {
      sub->add_option("--levels", levels, "Refinement levels (>= 3)");
    }
    add_common(sub, common);
    kinds.emplace_back(sub, kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kUsage;
  }

  vortlab::log::set_level(common.quiet ? vortlab::log::Level::kQuiet : vortlab::log::Level::kWarn);

  try {
    if (exporter->parsed()) {
      std::cout << cli::load_scenario(scenario_path).to_json().dump(2) << '\n';
      return cli::kOk;
    }
    if (run->parsed()) return execute(cli::load_scenario(scenario_path), common);
    for (const auto& [sub, kind] : kinds) {
      if (!sub->parsed()) continue;
      cli::ScenarioConfig cfg;
      if (!scenario_path.empty()) {
        cfg = cli::load_scenario(scenario_path);
      } else {
        cfg.name = cli::to_string(kind);
      }
      cfg.kind = kind;
      if (!bench_sizes.empty()) {
        cfg.bench.sizes.clear();
        for (const auto& s : bench_sizes) cfg.bench.sizes.push_back(cli::parse_count(s));
      }
      if (levels != 0) {
        if (levels < 3) throw cli::SchemaError("option '--levels': a convergence study needs at least 3 levels");
        cfg.convergence.levels = levels;
      }
      cfg.validate();
      return execute(cfg, common, kind == cli::ScenarioKind::kKernelBench);
    }
  } catch (const cli::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const cli::MissingInput& e) {
    std::cerr << "missing input: " << e.what() << '\n';
    return cli::kMissingInput;
  } catch (const vortlab::SolverAbort& e) {
    std::cerr << "solver abort: " << e.what() << '\n';
    return cli::kSolverAbort;
  } catch (const vortlab::CflViolation& e) {
    std::cerr << "solver abort: " << e.what() << '\n';
    return cli::kSolverAbort;
  } catch (const cli::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return cli::kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kIoError;
  }
  return cli::kUsage;
}

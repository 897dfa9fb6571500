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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "run.hpp"
#include "scenario.hpp"
#include "vortlab/field_io.hpp"
#include "vortlab/trajectory_io.hpp"

using namespace vortlab;
using namespace vortlab::cli;
namespace fs = std::filesystem;

namespace {

ScenarioConfig parse(const std::string& text) { return parse_scenario(text, "test.toml", fs::current_path()); }

std::string schema_message(const std::string& text) {
  try {
    parse(text);
  } catch (const SchemaError& e) {
    return e.what();
  }
  return "";
}

const char* kFull = R"(
kind = "particle-run"
seed = 17

[initial]
type = "gaussians"
blobs = [[-0.5, 0.0, 0.15, 0.6], [0.6, 0.2, 0.1, 0.4]]

[solver]
nu = 0.02
box_size = 12.0
resolution = 64
t_end = 0.75
dt = 0.025
dt_policy = "cfl"
safety = 0.4
snapshot_times = [0.25, 0.5, 0.75]

[particles]
count = 2e4
method = "direct"
snapshots = 3

[verify]
max_discrepancy = 0.1

[uniqueness]
resolutions = [64, 128]
eps = [0.5]
ratio_eps = 0.5

[convergence]
parameter = "particles"
levels = 4
)";

}  // namespace

TEST_CASE("scenario: fields, defaults and inheritance") {
  const auto c = parse(kFull);
  CHECK(c.kind == ScenarioKind::kParticleRun);
  CHECK(c.seed == 17);
  CHECK(c.name == "test");
  CHECK(c.initial.blobs.size() == 2);
  CHECK(c.solver.resolution == 64);
  CHECK(c.solver.dt.kind == DtPolicy::Kind::kCfl);
  CHECK(c.solver.snapshot_times.size() == 3);
  CHECK(c.particles.particles == 20000);
  CHECK(c.particles.seed == 17);
  CHECK(c.particles.nu == 0.02);
  CHECK(c.particles.box_size == 12.0);
  CHECK(c.particles.t_end == 0.75);
  CHECK(c.particles.method == DriftMethod::kDirect);
  CHECK(c.particles.snapshot_times == std::vector<double>{0.25, 0.5, 0.75});
  CHECK(*c.max_discrepancy == 0.1);
  CHECK(c.convergence.levels == 4);
  CHECK(c.convergence.min_order == 0.0);

  const auto d = parse("kind = \"flow-check\"\n");
  CHECK(d.initial.type == InitialCondition::Type::kLambOseen);
  CHECK(d.solver.snapshot_times.size() == 10);
  CHECK(d.uniqueness.resolutions == std::vector<int>{256, 512, 1024});
  CHECK_FALSE(d.max_l1_error.has_value());
}

TEST_CASE("scenario: JSON export round-trips losslessly") {
  const auto c = parse(kFull);
  const auto j = c.to_json();
  const auto back = ScenarioConfig::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(back.hash() == c.hash());
  auto moved = c;
  moved.output_dir = "elsewhere";
  CHECK(moved.hash() == c.hash());
  moved.seed = 18;
  CHECK(moved.hash() != c.hash());
}

TEST_CASE("scenario: schema errors name the field and its line") {
  const auto msg = schema_message("kind = \"spectral-run\"\n[solver]\nresolution = 100\n");
  CHECK(msg.find("solver.resolution") != std::string::npos);
  CHECK(msg.find("test.toml:3:") != std::string::npos);
  CHECK(msg.find("power of two") != std::string::npos);

  CHECK(schema_message("kind = \"spectral-run\"\n[solver]\nresolutin = 64\n").find("solver.resolutin': unknown") !=
        std::string::npos);
  CHECK(schema_message("kind = \"warp\"\n").find("field 'kind'") != std::string::npos);
  CHECK(schema_message("seed = 1\n").find("field 'kind': required") != std::string::npos);
  CHECK(schema_message("kind = \"flow-check\"\n[solver]\nnu = \"x\"\n").find("solver.nu': expected a number") !=
        std::string::npos);
  CHECK(schema_message("kind = \"flow-check\"\n[solver]\nnu = -1\n").find("solver.nu") != std::string::npos);
  CHECK(schema_message("kind = \"flow-check\"\n[particles]\nmethod = \"fmm\"\n").find("particles.method") !=
        std::string::npos);
  CHECK(schema_message("kind = \"flow-check\"\n[initial]\ntype = \"atoms\"\n").find("initial.atoms") !=
        std::string::npos);
  CHECK(schema_message("kind = \"flow-check\"\n[flow]\nr = 2.0\n").find("flow.r") != std::string::npos);
  CHECK(schema_message("kind = \"verify-uniqueness\"\n[uniqueness]\nresolutions = [64, 256]\n")
            .find("uniqueness.resolutions") != std::string::npos);
  CHECK(schema_message("kind = \"flow-check\"\nx = [1,\n").find("test.toml:") != std::string::npos);
}

TEST_CASE("scenario: convergence study needs three levels") {
  const auto msg = schema_message("kind = \"convergence-study\"\n[convergence]\nlevels = 1\n");
  CHECK(msg.find("convergence.levels") != std::string::npos);
  CHECK(parse("kind = \"convergence-study\"\n[convergence]\nlevels = 3\n").convergence.levels == 3);
}

TEST_CASE("scenario: missing inputs are distinguished from schema errors") {
  CHECK_THROWS_AS(parse("kind = \"flow-check\"\n[initial]\ntype = \"field\"\nfile = \"absent.vlf\"\n"), MissingInput);
  CHECK_THROWS_AS(load_scenario("definitely/not/here.toml"), MissingInput);
}

TEST_CASE("counts accept scientific notation") {
  CHECK(parse_count("1e3") == 1000);
  CHECK(parse_count("4000") == 4000);
  CHECK(parse_count("2.5e4") == 25000);
  CHECK_THROWS(parse_count("1.5"));
  CHECK_THROWS(parse_count("abc"));
  CHECK_THROWS(parse_count("0"));
  CHECK_THROWS(parse_count("1e3x"));
}

TEST_CASE("runs: artifacts are self-consistent and reruns reproduce them") {
  const fs::path root = fs::temp_directory_path() / "vortlab_scenario_runs";
  fs::remove_all(root);
  auto c = parse(R"(
kind = "spectral-run"
[initial]
type = "gaussians"
blobs = [[0.0, 0.0, 0.5, 1.0]]
[solver]
box_size = 10.0
resolution = 32
t_end = 0.2
dt = 0.05
snapshots = 2
)");
  RunOptions opt;
  opt.check_outputs = true;
  opt.output_dir = root / "a";
  const auto a = run_scenario(c, opt);
  CHECK(a.pass);
  CHECK(a.output_problems.empty());
  opt.output_dir = root / "b";
  const auto b = run_scenario(c, opt);
  auto ma = read_manifest(root / "a"), mb = read_manifest(root / "b");
  CHECK(ma.at("schema") == "vortlab.run");
  CHECK(ma.at("status") == "passed");
  for (auto* m : {&ma, &mb}) {
    m->erase("started_at");
    m->erase("wall_time_s");
  }
  CHECK(ma == mb);
  CHECK(read_trajectory(root / "a" / "trajectory").trajectory.snapshots.back().field.values()[100] ==
        read_trajectory(root / "b" / "trajectory").trajectory.snapshots.back().field.values()[100]);

  // A previous run directory is replaced; a foreign one is refused.
  opt.output_dir = root / "a";
  CHECK(run_scenario(c, opt).output_problems.empty());
  fs::create_directories(root / "foreign");
  std::ofstream(root / "foreign" / "notes.txt") << "keep";
  opt.output_dir = root / "foreign";
  CHECK_THROWS_AS(run_scenario(c, opt), IoError);
  CHECK(fs::exists(root / "foreign" / "notes.txt"));

  // A stray file shows up as an orphan.
  std::ofstream(root / "b" / "stray.txt") << "?";
  const auto problems = check_outputs(root / "b");
  REQUIRE(problems.size() == 1);
  CHECK(problems[0] == "orphan: stray.txt");
  fs::remove_all(root);
}

TEST_CASE("runs: solver aborts leave a partial trajectory and an aborted manifest") {
  const fs::path root = fs::temp_directory_path() / "vortlab_scenario_abort";
  fs::remove_all(root);
  // A sampled top hat rings under the spectral heat flow, so the grid max
  // creeps up; a guard factor just above 1 catches it.
  fs::create_directories(root);
  const Grid2D g(2.0, 64);
  const auto hat = ScalarField::from_function(g, [](double x, double y) { return std::hypot(x, y) < 0.3 ? 1.0 : 0.0; });
  write_field(root / "hat.vlf", hat * (1.0 / integral(hat)), 0.0, "u", nlohmann::json::object());
  auto c = parse_scenario(R"(
kind = "spectral-run"
[initial]
type = "field"
file = "hat.vlf"
[solver]
nu = 1e-4
box_size = 2.0
resolution = 64
t_end = 0.01
dt = 0.001
blowup_factor = 1.000001
snapshots = 5
)", "abort.toml", root);
  RunOptions opt;
  opt.output_dir = root / "run";
  CHECK_THROWS_AS(run_scenario(c, opt), SolverAbort);
  const auto m = read_manifest(root / "run");
  CHECK(m.at("status") == "aborted");
  CHECK(m.at("error").get<std::string>().size() > 0);
  CHECK(read_manifest(root / "run" / "trajectory").at("status") == "aborted");
  CHECK(check_outputs(root / "run").empty());
  fs::remove_all(root);
}

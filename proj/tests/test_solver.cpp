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
#include <numbers>

#include "support.hpp"
#include "vortlab/biot_savart.hpp"
#include "vortlab/log.hpp"
#include "vortlab/solver.hpp"
#include "vortlab/verification.hpp"

using namespace vortlab;
using vortlab::testing::random_blobs;
using vortlab::testing::relative_l2;

namespace {

SolverConfig base_config(double box, int n, double t_end, double dt) {
  SolverConfig c;
  c.nu = 0.05;
  c.box_size = box;
  c.resolution = n;
  c.t_end = t_end;
  c.dt.dt = dt;
  return c;
}

ScalarField pair(const Grid2D& g) {
  return gaussian_field(g, {-0.5, 0.0}, 0.15, 0.6) + gaussian_field(g, {0.6, 0.2}, 0.1, 0.4);
}

}  // namespace

TEST_CASE("SolverConfig: validation") {
  auto c = base_config(10.0, 64, 1.0, 0.01);
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.nu = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.dt.dt = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.snapshot_times = {0.5, 0.2};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.snapshot_times = {1.5};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.resolution = 100;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("SolverConfig: JSON round trip and hash") {
  auto c = base_config(12.5, 128, 2.0, 0.02).with_uniform_snapshots(8);
  c.dt.kind = DtPolicy::Kind::kCfl;
  c.dt.safety = 0.4;
  c.dealias = false;
  const auto back = SolverConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(back.hash() == c.hash());
  auto other = c;
  other.nu = 0.051;
  CHECK(other.hash() != c.hash());
  CHECK(c.snapshot_times.size() == 8);
  CHECK(c.snapshot_times.back() == 2.0);
}

TEST_CASE("step_mild: zero stays zero") {
  const auto c = base_config(10.0, 64, 1.0, 0.05);
  const ScalarField zero(c.grid());
  CHECK(step_mild(zero, 0.05, c).max_abs() == 0.0);
}

TEST_CASE("step_mild: radial data diffuses only") {
  const auto c = base_config(20.0, 256, 1.0, 0.05);
  const auto u = LambOseen{0.05, 0.5}.field(c.grid(), 0.0);
  // Independent check: K(u) . grad u vanishes pointwise for radial u.
  const auto y = biot_savart_field(u);
  const auto grad = spectral_gradient(u);
  double dot = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < u.grid().size(); ++k) {
    dot = std::max(dot, std::abs(y.c1[k] * grad.c1[k] + y.c2[k] * grad.c2[k]));
    scale = std::max(scale, std::hypot(y.c1[k], y.c2[k]) * std::hypot(grad.c1[k], grad.c2[k]));
  }
  CHECK(dot <= 1e-10 * scale);

  const auto stepped = step_mild(u, 0.05, c);
  CHECK(relative_l2(stepped, heat_semigroup(u, 0.05, c.nu)) <= 1e-8);
}

TEST_CASE("step_mild: mass and CFL") {
  auto c = base_config(10.0, 128, 1.0, 0.02);
  const auto u = pair(c.grid());
  const auto next = step_mild(u, 0.02, c);
  CHECK(std::abs(integral(next) - integral(u)) <= 1e-12);

  const double speed = biot_savart_field(u).max_speed();
  const double admissible = c.dt.safety * c.grid().dx() / speed;
  try {
    step_mild(u, 2.0 * admissible, c);
    FAIL("expected a CFL violation");
  } catch (const CflViolation& e) {
    CHECK(e.admissible() == doctest::Approx(admissible).epsilon(1e-12));
    CHECK(e.requested() == 2.0 * admissible);
  }
}

TEST_CASE("solve: Lamb-Oseen against the closed form") {
  auto c = base_config(20.0, 128, 1.0, 0.05).with_uniform_snapshots(10);
  const LambOseen lo{0.05, 0.5};
  const auto traj = solve(lo.field(c.grid(), 0.0), c);
  REQUIRE(traj.snapshots.size() == 11);
  CHECK(traj.snapshots.front().time == 0.0);
  CHECK(traj.snapshots.back().time == 1.0);
  CHECK(traj.diagnostics.size() == 21);
  for (std::size_t k = 1; k < traj.snapshots.size(); ++k) {
    CHECK(traj.snapshots[k].time > traj.snapshots[k - 1].time);
  }
  for (const auto& s : traj.snapshots) CHECK(lp_norm(s.field - lo.field(c.grid(), s.time), 1.0) <= 1e-3);
  CHECK(traj.config_hash == c.hash());
}

TEST_CASE("solve: CFL policy caps the step") {
  auto c = base_config(10.0, 128, 0.5, 1.0).with_uniform_snapshots(2);
  c.dt.kind = DtPolicy::Kind::kCfl;
  const auto traj = solve(pair(c.grid()), c);
  for (const auto& d : traj.diagnostics) CHECK(d.cfl <= c.dt.safety * (1.0 + 1e-9));

  c.dt.kind = DtPolicy::Kind::kFixed;
  CHECK_THROWS_AS(solve(pair(c.grid()) * 20.0, c), CflViolation);
}

TEST_CASE("solve: blow-up guard aborts with a partial record") {
  // A sampled top hat rings under the spectral heat flow, so the grid max
  // creeps up; a guard factor just above 1 catches it.
  auto c = base_config(2.0, 64, 0.01, 0.001).with_uniform_snapshots(5);
  c.nu = 1e-4;
  c.blowup_factor = 1.0 + 1e-6;
  const auto u0 = ScalarField::from_function(c.grid(), [](double x, double y) {
    return std::hypot(x, y) < 0.3 ? 1.0 : 0.0;
  });
  log::set_level(log::Level::kQuiet);
  try {
    solve(u0 * (1.0 / integral(u0)), c);
    FAIL("expected an abort");
  } catch (const SolverAbort& e) {
    CHECK(!e.partial().snapshots.empty());
    CHECK(e.partial().snapshots.front().time == 0.0);
    CHECK(e.partial().diagnostics.size() >= e.partial().snapshots.size());
  }
  log::set_level(log::Level::kWarn);
}

TEST_CASE("property: mass, positivity and L^p stability") {
  for (int seed = 0; seed < 6; ++seed) {
    auto c = base_config(16.0, 128, 1.0, 0.02).with_uniform_snapshots(5);
    c.dt.kind = DtPolicy::Kind::kCfl;
    auto u0 = random_blobs(c.grid(), 900 + seed, false, 3);
    u0 = u0 * (1.0 / integral(u0));
    const auto traj = solve(u0, c);
    double sup_k = 0.0;
    for (const auto& s : traj.snapshots) {
      REQUIRE(std::abs(integral(s.field) - 1.0) <= 1e-10);
      REQUIRE(s.field.min() >= -1e-8 * u0.max_abs());
      for (double p : {4.0 / 3.0, 2.0, 4.0}) REQUIRE(lp_norm(s.field, p) <= 1.05 * lp_norm(u0, p));
      const double k4 = lp_norm(biot_savart_field(s.field), 4.0) + lp_norm(gradient_velocity(s.field), 4.0);
      REQUIRE(std::isfinite(k4));
      sup_k = std::max(sup_k, k4);
    }
    MESSAGE("seed " << seed << ": sup (|K(u)|_4 + |grad K(u)|_4) = " << sup_k);
  }
}

TEST_CASE("self-convergence order under (dx, dt) -> (dx/2, dt/2)") {
  // Non-radial data so the transport term is active.
  std::vector<ScalarField> finals;
  const Grid2D coarse(10.0, 64);
  for (int level = 0; level < 3; ++level) {
    const int n = 64 << level;
    auto c = base_config(10.0, n, 1.0, 0.1 / (1 << level));
    c.snapshot_times = {1.0};
    finals.push_back(resample(solve(pair(c.grid()), c).snapshots.back().field, coarse));
  }
  const double e1 = lp_norm(finals[0] - finals[1], 2.0);
  const double e2 = lp_norm(finals[1] - finals[2], 2.0);
  const double order = std::log2(e1 / e2);
  MESSAGE("self-convergence: " << e1 << " -> " << e2 << ", order " << order);
  CHECK(order >= 1.8);
}

TEST_CASE("solve: bitwise reproducible") {
  auto c = base_config(10.0, 64, 0.3, 0.03).with_uniform_snapshots(3);
  const auto a = solve(pair(c.grid()), c);
  const auto b = solve(pair(c.grid()), c);
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    const auto va = a.snapshots[k].field.values();
    const auto vb = b.snapshots[k].field.values();
    CHECK(std::equal(va.begin(), va.end(), vb.begin()));
  }
}

TEST_CASE("Trajectory: lookup and interpolation") {
  auto c = base_config(10.0, 64, 1.0, 0.05).with_uniform_snapshots(4);
  const auto traj = solve(pair(c.grid()), c);
  REQUIRE(traj.find(0.5) != nullptr);
  CHECK(traj.find(0.4) == nullptr);
  const auto mid = traj.at(0.375);
  const auto expect = traj.snapshots[1].field * 0.5 + traj.snapshots[2].field * 0.5;
  CHECK(relative_l2(mid, expect) < 1e-14);
  CHECK_THROWS(traj.at(1.5));
}

TEST_CASE("solve_linearized: self-consistency within the discretization error") {
  auto c = base_config(10.0, 64, 1.0, 0.05).with_uniform_snapshots(20);
  const auto u0 = pair(c.grid());
  const auto u = solve(u0, c);
  const auto v = solve_linearized(u0, u, c);
  auto fine = c;
  fine.resolution = 128;
  fine.dt.dt = 0.025;
  const auto u_fine = solve(resample(u0, fine.grid()), fine);
  for (std::size_t k = 0; k < u.snapshots.size(); ++k) {
    const auto& uf = resample(u_fine.snapshots[k].field, c.grid());
    const double disc = lp_norm(u.snapshots[k].field - uf, 1.0);
    const double gap = lp_norm(v.snapshots[k].field - u.snapshots[k].field, 1.0);
    CHECK(gap <= 2.0 * disc + 1e-14);
  }
}

TEST_CASE("solve_linearized: zero-mass data, zero drift, positivity") {
  auto c = base_config(10.0, 64, 1.0, 0.05).with_uniform_snapshots(10);
  const auto u = solve(pair(c.grid()), c);
  const auto z0 = gaussian_field(c.grid(), {0.3, 0.0}, 0.2) - gaussian_field(c.grid(), {-0.3, 0.1}, 0.25);
  for (const auto& s : solve_linearized(z0, u, c).snapshots) CHECK(std::abs(integral(s.field)) <= 1e-12);

  Trajectory still;
  for (const auto& s : u.snapshots) still.snapshots.push_back({s.time, ScalarField(c.grid())});
  const auto v0 = gaussian_field(c.grid(), {0.1, 0.2}, 0.3);
  const auto heat = solve_linearized(v0, still, c);
  for (const auto& s : heat.snapshots) {
    CHECK(relative_l2(s.field, heat_semigroup(v0, s.time, c.nu)) <= 1e-10);
  }

  auto fine = c;
  fine.resolution = 128;
  fine.dt.dt = 0.025;
  const auto v0_fine = gaussian_field(fine.grid(), {0.1, 0.2}, 0.3);
  const auto v = solve_linearized(v0_fine, solve(pair(fine.grid()), fine), fine);
  for (const auto& s : v.snapshots) CHECK(s.field.min() >= -1e-10 * v0_fine.max_abs());

  auto longer = c;
  longer.t_end = 2.0;
  longer.snapshot_times = {2.0};
  CHECK_THROWS_AS(solve_linearized(v0, u, longer), std::invalid_argument);
}

TEST_CASE("solve_from_measure: single atom follows Lamb-Oseen") {
  auto c = base_config(20.0, 256, 1.0, 0.05);
  c.snapshot_times = {1.0};
  const std::vector<Atom> atom = {{{0.0, 0.0}, 1.0}};
  const auto traj = solve_from_measure(atom, c);
  const double var0 = traj.metadata.at("mollifier_variance").get<double>();
  CHECK(var0 == doctest::Approx(4.0 * c.grid().dx() * c.grid().dx()));
  // The mollified atom is the vortex at virtual time var0 / (2 nu).
  const LambOseen lo{c.nu, var0 / (2.0 * c.nu)};
  CHECK(lp_norm(traj.snapshots.back().field - lo.field(c.grid(), 1.0), 1.0) <= 5e-3);
}

TEST_CASE("solve_from_measure: two atoms keep their centroid") {
  auto c = base_config(20.0, 128, 1.0, 0.05).with_uniform_snapshots(4);
  c.dt.kind = DtPolicy::Kind::kCfl;
  const std::vector<Atom> atoms = {{{-1.0, 0.0}, 0.5}, {{1.0, 0.0}, 0.5}};
  const auto traj = solve_from_measure(atoms, c, 0.1);
  for (const auto& s : traj.snapshots) {
    const auto& g = s.field.grid();
    double cx = 0.0, cy = 0.0;
    for (int j = 0; j < g.n(); ++j) {
      for (int i = 0; i < g.n(); ++i) {
        cx += s.field(i, j) * g.coord(i) * g.cell_area();
        cy += s.field(i, j) * g.coord(j) * g.cell_area();
      }
    }
    CHECK(std::abs(cx) <= 1e-6);
    CHECK(std::abs(cy) <= 1e-6);
  }
}

TEST_CASE("solve_from_measure: weight checks") {
  auto c = base_config(10.0, 64, 0.1, 0.05);
  const std::vector<Atom> ok = {{{0.0, 0.0}, 0.7}, {{1.0, 0.0}, 0.3}};
  CHECK_NOTHROW(solve_from_measure(ok, c));
  const std::vector<Atom> heavy = {{{0.0, 0.0}, 0.7}, {{1.0, 0.0}, 0.4}};
  CHECK_THROWS_AS(solve_from_measure(heavy, c), std::invalid_argument);
  const std::vector<Atom> negative = {{{0.0, 0.0}, 1.2}, {{1.0, 0.0}, -0.2}};
  CHECK_THROWS_AS(solve_from_measure(negative, c), std::invalid_argument);
}

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

// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "vortlab/biot_savart.hpp"
#include "vortlab/log.hpp"
#include "vortlab/point_velocity.hpp"
#include "vortlab/probes.hpp"
#include "vortlab/sde.hpp"
#include "vortlab/solver.hpp"
#include "vortlab/test_function.hpp"
#include "vortlab/verification.hpp"

using namespace vortlab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Shared by the regression, conservation and weak-form criteria.
struct Regression {
  SolverConfig cfg;
  LambOseen vortex{0.05, 0.5};
  Trajectory traj;
  double wall = 0.0;
};

const Regression& regression() {
  static const Regression run = [] {
    Regression r;
    r.cfg.nu = 0.05;
    r.cfg.box_size = 20.0;
    r.cfg.resolution = 256;
    r.cfg.t_end = 2.0;
    r.cfg.dt.dt = 0.02;
    r.cfg = r.cfg.with_uniform_snapshots(100);
    const auto start = Clock::now();
    r.traj = solve(r.vortex.field(r.cfg.grid(), 0.0), r.cfg);
    r.wall = seconds_since(start);
    return r;
  }();
  return run;
}

Outcome lamb_oseen_regression() {
  const auto& r = regression();
  const double err = lp_norm(r.traj.snapshots.back().field - r.vortex.field(r.cfg.grid(), 2.0), 1.0);
  std::ostringstream os;
  os << "L1 error at T=2 " << err << " (<= 1e-3), solve " << r.wall << " s (<= 60 s)";
  return {err <= 1e-3 && r.wall <= 60.0, os.str()};
}

Outcome decay_exponents() {
  SolverConfig c;
  c.nu = 0.25;
  c.box_size = 16.0;
  c.resolution = 512;
  c.t_end = 2.0;
  c.dt.kind = DtPolicy::Kind::kCfl;
  c.dt.dt = 0.02;
  for (int k = 0; k <= 20; ++k) c.snapshot_times.push_back(0.2 * std::pow(10.0, k / 20.0));
  const std::vector<Atom> atom = {{{0.0, 0.0}, 1.0}};
  const auto traj = solve_from_measure(atom, c);
  const double transient =
      mollification_transient(traj.metadata.at("mollifier_variance").get<double>(), c.nu);
  const auto r2 = decay_fit(traj, DecayQuantity::kVorticity, 2.0, 0.2, 2.0);
  const auto r4 = decay_fit(traj, DecayQuantity::kVorticity, 4.0, 0.2, 2.0);
  const auto v4 = decay_fit(traj, DecayQuantity::kVelocity, 4.0, 0.2, 2.0);
  std::ostringstream os;
  os << "slopes |u|_2 " << r2.slope << " (-0.5 +- 0.025), |u|_4 " << r4.slope << " (-0.75 +- 0.04), |K(u)|_4 "
     << v4.slope << " (-0.25 +- 0.05); transient ends at t=" << transient;
  const bool pass = std::abs(r2.slope + 0.5) <= 0.025 && std::abs(r4.slope + 0.75) <= 0.04 &&
                    std::abs(v4.slope + 0.25) <= 0.05 && transient <= 0.2;
  return {pass, os.str()};
}

Outcome conservation() {
  const auto& r = regression();
  const double m0 = r.traj.diagnostics.front().mass;
  double drift = 0.0;
  for (const auto& d : r.traj.diagnostics) drift = std::max(drift, std::abs(d.mass - m0));
  double div = 0.0, curl = 0.0;
  for (const auto& s : r.traj.snapshots) {
    const auto dc = velocity_div_curl(s.field);
    const double n2 = lp_norm(s.field, 2.0);
    div = std::max(div, lp_norm(dc.divergence, 2.0) / n2);
    curl = std::max(curl, lp_norm(dc.curl - s.field, 2.0) / n2);
  }
  std::ostringstream os;
  os << "mass drift " << drift << " (<= 1e-10), |div K(u)|_2/|u|_2 " << div << " (<= 1e-10), |curl K(u) - u|_2/|u|_2 "
     << curl << " (<= 1e-8) over " << r.traj.snapshots.size() << " snapshots";
  return {drift <= 1e-10 && div <= 1e-10 && curl <= 1e-8, os.str()};
}

Outcome appendix_identity() {
  const Grid2D g(16.0, 128);
  std::vector<ScalarField> bank;
  for (int k = 0; k < 5; ++k) bank.push_back(vortlab::testing::random_smooth(g, 500 + k, 8));
  for (int k = 0; k < 5; ++k) bank.push_back(vortlab::testing::random_blobs(g, 600 + k, true, 4));
  double identity = 0.0, ratio = 0.0;
  for (const auto& z : bank) {
    const double nz = lp_norm(z, 2.0);
    const double kz = lp_norm(biot_savart_periodic(z), 2.0);
    for (double eps : {0.1, 1.0, 10.0}) {
      const auto k_eps = k_epsilon(z, eps);
      const auto lhs = k_eps + biot_savart_periodic(z) - biot_savart_periodic(resolvent(z, eps)) * eps;
      identity = std::max(identity, lp_norm(lhs, 2.0) / nz);
      ratio = std::max(ratio, lp_norm(k_eps, 2.0) / kz);
    }
  }
  std::ostringstream os;
  os << "max |K_eps z + K z - eps K Phi_eps z|_2/|z|_2 " << identity << " (<= 1e-10), max |K_eps z|_2/|K z|_2 "
     << ratio << " (<= 2)";
  return {identity <= 1e-10 && ratio <= 2.0, os.str()};
}

Outcome uniqueness() {
  const LambOseen lo{0.05, 0.5};
  std::vector<Trajectory> runs;
  for (int n : {128, 256, 512}) {
    SolverConfig c;
    c.nu = 0.05;
    c.box_size = 20.0;
    c.resolution = n;
    c.t_end = 1.0;
    c.dt.dt = 0.02;
    c = c.with_uniform_snapshots(20);
    runs.push_back(solve(lo.field(c.grid(), 0.0), c));
  }
  const auto coarse = uniqueness_functional(runs[0], restrict_trajectory(runs[1], runs[0].grid()), 1.0);
  const auto fine = uniqueness_functional(runs[1], restrict_trajectory(runs[2], runs[1].grid()), 1.0);
  const double ratio = coarse.max_h / fine.max_h;
  const double decomposition = std::max(coarse.max_decomposition_error, fine.max_decomposition_error);
  std::ostringstream os;
  os << "max h_1: 128/256 " << coarse.max_h << ", 256/512 " << fine.max_h << ", ratio " << ratio
     << " (>= 3); decomposition error " << decomposition << " (<= 1e-10)";
  return {ratio >= 3.0 && decomposition <= 1e-10, os.str()};
}

Outcome weak_form() {
  const auto& r = regression();
  const double nu = r.cfg.nu;
  const auto bank = standard_bank(2.0, 2.0);
  const Grid2D& g = r.cfg.grid();
  std::vector<double> exact;
  for (int m : {25, 50, 100}) {
    Trajectory t;
    for (int k = 0; k <= m; ++k) {
      const double time = 2.0 * k / m;
      t.snapshots.push_back({time, r.vortex.field(g, time)});
    }
    exact.push_back(weak_residual(t, r.vortex.field(g, 0.0), bank, nu).max_normalized);
  }
  const double order = std::min(std::log2(exact[0] / exact[1]), std::log2(exact[1] / exact[2]));
  const auto u0 = r.vortex.field(g, 0.0);
  const double solver = weak_residual(r.traj, u0, bank, nu).max_normalized;
  const auto v = solve_linearized(u0, r.traj, r.cfg);
  const double linear = linearized_weak_residual(v, r.traj, bank, nu).max_normalized;
  std::ostringstream os;
  os << "exact-solution order " << order << " (>= 1.8); solver residual " << solver
     << " (<= 1e-3); linearized " << linear << " (<= 2x solver)";
  return {order >= 1.8 && solver <= 1e-3 && linear <= 2.0 * solver, os.str()};
}

Outcome mckean_vlasov() {
  const double nu = 0.05;
  const LambOseen lo{nu, 0.0};
  const std::vector<Atom> atom = {{{0.0, 0.0}, 1.0}};
  const ReferenceFn reference = [&](double t, const Grid2D& grid) -> std::optional<ScalarField> {
    if (t <= 0.0) return std::nullopt;
    return lo.field(grid, t);
  };
  std::vector<double> medians;
  double slowest = 0.0;
  std::ostringstream os;
  for (std::size_t n : {4096u, 16384u, 65536u}) {
    std::vector<double> errors;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      SdeConfig c;
      c.nu = nu;
      c.dt = 0.02;
      c.t_end = 1.0;
      c.box_size = 8.0;
      c.resolution = 256;
      c.particles = n;
      c.seed = seed;
      c.snapshot_times = {1.0};
      const auto start = Clock::now();
      const auto run = simulate(atom, c, reference);
      const double wall = seconds_since(start);
      if (n == 65536) slowest = std::max(slowest, wall);
      errors.push_back(run.diagnostics.back().discrepancy);
    }
    std::sort(errors.begin(), errors.end());
    medians.push_back(errors[1]);
    os << "N=" << n << " median e(1) " << errors[1] << "; ";
  }
  const bool decreasing = medians[0] > medians[1] && medians[1] > medians[2];
  os << "64k <= 0.05, decreasing " << (decreasing ? "yes" : "no") << ", slowest 64k run " << slowest
     << " s (<= 300 s)";
  return {medians[2] <= 0.05 && decreasing && slowest <= 300.0, os.str()};
}

Outcome treecode() {
  const auto rows = kernel_bench(100000, 1);
  const double speedup = rows[0].wall_ms / rows[1].wall_ms;
  std::ostringstream os;
  os << "N=1e5: direct " << rows[0].wall_ms << " ms (" << rows[0].timed_targets
     << " timed targets, scaled), treecode " << rows[1].wall_ms << " ms, speedup " << speedup
     << " (>= 10), max relative error " << rows[1].max_rel_err_vs_direct << " (<= 1e-3)";
  return {speedup >= 10.0 && rows[1].max_rel_err_vs_direct <= 1e-3, os.str()};
}

Outcome pathwise() {
  const double nu = 0.05;
  SolverConfig sc;
  sc.nu = nu;
  sc.dt.dt = 0.02;
  sc.t_end = 1.0;
  sc.box_size = 10.0;
  sc.resolution = 256;
  sc = sc.with_uniform_snapshots(50);
  const LambOseen lo{nu, 0.5};
  const auto u0 = lo.field(sc.grid(), 0.0);
  const auto ref = solve(u0, sc);
  PathwiseProbeConfig pc;
  pc.sde.nu = nu;
  pc.sde.dt = 0.01;
  pc.sde.t_end = 1.0;
  pc.sde.particles = 4096;
  pc.sde.box_size = 10.0;
  pc.sde.snapshot_times = {0.25, 0.5, 0.75, 1.0};
  pc.resolutions = {64, 128, 256};
  pc.seed_a = pc.seed_b = 7;
  const auto report = pathwise_uniqueness_probe(u0, pc, ref);
  std::ostringstream os;
  os << "sup mean gap 64/128 " << report.sup_gaps[0] << " (<= 1e-2), 128/256 " << report.sup_gaps[1]
     << ", refinement ratio " << report.refinement_ratios[0] << " (>= 1.5); shifted start gap "
     << report.shifted_gap << " vs Gronwall " << report.gronwall_bound;
  return {report.sup_gaps[0] <= 1e-2 && report.refinement_ratios[0] >= 1.5, os.str()};
}

Outcome flow_and_markov() {
  const double nu = 0.05;
  SolverConfig c;
  c.nu = nu;
  c.box_size = 20.0;
  c.resolution = 128;
  c.dt.kind = DtPolicy::Kind::kCfl;
  c.dt.dt = 0.03;
  c.dt.safety = 0.5;
  const LambOseen lo{nu, 0.5};
  const auto flow = flow_property_check(lo.field(c.grid(), 0.0), 0.0, 0.5, 1.0, c);

  SolverConfig mc;
  mc.nu = nu;
  mc.dt.dt = 0.01;
  mc.t_end = 1.0;
  mc.box_size = 6.0;
  mc.resolution = 256;
  mc = mc.with_uniform_snapshots(100);
  const auto u0 = lo.field(mc.grid(), 0.0);
  const auto ref = solve(u0, mc);
  MarkovProbeConfig pc;
  pc.nu = nu;
  pc.dt = 0.01;
  pc.particles = 100000;
  pc.seed = 3;
  const auto markov = markov_probe(u0, ref, pc);
  std::ostringstream os;
  os << "flow discrepancy " << flow.discrepancy << " (<= 2 x self-convergence " << flow.self_convergence
     << "); Markov distance/floor per bin:";
  for (std::size_t k = 0; k < markov.drift.bins.size(); ++k) {
    const auto& a = markov.drift.bins[k];
    const auto& b = markov.calibration.bins[k];
    if (a.skipped || b.skipped) {
      os << " skipped";
    } else {
      os << ' ' << a.distance << '/' << b.distance;
    }
  }
  os << " (<= 3)";
  return {flow.discrepancy <= 2.0 * flow.self_convergence && markov.pass, os.str()};
}

}  // namespace

int main() {
  log::set_level(log::Level::kWarn);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"lamb-oseen-regression", lamb_oseen_regression},
      {"decay-exponents", decay_exponents},
      {"conservation-structure", conservation},
      {"appendix-identity", appendix_identity},
      {"uniqueness-diagnostic", uniqueness},
      {"weak-form-residuals", weak_form},
      {"mckean-vlasov-representation", mckean_vlasov},
      {"treecode-performance", treecode},
      {"pathwise-uniqueness", pathwise},
      {"flow-and-markov", flow_and_markov},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = Clock::now();
    Outcome out;
    try {
      out = check();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s %s: %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", name.c_str(), out.detail.c_str(),
                seconds_since(start));
    std::fflush(stdout);
    failed += out.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

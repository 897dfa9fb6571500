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

#include "run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <future>
#include <optional>

#include "vortlab/field_io.hpp"
#include "vortlab/log.hpp"
#include "vortlab/probes.hpp"
#include "vortlab/sde.hpp"
#include "vortlab/trajectory_io.hpp"
#include "vortlab/verification.hpp"

namespace vortlab::cli {
namespace fs = std::filesystem;

namespace {

using Json = nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Files and check outcomes produced by one run.
class Run {
 public:
  Run(const ScenarioConfig& cfg, fs::path root) : cfg_(cfg), root_(std::move(root)) {}

  const ScenarioConfig& cfg() const { return cfg_; }
  const fs::path& root() const { return root_; }

  void text(const std::string& name, const std::string& content) {
    write_atomically(root_ / name, content);
    artifacts_.push_back(name);
  }

  void field(const std::string& name, const ScalarField& f, double time, const std::string& what) {
    write_field(root_ / name, f, time, what, {{"config_hash", cfg_.hash()}, {"seed", cfg_.seed}});
    artifacts_.push_back(name);
  }

  void trajectory(const std::string& dir, const Trajectory& traj, const Json& extra = {}) {
    write_trajectory(root_ / dir, traj, cfg_.solver.to_json(), extra);
    artifacts_.push_back(dir + "/" + kManifestName);
  }

  void particles(const std::string& dir, const ParticleTrajectory& traj, const SdeConfig& sde) {
    write_particle_trajectory(root_ / dir, traj, sde.to_json());
    artifacts_.push_back(dir + "/" + kManifestName);
  }

  void check(const std::string& name, Json values, Json thresholds, bool pass) {
    CheckReport r;
    r.check = name;
    r.inputs_hash = cfg_.hash();
    r.values = std::move(values);
    r.thresholds = std::move(thresholds);
    r.pass = pass;
    checks_.push_back(std::move(r));
  }

  bool pass() const {
    for (const auto& c : checks_) {
      if (!c.pass) return false;
    }
    return true;
  }

  void write_report() {
    Json checks = Json::array();
    for (const auto& c : checks_) checks.push_back(c.to_json());
    text("report.json", Json{{"schema", "vortlab.report"},
                             {"schema_version", kManifestSchemaVersion},
                             {"kind", to_string(cfg_.kind)},
                             {"config_hash", cfg_.hash()},
                             {"checks", checks},
                             {"pass", pass()}}
                            .dump(2));
  }

  void write_run_manifest(const std::string& status, double wall, const std::string& started,
                          const std::string& error = "") {
    Json m = {{"schema", "vortlab.run"},
              {"schema_version", kManifestSchemaVersion},
              {"kind", to_string(cfg_.kind)},
              {"scenario", cfg_.name},
              {"config", cfg_.to_json()},
              {"config_hash", cfg_.hash()},
              {"seed", cfg_.seed},
              {"versions", build_info()},
              {"status", status},
              {"started_at", started},
              {"wall_time_s", wall},
              {"artifacts", artifacts_}};
    if (!error.empty()) m["error"] = error;
    write_manifest(root_, m);
  }

 private:
  const ScenarioConfig& cfg_;
  fs::path root_;
  std::vector<std::string> artifacts_;
  std::vector<CheckReport> checks_;
};

void prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    bool previous_run = false;
    try {
      previous_run = read_manifest(dir).value("schema", std::string()) == "vortlab.run";
    } catch (const std::exception&) {
    }
    if (!previous_run) {
      throw IoError("refusing to write into non-empty directory " + dir.string() + " (not a previous run)");
    }
    fs::remove_all(dir, ec);
    if (ec) throw IoError("cannot clear " + dir.string() + ": " + ec.message());
  }
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

// Exact solution for Lamb-Oseen data and for a unit atom at the origin.
std::optional<LambOseen> exact_solution(const ScenarioConfig& c, double nu) {
  const auto& ic = c.initial;
  if (ic.type == InitialCondition::Type::kLambOseen) return LambOseen{nu, ic.t0};
  if (ic.type == InitialCondition::Type::kAtoms && ic.atoms.size() == 1 && ic.atoms[0].weight == 1.0 &&
      ic.atoms[0].position == Point{0.0, 0.0}) {
    return LambOseen{nu, 0.0};
  }
  return std::nullopt;
}

ScalarField initial_field(const ScenarioConfig& c, const Grid2D& g) {
  const auto& ic = c.initial;
  switch (ic.type) {
    case InitialCondition::Type::kLambOseen:
      if (!(ic.t0 > 0.0)) throw SchemaError("field 'initial.t0': a Lamb-Oseen field needs t0 > 0");
      return LambOseen{c.solver.nu, ic.t0}.field(g, 0.0);
    case InitialCondition::Type::kGaussians: {
      ScalarField u(g);
      for (const auto& b : ic.blobs) u = u + gaussian_field(g, b.center, b.variance, b.mass);
      return u;
    }
    case InitialCondition::Type::kAtoms:
      return mollify_atoms(ic.atoms, g, 4.0 * g.dx() * g.dx());
    case InitialCondition::Type::kField: {
      if (!fs::exists(ic.file)) throw MissingInput("initial field file not found: " + ic.file.string());
      auto snap = read_field(ic.file);
      if (!(snap.field.grid() == g)) {
        throw SchemaError("field 'initial.file': grid of " + ic.file.string() + " differs from the solver grid");
      }
      return std::move(snap.field);
    }
  }
  throw std::logic_error("unhandled initial condition");
}

Trajectory solve_scenario(const ScenarioConfig& c, const SolverConfig& solver) {
  if (c.initial.type == InitialCondition::Type::kAtoms) return solve_from_measure(c.initial.atoms, solver);
  return solve(initial_field(c, solver.grid()), solver);
}

ReferenceFn reference_for(const ScenarioConfig& c, double nu) {
  const auto exact = exact_solution(c, nu);
  if (!exact) return {};
  return [lo = *exact](double t, const Grid2D& g) -> std::optional<ScalarField> {
    if (!(lo.variance(t) > 0.0)) return std::nullopt;
    return lo.field(g, t);
  };
}

ParticleTrajectory simulate_scenario(const ScenarioConfig& c, const SdeConfig& sde) {
  const auto reference = reference_for(c, sde.nu);
  if (c.initial.type == InitialCondition::Type::kAtoms) return simulate(c.initial.atoms, sde, reference);
  SolverConfig on_lattice = c.solver;
  on_lattice.box_size = sde.box_size;
  on_lattice.resolution = sde.resolution;
  ScenarioConfig shifted = c;
  shifted.solver = on_lattice;
  return simulate(initial_field(shifted, sde.grid()), sde, reference);
}

std::string diagnostics_csv(const std::vector<DiagnosticRow>& rows) {
  std::string out = "time,mass,min,norm_1,norm_4/3,norm_2,norm_4,norm_inf,cfl,dt\n";
  for (const auto& r : rows) {
    out += fmt(r.time) + ',' + fmt(r.mass) + ',' + fmt(r.min);
    for (double v : r.norms) out += ',' + fmt(v);
    out += ',' + fmt(r.cfl) + ',' + fmt(r.dt) + '\n';
  }
  return out;
}

std::string particle_csv(const std::vector<ParticleDiagnostics>& rows) {
  std::string out = "time,centroid_x,centroid_y,spread,max_speed,marginal_l43,discrepancy\n";
  for (const auto& d : rows) {
    out += fmt(d.time) + ',' + fmt(d.centroid[0]) + ',' + fmt(d.centroid[1]) + ',' + fmt(d.spread) + ',' +
           fmt(d.max_speed) + ',' + fmt(d.marginal_l43) + ',' + (std::isnan(d.discrepancy) ? "" : fmt(d.discrepancy)) +
           '\n';
  }
  return out;
}

void mass_check(Run& run, const Trajectory& traj) {
  const double m0 = traj.diagnostics.front().mass;
  double drift = 0.0, min = 0.0;
  for (const auto& d : traj.diagnostics) {
    drift = std::max(drift, std::abs(d.mass - m0));
    min = std::min(min, d.min);
  }
  const double limit = 1e-10 * std::max(1.0, std::abs(m0));
  run.check("mass-conservation", {{"initial_mass", m0}, {"max_mass_drift", drift}, {"min_undershoot", min}},
            {{"max_mass_drift", limit}}, drift <= limit);
}

void spectral_run(Run& run) {
  const auto& c = run.cfg();
  Trajectory traj;
  try {
    traj = solve_scenario(c, c.solver);
  } catch (const SolverAbort& e) {
    run.trajectory("trajectory", e.partial(), {{"status", "aborted"}, {"reason", e.what()}});
    throw;
  }
  run.trajectory("trajectory", traj);
  run.text("diagnostics.csv", diagnostics_csv(traj.diagnostics));
  mass_check(run, traj);
  if (const auto exact = exact_solution(c, c.solver.nu); exact && c.max_l1_error) {
    const auto& last = traj.snapshots.back();
    const double err = lp_norm(last.field - exact->field(last.field.grid(), last.time), 1.0);
    run.check("lamb-oseen-l1", {{"time", last.time}, {"l1_error", err}}, {{"max_l1_error", *c.max_l1_error}},
              err <= *c.max_l1_error);
  }
}

void particle_run(Run& run) {
  const auto& c = run.cfg();
  const auto traj = simulate_scenario(c, c.particles);
  run.particles("particles", traj, c.particles);
  run.text("diagnostics.csv", particle_csv(traj.diagnostics));
  const auto& last = traj.diagnostics.back();
  Json values = {{"time", last.time},
                 {"centroid", {last.centroid[0], last.centroid[1]}},
                 {"spread", last.spread},
                 {"discrepancy", std::isnan(last.discrepancy) ? Json() : Json(last.discrepancy)},
                 {"metadata", traj.metadata}};
  if (c.max_discrepancy) {
    const bool pass = !std::isnan(last.discrepancy) && last.discrepancy <= *c.max_discrepancy;
    run.check("kde-discrepancy", values, {{"max_discrepancy", *c.max_discrepancy}}, pass);
  } else {
    run.check("particle-summary", values, Json::object(), true);
  }
}

void verify_weak(Run& run) {
  const auto& c = run.cfg();
  const auto traj = solve_scenario(c, c.solver);
  run.trajectory("trajectory", traj);
  const double horizon = c.weak.horizon > 0.0 ? c.weak.horizon : c.solver.t_end;
  const auto bank = standard_bank(horizon, c.weak.base_radius);
  const auto& u0 = traj.snapshots.front().field;
  const auto nonlinear = weak_residual(traj, u0, bank, c.solver.nu);
  std::string csv = "equation,label,residual,normalized,quadrature_points,noise_floor\n";
  const auto rows = [&csv](const char* eq, const ResidualReport& r) {
    for (const auto& m : r.members) {
      csv += std::string(eq) + ',' + m.label + ',' + fmt(m.residual) + ',' + fmt(m.normalized) + ',' +
             std::to_string(m.quadrature_points) + ',' + fmt(m.noise_floor) + '\n';
    }
  };
  rows("nonlinear", nonlinear);
  run.check("weak-residual", {{"max_normalized", nonlinear.max_normalized}, {"max_noise_floor", nonlinear.max_noise_floor}},
            {{"max_normalized", c.weak.max_normalized}}, nonlinear.max_normalized <= c.weak.max_normalized);
  if (c.weak.linearized) {
    const auto v = solve_linearized(u0, traj, c.solver);
    const auto linear = linearized_weak_residual(v, traj, bank, c.solver.nu);
    rows("linearized", linear);
    run.check("linearized-weak-residual",
              {{"max_normalized", linear.max_normalized}, {"max_noise_floor", linear.max_noise_floor}},
              {{"max_normalized", c.weak.max_normalized}}, linear.max_normalized <= c.weak.max_normalized);
  }
  run.text("residuals.csv", csv);
}

void verify_uniqueness(Run& run) {
  const auto& c = run.cfg();
  std::vector<Trajectory> runs;
  for (int n : c.uniqueness.resolutions) {
    SolverConfig s = c.solver;
    s.resolution = n;
    runs.push_back(solve_scenario(c, s));
  }
  std::string csv = "coarse_n,fine_n,eps,time,h,h_decomposed,kz_norm,hm1_norm,envelope\n";
  double decomposition = 0.0, min_h = 0.0;
  std::vector<double> ratio_h;
  Json pairs = Json::array();
  for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
    const auto fine = restrict_trajectory(runs[k + 1], runs[k].grid());
    for (double eps : c.uniqueness.eps) {
      const auto series = uniqueness_functional(runs[k], fine, eps);
      for (std::size_t s = 0; s < series.times.size(); ++s) {
        csv += std::to_string(runs[k].grid().n()) + ',' + std::to_string(runs[k + 1].grid().n()) + ',' + fmt(eps) +
               ',' + fmt(series.times[s]) + ',' + fmt(series.h[s]) + ',' + fmt(series.h_decomposed[s]) + ',' +
               fmt(series.kz_norm[s]) + ',' + fmt(series.hm1_norm[s]) + ',' + fmt(series.envelope[s]) + '\n';
        min_h = std::min(min_h, series.h[s]);
      }
      decomposition = std::max(decomposition, series.max_decomposition_error);
      if (eps == c.uniqueness.ratio_eps) ratio_h.push_back(series.max_h);
      pairs.push_back({{"coarse_n", runs[k].grid().n()},
                       {"eps", eps},
                       {"max_h", series.max_h},
                       {"gronwall_constant", series.gronwall_constant},
                       {"envelope_dominates", series.envelope_dominates}});
    }
  }
  run.text("uniqueness.csv", csv);
  run.check("uniqueness-functional", {{"min_h", min_h}, {"max_decomposition_error", decomposition}, {"pairs", pairs}},
            {{"min_h", 0.0}, {"max_decomposition_error", 1e-10}}, min_h >= 0.0 && decomposition <= 1e-10);
  std::vector<double> ratios;
  for (std::size_t k = 0; k + 1 < ratio_h.size(); ++k) ratios.push_back(ratio_h[k] / ratio_h[k + 1]);
  if (!ratios.empty()) {
    const bool pass = std::all_of(ratios.begin(), ratios.end(), [&](double r) { return r >= c.uniqueness.min_ratio; });
    run.check("uniqueness-refinement", {{"eps", c.uniqueness.ratio_eps}, {"max_h", ratio_h}, {"ratios", ratios}},
              {{"min_ratio", c.uniqueness.min_ratio}}, pass);
  }
}

void flow_check(Run& run) {
  const auto& c = run.cfg();
  const auto u0 = initial_field(c, c.solver.grid());
  const auto& f = c.flow;
  const auto result = flow_property_check(u0, f.s, f.r, f.t, c.solver);
  run.field("continuous.vlf", result.continuous, f.t, "continuous");
  run.field("restarted.vlf", result.restarted, f.t, "restarted");
  run.check("flow-property",
            {{"discrepancy", result.discrepancy}, {"self_convergence", result.self_convergence},
             {"s", f.s}, {"r", f.r}, {"t", f.t}},
            {{"max_discrepancy", f.factor * result.self_convergence}, {"factor", f.factor}},
            result.discrepancy <= f.factor * result.self_convergence);
}

void markov(Run& run) {
  const auto& c = run.cfg();
  const auto& m = c.markov;
  SolverConfig s = c.solver;
  s.t_end = m.t;
  s = s.with_uniform_snapshots(m.reference_snapshots);
  const auto u0 = initial_field(c, s.grid());
  const auto reference = solve(u0, s);
  MarkovProbeConfig pc;
  pc.nu = c.solver.nu;
  pc.dt = m.dt;
  pc.r = m.r;
  pc.t = m.t;
  pc.particles = m.particles;
  pc.seed = c.seed;
  pc.bin_radius_factor = m.bin_radius_factor;
  pc.coarse_bins = m.coarse_bins;
  pc.min_population = m.min_population;
  const auto report = markov_probe(u0, reference, pc);
  run.check("markov-property", report.to_json(), {{"factor", report.factor}}, report.pass);
}

void kernel_bench_kind(Run& run) {
  const auto& c = run.cfg();
  std::vector<KernelBenchRow> rows;
  double worst = 0.0;
  for (std::size_t n : c.bench.sizes) {
    const auto r = kernel_bench(n, c.seed, c.particles.tree, c.bench.direct_targets);
    for (const auto& row : r) {
      if (row.method != "direct") worst = std::max(worst, row.max_rel_err_vs_direct);
    }
    rows.insert(rows.end(), r.begin(), r.end());
  }
  run.text("bench.csv", bench_csv(rows));
  Json table = Json::array();
  for (const auto& r : rows) {
    table.push_back({{"N", r.n}, {"method", r.method}, {"wall_ms", r.wall_ms},
                     {"max_rel_err_vs_direct", r.max_rel_err_vs_direct}, {"timed_targets", r.timed_targets}});
  }
  run.check("treecode-accuracy", {{"max_rel_err_vs_direct", worst}, {"rows", table}},
            {{"max_rel_err_vs_direct", c.bench.max_rel_err}}, worst <= c.bench.max_rel_err);
}

struct Level {
  double h = 0.0;
  double error = 0.0;
};

// Runs fn(0..count-1) with at most `jobs` in flight; results in level order.
template <class Fn>
auto in_parallel(int count, int jobs, Fn fn) {
  using R = decltype(fn(0));
  std::vector<R> out;
  for (int start = 0; start < count; start += jobs) {
    std::vector<std::future<R>> batch;
    for (int k = start; k < std::min(count, start + jobs); ++k) batch.push_back(std::async(std::launch::async, fn, k));
    for (auto& f : batch) out.push_back(f.get());
  }
  return out;
}

void convergence_study(Run& run, int jobs) {
  const auto& c = run.cfg();
  const int levels = c.convergence.levels;
  std::vector<Level> table;
  std::string measure;
  std::optional<double> finest;  // reference level of a self-convergence study
  if (c.convergence.parameter == ConvergenceOptions::Parameter::kResolution) {
    measure = "L2 difference to the next finer level at t_end";
    const auto finals = in_parallel(levels, jobs, [&c](int k) {
      SolverConfig s = c.solver;
      s.resolution = c.solver.resolution << k;
      s.dt.dt = c.solver.dt.dt / (1 << k);
      s.snapshot_times = {s.t_end};
      return solve_scenario(c, s).snapshots.back().field;
    });
    for (int k = 0; k + 1 < levels; ++k) {
      const auto& coarse = finals[k];
      table.push_back({coarse.grid().dx(), lp_norm(coarse - resample(finals[k + 1], coarse.grid()), 2.0)});
    }
    finest = finals.back().grid().dx();
  } else {
    measure = "L1 distance of the KDE marginal to the exact solution at t_end";
    const auto errors = in_parallel(levels, jobs, [&c](int k) {
      SdeConfig s = c.particles;
      s.particles = c.particles.particles << (2 * k);
      s.snapshot_times = {s.t_end};
      return simulate_scenario(c, s).diagnostics.back().discrepancy;
    });
    for (int k = 0; k < levels; ++k) {
      const double n = static_cast<double>(c.particles.particles << (2 * k));
      table.push_back({1.0 / std::sqrt(n), errors[k]});
    }
  }
  std::string csv = "level,h,error,order,flag\n";
  std::vector<double> orders;
  std::vector<int> non_monotone;
  for (std::size_t k = 0; k < table.size(); ++k) {
    std::string order, flag;
    if (k > 0) {
      const double p = std::log(table[k - 1].error / table[k].error) / std::log(table[k - 1].h / table[k].h);
      orders.push_back(p);
      order = fmt(p);
      if (!(table[k].error < table[k - 1].error)) {
        flag = "non-monotone";
        non_monotone.push_back(static_cast<int>(k));
        log::warn("convergence study: error did not decrease at level " + std::to_string(k));
      }
    }
    csv += std::to_string(k) + ',' + fmt(table[k].h) + ',' + fmt(table[k].error) + ',' + order + ',' + flag + '\n';
  }
  if (finest) csv += std::to_string(table.size()) + ',' + fmt(*finest) + ",,,reference\n";
  run.text("convergence.csv", csv);
  Json errors = Json::array(), hs = Json::array();
  for (const auto& l : table) {
    hs.push_back(l.h);
    errors.push_back(l.error);
  }
  const double min_order = c.convergence.min_order;
  const bool pass =
      min_order <= 0.0 || (!orders.empty() && std::all_of(orders.begin(), orders.end(),
                                                           [min_order](double p) { return p >= min_order; }));
  run.check("convergence-order",
            {{"measure", measure}, {"h", hs}, {"error", errors}, {"order", orders}, {"non_monotone_levels", non_monotone}},
            {{"min_order", min_order}}, pass);
}

}  // namespace

fs::path default_output_dir(const ScenarioConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  const char* root = std::getenv("VORTLAB_OUTPUT_ROOT");
  const fs::path base = root != nullptr && *root != '\0' ? fs::path(root) : fs::path("runs");
  return base / (cfg.name.empty() ? to_string(cfg.kind) : cfg.name);
}

std::string bench_csv(const std::vector<KernelBenchRow>& rows) {
  std::string out = "N,method,wall_ms,max_rel_err_vs_direct\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + ',' + r.method + ',' + fmt(r.wall_ms) + ',' + fmt(r.max_rel_err_vs_direct) + '\n';
  }
  return out;
}

RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
  RunResult result;
  result.output_dir = options.output_dir.empty() ? default_output_dir(cfg) : options.output_dir;
  try {
    prepare_output_dir(result.output_dir);
  } catch (const fs::filesystem_error& e) {
    throw IoError(e.what());
  }
  Run run(cfg, result.output_dir);
  const auto started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  run.text("scenario.json", cfg.to_json().dump(2));
  try {
    switch (cfg.kind) {
      case ScenarioKind::kSpectralRun: spectral_run(run); break;
      case ScenarioKind::kParticleRun: particle_run(run); break;
      case ScenarioKind::kVerifyWeak: verify_weak(run); break;
      case ScenarioKind::kVerifyUniqueness: verify_uniqueness(run); break;
      case ScenarioKind::kFlowCheck: flow_check(run); break;
      case ScenarioKind::kMarkovProbe: markov(run); break;
      case ScenarioKind::kKernelBench: kernel_bench_kind(run); break;
      case ScenarioKind::kConvergenceStudy: convergence_study(run, std::max(1, options.jobs)); break;
    }
  } catch (const std::exception& e) {
    try {
      run.write_run_manifest("aborted", elapsed(), started, e.what());
    } catch (const std::exception&) {
    }
    throw;
  }
  try {
    run.write_report();
    result.pass = run.pass();
    run.write_run_manifest(result.pass ? "passed" : "failed", elapsed(), started);
    if (options.check_outputs) result.output_problems = check_outputs(result.output_dir);
  } catch (const fs::filesystem_error& e) {
    throw IoError(e.what());
  }
  return result;
}

}  // namespace vortlab::cli

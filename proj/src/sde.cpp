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

#include "vortlab/sde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "vortlab/biot_savart.hpp"
#include "vortlab/field_io.hpp"
#include "vortlab/rng.hpp"

namespace vortlab {

// --- config ---------------------------------------------------------------

void SdeConfig::validate() const {
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw std::invalid_argument("nu: must be >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt: must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end: must be >= 0");
  if (delta < 0.0) throw std::invalid_argument("delta: must be >= 0 (0 selects the default)");
  if (bandwidth < 0.0) throw std::invalid_argument("bandwidth: must be >= 0 (0 selects the default)");
  if (!(tree.theta > 0.0 && tree.theta <= 1.0)) throw std::invalid_argument("theta: must be in (0, 1]");
  if (tree.order < 0 || tree.leaf_capacity < 1) throw std::invalid_argument("tree: invalid order or leaf capacity");
  if (particles == 0) throw std::invalid_argument("particles: must be positive");
  for (std::size_t k = 0; k < snapshot_times.size(); ++k) {
    const double t = snapshot_times[k];
    if (!(t >= 0.0 && t <= t_end)) throw std::invalid_argument("snapshot_times: outside [0, t_end]");
    if (k > 0 && !(t > snapshot_times[k - 1])) {
      throw std::invalid_argument("snapshot_times: must be strictly increasing");
    }
  }
  (void)grid();
}

nlohmann::json SdeConfig::to_json() const {
  return {
      {"nu", nu},
      {"dt", dt},
      {"dt_policy", dt_policy == DtPolicy::Kind::kCfl ? "cfl" : "fixed"},
      {"t_end", t_end},
      {"drift", to_string(method)},
      {"delta", delta},
      {"theta", tree.theta},
      {"order", tree.order},
      {"leaf_capacity", tree.leaf_capacity},
      {"box_size", box_size},
      {"resolution", resolution},
      {"bandwidth", bandwidth},
      {"snapshot_times", snapshot_times},
      {"seed", seed},
      {"particles", particles},
  };
}

SdeConfig SdeConfig::from_json(const nlohmann::json& j) {
  SdeConfig c;
  c.nu = j.at("nu").get<double>();
  c.dt = j.at("dt").get<double>();
  const auto policy = j.value("dt_policy", std::string("cfl"));
  if (policy != "cfl" && policy != "fixed") throw std::invalid_argument("dt_policy: expected 'fixed' or 'cfl'");
  c.dt_policy = policy == "cfl" ? DtPolicy::Kind::kCfl : DtPolicy::Kind::kFixed;
  c.t_end = j.at("t_end").get<double>();
  c.method = parse_drift_method(j.value("drift", std::string("treecode")));
  c.delta = j.value("delta", 0.0);
  c.tree.theta = j.value("theta", c.tree.theta);
  c.tree.order = j.value("order", c.tree.order);
  c.tree.leaf_capacity = j.value("leaf_capacity", c.tree.leaf_capacity);
  c.box_size = j.value("box_size", c.box_size);
  c.resolution = j.value("resolution", c.resolution);
  c.bandwidth = j.value("bandwidth", 0.0);
  c.snapshot_times = j.value("snapshot_times", std::vector<double>{});
  c.seed = j.value("seed", std::uint64_t{0});
  c.particles = j.value("particles", std::size_t{4096});
  c.validate();
  return c;
}

std::string SdeConfig::hash() const { return hex64(fnv1a(to_json().dump())); }

SdeConfig SdeConfig::resolved(const ParticleEnsemble& initial) const {
  SdeConfig c = *this;
  const double s0 = initial.spread();
  const double sigma = std::sqrt(s0 * s0 + 2.0 * nu * t_end);
  const std::size_t n = initial.size();
  if (c.delta == 0.0) c.delta = default_blob_length(4.0 * sigma, n);
  if (c.bandwidth == 0.0) c.bandwidth = silverman_bandwidth(sigma, n);
  if (!(c.bandwidth > 0.0) ||
      (!(c.delta > 0.0) && method != DriftMethod::kGrid)) {
    throw std::invalid_argument(
        "cannot derive default blob length / bandwidth from a degenerate ensemble; set them explicitly");
  }
  return c;
}

PointVelocityOptions SdeConfig::drift_options() const {
  PointVelocityOptions o;
  o.method = method;
  o.delta = delta;
  o.tree = tree;
  if (method == DriftMethod::kGrid) {
    o.grid = grid();
    o.bandwidth = bandwidth;
  }
  return o;
}

// --- stepping -------------------------------------------------------------

ParticleEnsemble advance(const ParticleEnsemble& ens, std::span<const Point> drift, double dt,
                         double nu) {
  if (drift.size() != ens.size()) throw std::invalid_argument("advance: drift size mismatch");
  ParticleEnsemble out = ens;
  const double scale = std::sqrt(2.0 * nu * dt);
  const ParticleStreams streams(ens.seed);
  for (std::size_t p = 0; p < ens.size(); ++p) {
    double x = ens.positions[p][0] + drift[p][0] * dt;
    double y = ens.positions[p][1] + drift[p][1] * dt;
    if (scale > 0.0) {
      const auto g = streams.normals(p, ens.step);
      x += scale * g[0];
      y += scale * g[1];
    }
    out.positions[p] = {x, y};
  }
  out.time = ens.time + dt;
  out.step = ens.step + 1;
  return out;
}

namespace {

double max_speed(std::span<const Point> v) {
  double s2 = 0.0;
  for (const auto& p : v) s2 = std::max(s2, p[0] * p[0] + p[1] * p[1]);
  return std::sqrt(s2);
}

int substeps(double span, double dt_max) {
  return std::max(1, static_cast<int>(std::ceil(span / dt_max - 1e-9)));
}

double admissible_step(const SdeConfig& cfg, double speed) {
  if (speed == 0.0) return std::numeric_limits<double>::infinity();
  const double length = cfg.method == DriftMethod::kGrid ? cfg.grid().dx() : cfg.delta;
  return length / speed;
}

struct StepResult {
  ParticleEnsemble ensemble;
  double speed;
};

// Steps towards `target` with at most cfg.dt, landing exactly on it. Under
// the CFL policy the step is also capped at the admissible one.
StepResult checked_em_step(const ParticleEnsemble& ens, const SdeConfig& cfg, double target) {
  const auto drift = velocity_at_sources(ens.positions, ens.weights(), cfg.drift_options());
  const double speed = max_speed(drift);
  const double limit = admissible_step(cfg, speed);
  double dt_max = cfg.dt;
  if (cfg.dt_policy == DtPolicy::Kind::kCfl) dt_max = std::min(dt_max, limit);
  const int steps = substeps(target - ens.time, dt_max);
  const double dt = (target - ens.time) / steps;
  if (dt > limit * (1.0 + 1e-12)) throw CflViolation(dt, limit);
  StepResult out{advance(ens, drift, dt, cfg.nu), speed};
  if (steps == 1) out.ensemble.time = target;
  return out;
}

std::vector<double> targets_after(double t0, const std::vector<double>& snaps, double t_end) {
  std::vector<double> out;
  for (double t : snaps) {
    if (t > t0) out.push_back(t);
  }
  if (t_end > t0 && (out.empty() || out.back() < t_end)) out.push_back(t_end);
  return out;
}

}  // namespace

ParticleEnsemble em_step(const ParticleEnsemble& ens, const SdeConfig& cfg) {
  cfg.validate();
  ens.validate();
  const bool needs_default = cfg.method == DriftMethod::kGrid ? cfg.bandwidth == 0.0 : cfg.delta == 0.0;
  const SdeConfig run = needs_default ? cfg.resolved(ens) : cfg;
  const auto drift = velocity_at_sources(ens.positions, ens.weights(), run.drift_options());
  const double limit = admissible_step(run, max_speed(drift));
  if (cfg.dt > limit * (1.0 + 1e-12)) throw CflViolation(cfg.dt, limit);
  return advance(ens, drift, cfg.dt, cfg.nu);
}

ParticleTrajectory simulate(const ParticleEnsemble& initial, const SdeConfig& cfg,
                            const ReferenceFn& reference) {
  cfg.validate();
  initial.validate();
  const SdeConfig run = cfg.resolved(initial);
  const Grid2D grid = run.grid();

  ParticleTrajectory traj;
  traj.config_hash = cfg.hash();
  traj.metadata = {{"delta", run.delta},
                   {"bandwidth", run.bandwidth},
                   {"drift", to_string(run.method)},
                   {"particles", initial.size()},
                   {"seed", initial.seed}};

  double last_speed = 0.0;
  auto record = [&](const ParticleEnsemble& ens) {
    ScalarField marginal = marginal_density(ens, grid, run.bandwidth);
    ParticleDiagnostics d;
    d.time = ens.time;
    d.centroid = ens.centroid();
    d.spread = ens.spread();
    d.max_speed = last_speed;
    d.marginal_l43 = lp_norm(marginal, 4.0 / 3.0);
    if (reference) {
      if (const auto ref = reference(ens.time, grid)) d.discrepancy = lp_norm(marginal - *ref, 1.0);
    }
    traj.diagnostics.push_back(d);
    traj.snapshots.push_back({ens.time, ens, std::move(marginal)});
  };

  ParticleEnsemble ens = initial;
  record(ens);
  for (double target : targets_after(ens.time, run.snapshot_times, run.t_end)) {
    while (ens.time < target) {
      auto result = checked_em_step(ens, run, target);
      ens = std::move(result.ensemble);
      last_speed = result.speed;
    }
    record(ens);
  }
  return traj;
}

ParticleTrajectory simulate(const ScalarField& u0, const SdeConfig& cfg, const ReferenceFn& reference) {
  return simulate(sample_initial(u0, cfg.particles, cfg.seed), cfg, reference);
}

ParticleTrajectory simulate(std::span<const Atom> atoms, const SdeConfig& cfg,
                            const ReferenceFn& reference) {
  return simulate(sample_initial(atoms, cfg.particles, cfg.seed), cfg, reference);
}

VelocityField velocity_representation(const ParticleEnsemble& ens, const Grid2D& grid,
                                      double bandwidth) {
  return biot_savart_field(marginal_density(ens, grid, bandwidth));
}

VelocityField velocity_representation(const ScalarField& density) {
  return biot_savart_field(density);
}

// --- frozen drift ---------------------------------------------------------

TrajectoryDrift::TrajectoryDrift(const Trajectory& reference, Grid2D grid)
    : reference_(&reference), grid_(grid) {
  if (reference.snapshots.empty()) throw std::invalid_argument("drift: empty reference trajectory");
  if (reference.grid().box_size() != grid.box_size()) {
    throw std::invalid_argument("drift: reference and drift grids differ in box size");
  }
}

std::vector<Point> TrajectoryDrift::operator()(double t, std::span<const Point> points) const {
  const ScalarField u = resample(reference_->at(t), grid_);
  const auto v = u.values();
  double mass = 0.0, cx = 0.0, cy = 0.0;
  for (int j = 0; j < grid_.n(); ++j) {
    for (int i = 0; i < grid_.n(); ++i) {
      const double w = v[grid_.index(i, j)];
      mass += w;
      cx += w * grid_.coord(i);
      cy += w * grid_.coord(j);
    }
  }
  const Point centroid = mass != 0.0 ? Point{cx / mass, cy / mass} : Point{0.0, 0.0};
  return interpolate_velocity(biot_savart_field(u), points, mass * grid_.cell_area(), centroid);
}

std::vector<ParticleEnsemble> evolve_in_drift(const ParticleEnsemble& ens, double nu, double dt,
                                              const ExternalDrift& drift,
                                              std::span<const double> times) {
  if (!(dt > 0.0)) throw std::invalid_argument("evolve_in_drift: dt must be positive");
  if (!(nu >= 0.0)) throw std::invalid_argument("evolve_in_drift: nu must be >= 0");
  std::vector<ParticleEnsemble> out;
  ParticleEnsemble cur = ens;
  for (double target : times) {
    if (target < cur.time) throw std::invalid_argument("evolve_in_drift: times must be sorted");
    while (cur.time < target) {
      const int steps = substeps(target - cur.time, dt);
      const double h = (target - cur.time) / steps;
      const auto b = drift(cur.time, cur.positions);
      cur = advance(cur, b, h, nu);
      if (steps == 1) cur.time = target;
    }
    out.push_back(cur);
  }
  return out;
}

// --- pathwise uniqueness ----------------------------------------------------

nlohmann::json PathwiseProbeReport::to_json() const {
  return {{"times", times},
          {"gaps", gaps},
          {"sup_gaps", sup_gaps},
          {"refinement_ratios", refinement_ratios},
          {"shifted_gap", shifted_gap},
          {"lipschitz", lipschitz},
          {"gronwall_bound", gronwall_bound}};
}

namespace {

double mean_gap(const ParticleEnsemble& a, const ParticleEnsemble& b) {
  double s = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    s += std::hypot(a.positions[p][0] - b.positions[p][0], a.positions[p][1] - b.positions[p][1]);
  }
  return s / static_cast<double>(a.size());
}

}  // namespace

PathwiseProbeReport pathwise_uniqueness_probe(const ScalarField& u0, const PathwiseProbeConfig& cfg,
                                              const Trajectory& reference) {
  if (cfg.seed_a != cfg.seed_b) {
    throw std::invalid_argument("pathwise probe: both systems must share one seed");
  }
  if (cfg.resolutions.size() < 2) throw std::invalid_argument("pathwise probe: need >= 2 drift resolutions");
  for (std::size_t k = 1; k < cfg.resolutions.size(); ++k) {
    if (cfg.resolutions[k] != 2 * cfg.resolutions[k - 1]) {
      throw std::invalid_argument("pathwise probe: each resolution must double the previous");
    }
  }
  const SdeConfig& sde = cfg.sde;
  sde.validate();
  if (reference.snapshots.back().time < sde.t_end * (1.0 - 1e-12)) {
    throw std::invalid_argument("pathwise probe: reference does not cover [0, t_end]");
  }

  PathwiseProbeReport report;
  report.times = sde.snapshot_times;
  if (report.times.empty() || report.times.back() < sde.t_end) report.times.push_back(sde.t_end);

  const ParticleEnsemble start = sample_initial(u0, sde.particles, cfg.seed_a);
  const double box = reference.grid().box_size();
  std::vector<std::vector<ParticleEnsemble>> runs;
  for (int n : cfg.resolutions) {
    const TrajectoryDrift drift(reference, Grid2D(box, n));
    runs.push_back(evolve_in_drift(start, sde.nu, sde.dt, std::cref(drift), report.times));
  }
  for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
    std::vector<double> row;
    for (std::size_t s = 0; s < report.times.size(); ++s) row.push_back(mean_gap(runs[k][s], runs[k + 1][s]));
    report.sup_gaps.push_back(*std::max_element(row.begin(), row.end()));
    report.gaps.push_back(std::move(row));
  }
  for (std::size_t k = 0; k + 1 < report.sup_gaps.size(); ++k) {
    report.refinement_ratios.push_back(report.sup_gaps[k] / report.sup_gaps[k + 1]);
  }

  // Perturbed start under the finest drift, same noise.
  ParticleEnsemble shifted = start;
  for (auto& p : shifted.positions) p[0] += cfg.initial_shift;
  const TrajectoryDrift finest(reference, Grid2D(box, cfg.resolutions.back()));
  const std::vector<double> last = {sde.t_end};
  const auto moved = evolve_in_drift(shifted, sde.nu, sde.dt, std::cref(finest), last);
  report.shifted_gap = mean_gap(moved.back(), runs.back().back());

  for (const auto& s : reference.snapshots) {
    if (s.time > sde.t_end * (1.0 + 1e-12)) break;
    const TensorField grad = gradient_velocity(s.field);
    for (std::size_t p = 0; p < grad.grid.size(); ++p) {
      double f2 = 0.0;
      for (const auto& c : grad.c) f2 += c[p] * c[p];
      report.lipschitz = std::max(report.lipschitz, std::sqrt(f2));
    }
  }
  report.gronwall_bound = cfg.initial_shift * std::exp(report.lipschitz * sde.t_end);
  return report;
}

}  // namespace vortlab

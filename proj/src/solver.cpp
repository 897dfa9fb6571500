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

#include "vortlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vortlab/biot_savart.hpp"
#include "vortlab/field_io.hpp"
#include "vortlab/log.hpp"

namespace vortlab {

// --- config ---------------------------------------------------------------

void SolverConfig::validate() const {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw std::invalid_argument("nu: viscosity must be positive");
  if (!(dt.dt > 0.0) || !std::isfinite(dt.dt)) throw std::invalid_argument("dt: must be positive");
  if (!(dt.safety > 0.0)) throw std::invalid_argument("dt.safety: must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end: must be >= 0");
  if (!(blowup_factor > 1.0)) throw std::invalid_argument("blowup_factor: must exceed 1");
  for (std::size_t k = 0; k < snapshot_times.size(); ++k) {
    const double t = snapshot_times[k];
    if (!(t >= 0.0 && t <= t_end)) throw std::invalid_argument("snapshot_times: outside [0, t_end]");
    if (k > 0 && !(t > snapshot_times[k - 1])) {
      throw std::invalid_argument("snapshot_times: must be strictly increasing");
    }
  }
  (void)grid();  // validates box_size and resolution
}

nlohmann::json SolverConfig::to_json() const {
  return {
      {"nu", nu},
      {"dt", {{"policy", dt.kind == DtPolicy::Kind::kFixed ? "fixed" : "cfl"},
              {"dt", dt.dt},
              {"safety", dt.safety}}},
      {"t_end", t_end},
      {"snapshot_times", snapshot_times},
      {"dealias", dealias},
      {"box_size", box_size},
      {"resolution", resolution},
      {"blowup_factor", blowup_factor},
  };
}

SolverConfig SolverConfig::from_json(const nlohmann::json& j) {
  SolverConfig c;
  c.nu = j.at("nu").get<double>();
  const auto& d = j.at("dt");
  const auto policy = d.value("policy", std::string("fixed"));
  if (policy == "fixed") {
    c.dt.kind = DtPolicy::Kind::kFixed;
  } else if (policy == "cfl") {
    c.dt.kind = DtPolicy::Kind::kCfl;
  } else {
    throw std::invalid_argument("dt.policy: expected 'fixed' or 'cfl'");
  }
  c.dt.dt = d.at("dt").get<double>();
  c.dt.safety = d.value("safety", 0.5);
  c.t_end = j.at("t_end").get<double>();
  c.snapshot_times = j.value("snapshot_times", std::vector<double>{});
  c.dealias = j.value("dealias", true);
  c.box_size = j.at("box_size").get<double>();
  c.resolution = j.at("resolution").get<int>();
  c.blowup_factor = j.value("blowup_factor", 10.0);
  c.validate();
  return c;
}

std::string SolverConfig::hash() const { return hex64(fnv1a(to_json().dump())); }

SolverConfig SolverConfig::with_uniform_snapshots(int count) const {
  if (count < 1) throw std::invalid_argument("snapshot count must be >= 1");
  SolverConfig c = *this;
  c.snapshot_times.clear();
  for (int k = 1; k <= count; ++k) c.snapshot_times.push_back(t_end * k / count);
  return c;
}

CflViolation::CflViolation(double requested, double admissible)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "CFL violation: dt = " << requested << " exceeds admissible dt = " << admissible;
        return os.str();
      }()),
      requested_(requested),
      admissible_(admissible) {}

// --- trajectory -----------------------------------------------------------

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  t.reserve(snapshots.size());
  for (const auto& s : snapshots) t.push_back(s.time);
  return t;
}

const ScalarField* Trajectory::find(double t) const {
  for (const auto& s : snapshots) {
    if (std::abs(s.time - t) <= 1e-12 * std::max(1.0, std::abs(t))) return &s.field;
  }
  return nullptr;
}

ScalarField Trajectory::at(double t) const {
  if (snapshots.empty()) throw std::logic_error("trajectory: empty");
  if (const auto* f = find(t)) return *f;
  if (t < snapshots.front().time || t > snapshots.back().time) {
    throw std::out_of_range("trajectory: time outside the recorded range");
  }
  auto hi = std::upper_bound(snapshots.begin(), snapshots.end(), t,
                             [](double v, const Snapshot& s) { return v < s.time; });
  auto lo = hi - 1;
  const double a = (t - lo->time) / (hi->time - lo->time);
  return lo->field * (1.0 - a) + hi->field * a;
}

// --- stepping -------------------------------------------------------------

namespace {

// Half-spectrum layout: n rows (x2 wavenumber) by n/2 + 1 columns (x1).
struct HalfModes {
  int n;
  int w;
  std::vector<double> xi1;  // per column
  std::vector<double> xi2;  // per row
  std::vector<char> keep;   // 2/3 mask, per mode

  HalfModes(const Grid2D& g, bool dealias) : n(g.n()), w(fft::half_width(g.n())) {
    xi1.resize(w);
    xi2.resize(n);
    for (int k = 0; k < w; ++k) xi1[k] = g.is_nyquist(k) ? 0.0 : g.wavenumber(k);
    for (int l = 0; l < n; ++l) xi2[l] = g.is_nyquist(l) ? 0.0 : g.wavenumber(l);
    keep.assign(static_cast<std::size_t>(n) * w, 1);
    if (dealias) {
      const int cutoff = n / 3;
      for (int l = 0; l < n; ++l) {
        for (int k = 0; k < w; ++k) {
          if (k > cutoff || std::abs(fft::signed_index(l, n)) > cutoff) keep[l * w + k] = 0;
        }
      }
    }
  }

  std::vector<double> heat_factor(const Grid2D& g, double nu, double dt) const {
    std::vector<double> e(static_cast<std::size_t>(n) * w);
    for (int l = 0; l < n; ++l) {
      const double b = g.wavenumber(l);
      for (int k = 0; k < w; ++k) {
        const double a = g.wavenumber(k);
        e[l * w + k] = std::exp(-nu * dt * (a * a + b * b));
      }
    }
    return e;
  }
};

// -div(y u) in half-spectrum form.
std::vector<cplx> transport(std::span<const double> u, const VelocityField& y, const HalfModes& m) {
  const std::size_t size = u.size();
  std::vector<double> f1(size), f2(size);
  for (std::size_t p = 0; p < size; ++p) {
    f1[p] = y.c1[p] * u[p];
    f2[p] = y.c2[p] * u[p];
  }
  const auto s1 = fft::forward_r2c(f1, m.n);
  const auto s2 = fft::forward_r2c(f2, m.n);
  std::vector<cplx> out(s1.size());
  for (int l = 0; l < m.n; ++l) {
    for (int k = 0; k < m.w; ++k) {
      const std::size_t idx = static_cast<std::size_t>(l) * m.w + k;
      if (!m.keep[idx]) continue;
      out[idx] = -cplx(0.0, 1.0) * (m.xi1[k] * s1[idx] + m.xi2[l] * s2[idx]);
    }
  }
  return out;
}

double admissible_dt(const VelocityField& y, const DtPolicy& policy) {
  const double speed = y.max_speed();
  if (speed == 0.0) return std::numeric_limits<double>::infinity();
  return policy.safety * y.grid.dx() / speed;
}

// One Heun step with drifts supplied per stage: drift0 for u, drift1(u*) for the
// predictor. Returns the new physical values.
template <class Drift1>
std::vector<double> heun_step(const ScalarField& u, const VelocityField& y0, Drift1&& drift1,
                              double dt, double nu, const HalfModes& m) {
  const Grid2D& g = u.grid();
  const auto e = m.heat_factor(g, nu, dt);
  const auto u_hat = fft::forward_r2c(u.values(), g.n());
  const auto n0 = transport(u.values(), y0, m);

  std::vector<cplx> pred(u_hat.size());
  for (std::size_t k = 0; k < pred.size(); ++k) pred[k] = e[k] * (u_hat[k] + dt * n0[k]);
  const auto u_star = fft::inverse_c2r(pred, g.n());
  const VelocityField y1 = drift1(u_star);
  const auto n1 = transport(u_star, y1, m);

  std::vector<cplx> next(u_hat.size());
  for (std::size_t k = 0; k < next.size(); ++k) {
    next[k] = e[k] * u_hat[k] + 0.5 * dt * (e[k] * n0[k] + n1[k]);
  }
  return fft::inverse_c2r(next, g.n());
}

ScalarField checked_step(const ScalarField& u, const VelocityField& y0, double dt,
                         const SolverConfig& cfg, const HalfModes& m) {
  const double limit = admissible_dt(y0, cfg.dt);
  if (dt > limit * (1.0 + 1e-12)) throw CflViolation(dt, limit);
  if (u.max_abs() == 0.0) return ScalarField(u.grid());
  auto drift1 = [&](const std::vector<double>& v) {
    return biot_savart_field(ScalarField(u.grid(), v));
  };
  return ScalarField(u.grid(), heun_step(u, y0, drift1, dt, cfg.nu, m));
}

std::vector<double> snapshot_targets(const SolverConfig& cfg) {
  std::vector<double> targets;
  for (double t : cfg.snapshot_times) {
    if (t > 0.0) targets.push_back(t);
  }
  if (targets.empty() || targets.back() < cfg.t_end) targets.push_back(cfg.t_end);
  if (cfg.t_end == 0.0) targets.clear();
  return targets;
}

// Step count for [t, target] so that sub-steps are uniform and at most `dt_max`.
int substeps(double span, double dt_max) {
  return std::max(1, static_cast<int>(std::ceil(span / dt_max - 1e-9)));
}

bool is_probability_candidate(const ScalarField& u) { return u.min() >= -1e-8 * u.max_abs(); }

// Shared time loop for the nonlinear and linearized solves. `drift_at(t, field)`
// returns the velocity used at time t for state `field`.
template <class DriftAt>
Trajectory march(const ScalarField& u0, const SolverConfig& cfg, DriftAt&& drift_at) {
  cfg.validate();
  if (!(u0.grid() == cfg.grid())) throw std::invalid_argument("solve: initial field grid differs from config");
  const HalfModes modes(u0.grid(), cfg.dealias);

  Trajectory traj;
  traj.config_hash = cfg.hash();
  traj.snapshots.push_back({0.0, u0});
  traj.diagnostics.push_back(diagnose(u0, 0.0, 0.0, 0.0));
  check_truncation(u0, "initial field");

  ScalarField u = u0;
  double t = 0.0;
  double last_peak = u0.max_abs();
  for (double target : snapshot_targets(cfg)) {
    while (t < target) {
      const VelocityField y0 = drift_at(t, u);
      double dt_max = cfg.dt.dt;
      if (cfg.dt.kind == DtPolicy::Kind::kCfl) dt_max = std::min(dt_max, admissible_dt(y0, cfg.dt));
      const int steps = substeps(target - t, dt_max);
      const double dt = (target - t) / steps;
      const double limit = admissible_dt(y0, cfg.dt);
      if (dt > limit * (1.0 + 1e-12)) throw CflViolation(dt, limit);

      const double t_next = steps == 1 ? target : t + dt;
      auto drift1 = [&](const std::vector<double>& v) {
        return drift_at(t_next, ScalarField(u.grid(), v));
      };
      try {
        u = ScalarField(u.grid(), heun_step(u, y0, drift1, dt, cfg.nu, modes));
      } catch (const std::domain_error& e) {
        throw SolverAbort(std::string("solver produced non-finite values: ") + e.what(), std::move(traj));
      }
      t = t_next;
      const double cfl = dt * y0.max_speed() / u.grid().dx();
      traj.diagnostics.push_back(diagnose(u, t, dt, cfl));
    }
    const double peak = u.max_abs();
    if (last_peak > 0.0 && peak > cfg.blowup_factor * last_peak) {
      std::ostringstream os;
      os << "blow-up guard: |u|_inf grew from " << last_peak << " to " << peak << " by t = " << t;
      throw SolverAbort(os.str(), std::move(traj));
    }
    last_peak = peak;
    traj.snapshots.push_back({t, u});
  }
  return traj;
}

}  // namespace

DiagnosticRow diagnose(const ScalarField& u, double time, double dt, double cfl) {
  DiagnosticRow row;
  row.time = time;
  row.mass = integral(u);
  row.min = u.min();
  for (std::size_t k = 0; k < kDiagnosticExponents.size(); ++k) {
    row.norms[k] = lp_norm(u, kDiagnosticExponents[k]);
  }
  row.cfl = cfl;
  row.dt = dt;
  return row;
}

ScalarField step_mild(const ScalarField& u, double dt, const SolverConfig& cfg) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_mild: dt must be positive");
  if (!(cfg.nu > 0.0)) throw std::invalid_argument("step_mild: nu must be positive");
  const HalfModes modes(u.grid(), cfg.dealias);
  return checked_step(u, biot_savart_field(u), dt, cfg, modes);
}

Trajectory solve(const ScalarField& u0, const SolverConfig& cfg) {
  if (is_probability_candidate(u0) && u0.max_abs() > 0.0) {
    const double mass = integral(u0);
    if (std::abs(mass - 1.0) > 1e-8) {
      std::ostringstream os;
      os << "solve: nonnegative initial field has mass " << mass << ", not a probability density";
      log::info(os.str());
    }
  }
  auto drift = [](double, const ScalarField& f) { return biot_savart_field(f); };
  Trajectory traj = march(u0, cfg, drift);
  traj.metadata["kind"] = "nonlinear";
  return traj;
}

Trajectory solve_linearized(const ScalarField& v0, const Trajectory& u_traj,
                            const SolverConfig& cfg) {
  if (u_traj.snapshots.empty()) throw std::invalid_argument("solve_linearized: empty drift trajectory");
  if (!(u_traj.grid() == v0.grid())) throw std::invalid_argument("solve_linearized: grid mismatch");
  if (u_traj.snapshots.front().time > 1e-12 ||
      u_traj.snapshots.back().time < cfg.t_end * (1.0 - 1e-12)) {
    throw std::invalid_argument("solve_linearized: drift trajectory does not cover [0, t_end]");
  }

  // Velocities of the two most recently used snapshots.
  struct Cached {
    std::size_t index;
    VelocityField y;
  };
  std::vector<Cached> cache;
  auto velocity_of = [&](std::size_t k) -> const VelocityField& {
    for (const auto& c : cache) {
      if (c.index == k) return c.y;
    }
    if (cache.size() >= 2) cache.erase(cache.begin());
    cache.push_back({k, biot_savart_field(u_traj.snapshots[k].field)});
    return cache.back().y;
  };

  const auto& snaps = u_traj.snapshots;
  auto drift = [&](double t, const ScalarField&) -> VelocityField {
    auto hi = std::lower_bound(snaps.begin(), snaps.end(), t,
                               [](const Snapshot& s, double v) { return s.time < v; });
    if (hi == snaps.end()) hi = snaps.end() - 1;
    const std::size_t k_hi = static_cast<std::size_t>(hi - snaps.begin());
    if (std::abs(snaps[k_hi].time - t) <= 1e-12 * std::max(1.0, t) || k_hi == 0) {
      return velocity_of(k_hi);
    }
    const std::size_t k_lo = k_hi - 1;
    const double a = (t - snaps[k_lo].time) / (snaps[k_hi].time - snaps[k_lo].time);
    const VelocityField lo = velocity_of(k_lo);
    const VelocityField& up = velocity_of(k_hi);
    return lo * (1.0 - a) + up * a;
  };
  Trajectory traj = march(v0, cfg, drift);
  traj.metadata["kind"] = "linearized";
  traj.metadata["drift_config_hash"] = u_traj.config_hash;
  return traj;
}

ScalarField mollify_atoms(std::span<const Atom> atoms, const Grid2D& grid, double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("mollifier variance must be positive");
  std::vector<double> values(grid.size(), 0.0);
  for (const auto& a : atoms) {
    if (a.weight == 0.0) continue;
    const auto g = gaussian_field(grid, a.position, variance, a.weight);
    for (std::size_t p = 0; p < values.size(); ++p) values[p] += g[p];
  }
  return ScalarField(grid, std::move(values));
}

Trajectory solve_from_measure(std::span<const Atom> atoms, const SolverConfig& cfg,
                              std::optional<double> mollifier_variance) {
  if (atoms.empty()) throw std::invalid_argument("solve_from_measure: no atoms");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(a.weight >= 0.0)) throw std::invalid_argument("solve_from_measure: negative atom weight");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "solve_from_measure: atom weights sum to " << total << ", expected 1";
    throw std::invalid_argument(os.str());
  }
  const Grid2D grid = cfg.grid();
  const double variance = mollifier_variance.value_or(4.0 * grid.dx() * grid.dx());
  Trajectory traj = solve(mollify_atoms(atoms, grid, variance), cfg);
  traj.metadata["mollifier_variance"] = variance;
  auto& list = traj.metadata["atoms"] = nlohmann::json::array();
  for (const auto& a : atoms) list.push_back({a.position[0], a.position[1], a.weight});
  return traj;
}

}  // namespace vortlab

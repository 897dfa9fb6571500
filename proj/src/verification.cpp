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

#include "vortlab/verification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "vortlab/biot_savart.hpp"

namespace vortlab {

nlohmann::json CheckReport::to_json() const {
  return {{"check", check},
          {"inputs_hash", inputs_hash},
          {"values", values},
          {"thresholds", thresholds},
          {"pass", pass}};
}

// --- weak-form residuals -----------------------------------------------------

nlohmann::json ResidualReport::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& m : members) {
    list.push_back({{"label", m.label},
                    {"residual", m.residual},
                    {"normalized", m.normalized},
                    {"quadrature_points", m.quadrature_points},
                    {"noise_floor", m.noise_floor}});
  }
  return {{"members", list},
          {"max_normalized", max_normalized},
          {"max_noise_floor", max_noise_floor},
          {"normalization", "residual / (|phi|_W2inf * |u|_L1L1)"}};
}

namespace {

// Spatial moments of one bump against a snapshot: A = int u phi,
// B = int u Lap phi, C = int u y.grad phi.
struct Moments {
  double a = 0.0, b = 0.0, c = 0.0;
};

// Support of a bump on the grid with phi, Lap phi and grad phi tabulated.
struct Stencil {
  std::vector<std::size_t> index;
  std::vector<double> phi, lap, g1, g2;

  Stencil(const SpatialBump& bump, const Grid2D& grid) {
    const int n = grid.n();
    for (int j = 0; j < n; ++j) {
      const double y = grid.coord(j);
      if (std::abs(y - bump.center[1]) >= bump.radius) continue;
      for (int i = 0; i < n; ++i) {
        const double x = grid.coord(i);
        const double v = bump.value({x, y});
        if (v == 0.0) continue;
        const auto g = bump.gradient({x, y});
        index.push_back(grid.index(i, j));
        phi.push_back(v);
        lap.push_back(bump.laplacian({x, y}));
        g1.push_back(g[0]);
        g2.push_back(g[1]);
      }
    }
  }

  Moments apply(std::span<const double> u, const VelocityField* y, double area) const {
    Moments m;
    for (std::size_t k = 0; k < index.size(); ++k) {
      const double w = u[index[k]];
      m.a += w * phi[k];
      m.b += w * lap[k];
      if (y) m.c += w * (y->c1[index[k]] * g1[k] + y->c2[index[k]] * g2[k]);
    }
    m.a *= area;
    m.b *= area;
    m.c *= area;
    return m;
  }
};

double trapezoid(std::span<const double> t, std::span<const double> f, std::span<const std::size_t> use) {
  double s = 0.0;
  for (std::size_t k = 1; k < use.size(); ++k) {
    s += 0.5 * (t[use[k]] - t[use[k - 1]]) * (f[use[k]] + f[use[k - 1]]);
  }
  return s;
}

// `drift(k)` returns the velocity for snapshot k (nullptr: no transport term).
template <class DriftOf>
ResidualReport residuals(const Trajectory& traj, const ScalarField& u0,
                         std::span<const TestFunction> bank, double nu, DriftOf&& drift) {
  if (bank.empty()) throw std::invalid_argument("weak residual: empty test-function bank");
  if (traj.snapshots.size() < 2) throw std::invalid_argument("weak residual: trajectory too short");
  if (!(u0.grid() == traj.grid())) throw std::invalid_argument("weak residual: u0 grid differs");
  const Grid2D& grid = traj.grid();
  const double area = grid.cell_area();
  const auto times = traj.times();
  const std::size_t count = times.size();

  // Spatial bumps, deduplicated.
  std::vector<SpatialBump> bumps;
  auto bump_id = [&](const SpatialBump& b) {
    for (std::size_t k = 0; k < bumps.size(); ++k) {
      if (bumps[k].center == b.center && bumps[k].radius == b.radius) return k;
    }
    bumps.push_back(b);
    return bumps.size() - 1;
  };
  std::vector<std::vector<std::size_t>> term_bump(bank.size());
  for (std::size_t f = 0; f < bank.size(); ++f) {
    for (const auto& term : bank[f].terms) term_bump[f].push_back(bump_id(term.space));
  }
  std::vector<Stencil> stencils;
  for (const auto& b : bumps) stencils.emplace_back(b, grid);

  // moments[s][k]: bump s against snapshot k.
  std::vector<std::vector<Moments>> moments(bumps.size(), std::vector<Moments>(count));
  std::vector<double> l1(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto& u = traj.snapshots[k].field;
    const VelocityField* y = drift(k);
    for (std::size_t s = 0; s < bumps.size(); ++s) moments[s][k] = stencils[s].apply(u.values(), y, area);
    l1[k] = lp_norm(u, 1.0);
  }
  std::vector<Moments> initial(bumps.size());
  for (std::size_t s = 0; s < bumps.size(); ++s) initial[s] = stencils[s].apply(u0.values(), nullptr, area);

  std::vector<std::size_t> all(count), half;
  for (std::size_t k = 0; k < count; ++k) {
    all[k] = k;
    if (k % 2 == 0 || k + 1 == count) half.push_back(k);
  }

  ResidualReport report;
  for (std::size_t f = 0; f < bank.size(); ++f) {
    const TestFunction& fn = bank[f];
    const double horizon = fn.horizon();
    if (times.back() < horizon * (1.0 - 1e-12)) {
      throw std::invalid_argument("weak residual: trajectory ends before the test-function support");
    }
    int inside = 0;
    for (double t : times) inside += t < horizon ? 1 : 0;
    if (inside < 20) {
      std::ostringstream os;
      os << "weak residual: only " << inside << " snapshots inside the temporal support of '" << fn.label
         << "' (need >= 20)";
      throw std::invalid_argument(os.str());
    }
    std::vector<double> integrand(count, 0.0), mass(count, 0.0);
    double initial_term = 0.0;
    for (std::size_t j = 0; j < fn.terms.size(); ++j) {
      const auto& term = fn.terms[j];
      const auto& mom = moments[term_bump[f][j]];
      for (std::size_t k = 0; k < count; ++k) {
        const double t = times[k];
        integrand[k] += term.coefficient * (term.time.derivative(t) * mom[k].a +
                                            term.time.value(t) * (nu * mom[k].b + mom[k].c));
      }
      initial_term += term.coefficient * term.time.value(0.0) * initial[term_bump[f][j]].a;
    }
    for (std::size_t k = 0; k < count; ++k) mass[k] = times[k] <= horizon ? l1[k] : 0.0;

    MemberResidual m;
    m.label = fn.label;
    m.quadrature_points = inside;
    m.residual = trapezoid(times, integrand, all) + initial_term;
    const double coarse = trapezoid(times, integrand, half) + initial_term;
    const double scale = fn.w2inf() * trapezoid(times, mass, all);
    m.normalized = scale > 0.0 ? m.residual / scale : 0.0;
    m.noise_floor = scale > 0.0 ? std::abs(m.residual - coarse) / scale : 0.0;
    report.max_normalized = std::max(report.max_normalized, std::abs(m.normalized));
    report.max_noise_floor = std::max(report.max_noise_floor, m.noise_floor);
    report.members.push_back(std::move(m));
  }
  return report;
}

}  // namespace

ResidualReport weak_residual(const Trajectory& traj, const ScalarField& u0,
                             std::span<const TestFunction> bank, double nu) {
  std::optional<VelocityField> current;
  auto drift = [&](std::size_t k) -> const VelocityField* {
    current = biot_savart_field(traj.snapshots[k].field);
    return &*current;
  };
  return residuals(traj, u0, bank, nu, drift);
}

ResidualReport linearized_weak_residual(const Trajectory& v_traj, const Trajectory& u_traj,
                                        std::span<const TestFunction> bank, double nu) {
  if (v_traj.snapshots.empty() || u_traj.snapshots.empty()) {
    throw std::invalid_argument("linearized residual: empty trajectory");
  }
  if (!(v_traj.grid() == u_traj.grid())) throw std::invalid_argument("linearized residual: grid mismatch");
  std::optional<VelocityField> current;
  auto drift = [&](std::size_t k) -> const VelocityField* {
    current = biot_savart_field(u_traj.at(v_traj.snapshots[k].time));
    return &*current;
  };
  return residuals(v_traj, v_traj.snapshots.front().field, bank, nu, drift);
}

// --- uniqueness diagnostic ----------------------------------------------------

nlohmann::json UniquenessSeries::to_json() const {
  return {{"eps", eps},
          {"times", times},
          {"h", h},
          {"h_decomposed", h_decomposed},
          {"kz_norm", kz_norm},
          {"hm1_norm", hm1_norm},
          {"envelope", envelope},
          {"gronwall_constant", gronwall_constant},
          {"constant_fitted", constant_fitted},
          {"max_h", max_h},
          {"max_decomposition_error", max_decomposition_error},
          {"envelope_dominates", envelope_dominates}};
}

Trajectory restrict_trajectory(const Trajectory& traj, const Grid2D& grid) {
  Trajectory out;
  out.config_hash = traj.config_hash;
  out.metadata = traj.metadata;
  out.diagnostics = traj.diagnostics;
  for (const auto& s : traj.snapshots) out.snapshots.push_back({s.time, resample(s.field, grid)});
  return out;
}

UniquenessSeries uniqueness_functional(const Trajectory& u1, const Trajectory& u2, double eps,
                                       std::optional<double> gronwall_constant) {
  if (!(eps > 0.0)) throw std::invalid_argument("uniqueness: eps must be positive");
  if (u1.snapshots.empty() || u1.snapshots.size() != u2.snapshots.size()) {
    throw std::invalid_argument("uniqueness: trajectories have different snapshot counts");
  }
  if (!(u1.grid() == u2.grid())) throw std::invalid_argument("uniqueness: trajectories are on different grids");
  UniquenessSeries out;
  out.eps = eps;
  std::vector<double> weight;
  for (std::size_t k = 0; k < u1.snapshots.size(); ++k) {
    const double t = u1.snapshots[k].time;
    if (std::abs(t - u2.snapshots[k].time) > 1e-12 * std::max(1.0, t)) {
      throw std::invalid_argument("uniqueness: snapshot times differ");
    }
    const ScalarField& a = u1.snapshots[k].field;
    const ScalarField& b = u2.snapshots[k].field;
    const ScalarField z = drop_nyquist(a - b);
    const ScalarField phi = resolvent(z, eps);
    const double h = inner_product(phi, z);
    const double ke = lp_norm(k_epsilon(z, eps), 2.0);
    const double pe = lp_norm(phi, 2.0);
    const double dec = ke * ke + eps * pe * pe;
    const double kz = lp_norm(biot_savart_field(z), 2.0);
    out.times.push_back(t);
    out.h.push_back(h);
    out.h_decomposed.push_back(dec);
    out.kz_norm.push_back(kz);
    out.hm1_norm.push_back(h_minus1_norm(z));
    const double denom = std::max(std::abs(h), std::abs(dec));
    if (denom > 0.0) {
      out.max_decomposition_error = std::max(out.max_decomposition_error, std::abs(h - dec) / denom);
    }
    out.max_h = std::max(out.max_h, h);
    const double n4 = lp_norm(a, 4.0);
    const double n43 = lp_norm(b, 4.0 / 3.0);
    weight.push_back((1.0 + std::pow(n4, 4) + std::pow(n43, 4)) * kz * kz);
  }

  // Cumulative trapezoid of the Gronwall integrand.
  std::vector<double> integral(weight.size(), 0.0);
  for (std::size_t k = 1; k < weight.size(); ++k) {
    integral[k] = integral[k - 1] + 0.5 * (out.times[k] - out.times[k - 1]) * (weight[k] + weight[k - 1]);
  }
  const double h0 = out.h.front();
  if (gronwall_constant) {
    out.gronwall_constant = *gronwall_constant;
  } else {
    double c = 0.0;
    for (std::size_t k = 1; k < integral.size(); ++k) {
      if (integral[k] > 0.0) c = std::max(c, (out.h[k] - h0) / integral[k]);
    }
    out.gronwall_constant = c;
    out.constant_fitted = true;
  }
  out.envelope_dominates = true;
  for (std::size_t k = 0; k < integral.size(); ++k) {
    out.envelope.push_back(h0 + out.gronwall_constant * integral[k]);
    if (out.h[k] > out.envelope[k] * (1.0 + 1e-12) + 1e-300) out.envelope_dominates = false;
  }
  return out;
}

// --- decay laws ---------------------------------------------------------------

nlohmann::json DecayFit::to_json() const {
  return {{"slope", slope}, {"intercept", intercept}, {"r2", r2}, {"points", points}};
}

DecayFit decay_fit(std::span<const double> times, std::span<const double> values, double t_lo,
                   double t_hi) {
  if (times.size() != values.size()) throw std::invalid_argument("decay_fit: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    if (t < t_lo * (1.0 - 1e-12) || t > t_hi * (1.0 + 1e-12)) continue;
    if (!(t > 0.0) || !(values[k] > 0.0)) throw std::invalid_argument("decay_fit: non-positive time or value in window");
    lx.push_back(std::log(t));
    ly.push_back(std::log(values[k]));
  }
  if (lx.size() < 5) throw std::invalid_argument("decay_fit: fewer than 5 snapshots in the window");
  const double m = static_cast<double>(lx.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sx += lx[k];
    sy += ly[k];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
    syy += (ly[k] - my) * (ly[k] - my);
  }
  DecayFit fit;
  fit.points = static_cast<int>(lx.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

DecayFit decay_fit(const Trajectory& traj, DecayQuantity quantity, double r, double t_lo,
                   double t_hi) {
  std::vector<double> times, values;
  for (const auto& s : traj.snapshots) {
    if (s.time < t_lo * (1.0 - 1e-12) || s.time > t_hi * (1.0 + 1e-12)) continue;
    times.push_back(s.time);
    values.push_back(quantity == DecayQuantity::kVorticity ? lp_norm(s.field, r)
                                                           : lp_norm(biot_savart_field(s.field), r));
  }
  return decay_fit(times, values, t_lo, t_hi);
}

// --- flow property ------------------------------------------------------------

nlohmann::json FlowCheckResult::to_json() const {
  return {{"discrepancy", discrepancy}, {"self_convergence", self_convergence}};
}

namespace {

ScalarField run_for(const ScalarField& u, double span, const SolverConfig& cfg) {
  if (span == 0.0) return u;
  SolverConfig c = cfg;
  c.t_end = span;
  c.snapshot_times.clear();
  return solve(u, c).snapshots.back().field;
}

}  // namespace

FlowCheckResult flow_property_check(const ScalarField& u0, double s, double r, double t,
                                    const SolverConfig& cfg, bool measure_self_convergence) {
  if (!(s <= r && r <= t)) throw std::invalid_argument("flow check: need s <= r <= t");
  FlowCheckResult out{0.0, 0.0, run_for(u0, t - s, cfg), run_for(run_for(u0, r - s, cfg), t - r, cfg)};
  out.discrepancy = lp_norm(out.continuous - out.restarted, 1.0);
  if (measure_self_convergence) {
    SolverConfig fine = cfg;
    fine.resolution = 2 * cfg.resolution;
    fine.dt.dt = 0.5 * cfg.dt.dt;
    const ScalarField refined = run_for(resample(u0, fine.grid()), t - s, fine);
    out.self_convergence = lp_norm(out.continuous - resample(refined, u0.grid()), 1.0);
  }
  return out;
}

bool particle_flow_check(const ParticleEnsemble& initial, double r, double t, const SdeConfig& cfg) {
  if (!(initial.time <= r && r <= t)) throw std::invalid_argument("particle flow check: need s <= r <= t");
  SdeConfig run = cfg.resolved(initial);
  run.t_end = t;
  run.snapshot_times = {r};
  if (r == initial.time || r == t) run.snapshot_times.clear();
  const auto continuous = simulate(initial, run);

  SdeConfig first = run;
  first.t_end = r;
  first.snapshot_times.clear();
  const ParticleEnsemble at_r = r == initial.time ? initial : simulate(initial, first).snapshots.back().ensemble;
  SdeConfig second = run;
  second.snapshot_times.clear();
  const auto restarted = simulate(at_r, second);

  const auto& a = continuous.snapshots.back().ensemble;
  const auto& b = restarted.snapshots.back().ensemble;
  return a.positions == b.positions && a.step == b.step && a.time == b.time;
}

}  // namespace vortlab

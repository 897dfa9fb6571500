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

#include "vortlab/probes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "vortlab/biot_savart.hpp"
#include "vortlab/log.hpp"
#include "vortlab/sde.hpp"

namespace vortlab {

nlohmann::json MarkovProbeConfig::to_json() const {
  nlohmann::json centers = nlohmann::json::array();
  for (const auto& c : bin_centers) centers.push_back({c[0], c[1]});
  return {{"nu", nu},
          {"dt", dt},
          {"r", r},
          {"t", t},
          {"particles", particles},
          {"seed", seed},
          {"bandwidth", bandwidth},
          {"bin_radius_factor", bin_radius_factor},
          {"bin_centers", centers},
          {"coarse_bins", coarse_bins},
          {"min_population", min_population}};
}

namespace {

nlohmann::json run_json(const MarkovRun& run) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : run.bins) {
    bins.push_back({{"center", {b.center[0], b.center[1]}},
                    {"population", b.population},
                    {"distance", b.distance},
                    {"skipped", b.skipped}});
  }
  return {{"bandwidth", run.bandwidth}, {"bin_radius", run.bin_radius}, {"bins", bins}};
}

// Coarse histogram window around `center`; the last slot holds the mass
// outside the window.
struct Window {
  Point center;
  double half;
  int bins;

  int slot(Point p) const {
    const double w = 2.0 * half / bins;
    const int i = static_cast<int>(std::floor((p[0] - center[0] + half) / w));
    const int j = static_cast<int>(std::floor((p[1] - center[1] + half) / w));
    if (i < 0 || j < 0 || i >= bins || j >= bins) return bins * bins;
    return j * bins + i;
  }

  // Mass of a density in cell (a, b): midpoint rule on a sub-lattice with
  // bilinear interpolation, so cells narrower than the grid spacing do not
  // alias against the nodes.
  double cell_mass(const ScalarField& f, int a, int b) const {
    constexpr int kSub = 8;
    const Grid2D& g = f.grid();
    const double w = 2.0 * half / bins;
    const double h = w / kSub;
    const double x0 = center[0] - half + a * w;
    const double y0 = center[1] - half + b * w;
    double acc = 0.0;
    for (int q = 0; q < kSub; ++q) {
      for (int p = 0; p < kSub; ++p) acc += bilinear(f, g, x0 + (p + 0.5) * h, y0 + (q + 0.5) * h);
    }
    return acc * h * h;
  }

  static double bilinear(const ScalarField& f, const Grid2D& g, double x, double y) {
    const double fx = (x + 0.5 * g.box_size()) / g.dx();
    const double fy = (y + 0.5 * g.box_size()) / g.dx();
    const double ix = std::floor(fx), iy = std::floor(fy);
    const double tx = fx - ix, ty = fy - iy;
    const int n = g.n();
    auto wrap = [n](double i) { return static_cast<int>(((static_cast<long>(i) % n) + n) % n); };
    const int i0 = wrap(ix), i1 = wrap(ix + 1), j0 = wrap(iy), j1 = wrap(iy + 1);
    return (1 - tx) * (1 - ty) * f(i0, j0) + tx * (1 - ty) * f(i1, j0) + (1 - tx) * ty * f(i0, j1) +
           tx * ty * f(i1, j1);
  }
};

// u restricted to the disc |x - y| <= radius with a smoothed edge of one grid
// cell, normalized to unit mass.
ScalarField restrict_to_bin(const ScalarField& u, Point y, double radius) {
  const Grid2D& g = u.grid();
  const double width = g.dx();
  std::vector<double> v(g.size());
  for (int j = 0; j < g.n(); ++j) {
    for (int i = 0; i < g.n(); ++i) {
      const double d = std::hypot(g.coord(i) - y[0], g.coord(j) - y[1]);
      const double mask = 0.5 * (1.0 - std::tanh((d - radius) / width));
      v[g.index(i, j)] = std::max(u(i, j), 0.0) * mask;
    }
  }
  ScalarField out(g, std::move(v));
  const double mass = integral(out);
  if (!(mass > 0.0)) throw std::runtime_error("markov probe: bin carries no mass");
  return out * (1.0 / mass);
}

}  // namespace

nlohmann::json MarkovProbeReport::to_json() const {
  nlohmann::json ratios = nlohmann::json::array();
  for (std::size_t k = 0; k < drift.bins.size(); ++k) {
    const auto& a = drift.bins[k];
    const auto& b = calibration.bins[k];
    ratios.push_back(a.skipped || b.skipped || b.distance == 0.0 ? nlohmann::json(nullptr)
                                                                 : nlohmann::json(a.distance / b.distance));
  }
  return {{"drift", run_json(drift)},
          {"calibration", run_json(calibration)},
          {"ratios", ratios},
          {"factor", factor},
          {"pass", pass}};
}

std::vector<Point> max_speed_ring(const ScalarField& u) {
  const Grid2D& g = u.grid();
  const VelocityField y = biot_savart_field(u);
  double mass = 0.0, cx = 0.0, cy = 0.0;
  std::size_t best = 0;
  double best_speed = -1.0;
  for (int j = 0; j < g.n(); ++j) {
    for (int i = 0; i < g.n(); ++i) {
      const auto k = g.index(i, j);
      mass += u[k];
      cx += u[k] * g.coord(i);
      cy += u[k] * g.coord(j);
      const double s = std::hypot(y.c1[k], y.c2[k]);
      if (s > best_speed) {
        best_speed = s;
        best = k;
      }
    }
  }
  const Point c{cx / mass, cy / mass};
  const double rho = std::hypot(g.coord(static_cast<int>(best % g.n())) - c[0],
                                g.coord(static_cast<int>(best / g.n())) - c[1]);
  std::vector<Point> out;
  for (int k = 0; k < 4; ++k) {
    const double a = 0.5 * std::numbers::pi * k;
    out.push_back({c[0] + rho * std::cos(a), c[1] + rho * std::sin(a)});
  }
  return out;
}

MarkovRun markov_run(const ScalarField& u0, const Trajectory& reference, const MarkovProbeConfig& cfg,
                     bool drift_free, const std::vector<Point>& centers, double bin_radius) {
  const Grid2D& grid = reference.grid();
  if (!(u0.grid() == grid)) throw std::invalid_argument("markov probe: u0 and reference grids differ");

  const TrajectoryDrift field_drift(reference, grid);
  const ExternalDrift drift = [&](double t, std::span<const Point> pts) {
    if (drift_free) return std::vector<Point>(pts.size(), Point{0.0, 0.0});
    return field_drift(t, pts);
  };
  const ParticleEnsemble start = sample_initial(u0, cfg.particles, cfg.seed);
  const std::vector<double> times = {cfg.r, cfg.t};
  const auto states = evolve_in_drift(start, cfg.nu, cfg.dt, drift, times);
  const ParticleEnsemble& at_r = states[0];
  const ParticleEnsemble& at_t = states[1];

  MarkovRun run;
  run.bin_radius = bin_radius;
  run.bandwidth = bin_radius / cfg.bin_radius_factor;

  // Law at r and the drift for the reference solves after r.
  SolverConfig lin;
  lin.nu = cfg.nu;
  lin.dt.kind = DtPolicy::Kind::kFixed;
  lin.dt.dt = cfg.dt;
  lin.dt.safety = 1.0;
  lin.t_end = cfg.t - cfg.r;
  lin.box_size = grid.box_size();
  lin.resolution = grid.n();
  ScalarField law_r = drift_free ? heat_semigroup(u0, cfg.r, cfg.nu) : reference.at(cfg.r);
  Trajectory shifted;
  if (!drift_free) {
    for (const auto& s : reference.snapshots) {
      if (s.time >= cfg.r - 1e-12 && s.time <= cfg.t + 1e-12) shifted.snapshots.push_back({s.time - cfg.r, s.field});
    }
    if (shifted.snapshots.empty() || shifted.snapshots.front().time > 1e-12) {
      shifted.snapshots.insert(shifted.snapshots.begin(), {0.0, law_r});
    }
  }

  for (const Point& y : centers) {
    MarkovBin bin;
    bin.center = y;
    std::vector<std::size_t> members;
    for (std::size_t p = 0; p < at_r.size(); ++p) {
      const double d = std::hypot(at_r.positions[p][0] - y[0], at_r.positions[p][1] - y[1]);
      if (d <= bin_radius) members.push_back(p);
    }
    bin.population = members.size();
    if (members.size() < cfg.min_population) {
      std::ostringstream os;
      os << "markov probe: bin at (" << y[0] << ", " << y[1] << ") holds " << members.size()
         << " particles (< " << cfg.min_population << "), skipped";
      log::warn(os.str());
      bin.skipped = true;
      run.bins.push_back(bin);
      continue;
    }

    const ScalarField v0 = restrict_to_bin(law_r, y, bin_radius);
    const ScalarField vt = drift_free ? heat_semigroup(v0, cfg.t - cfg.r, cfg.nu)
                                      : solve_linearized(v0, shifted, lin).snapshots.back().field;

    Point mean{0.0, 0.0};
    for (std::size_t p : members) {
      mean[0] += at_t.positions[p][0];
      mean[1] += at_t.positions[p][1];
    }
    mean[0] /= members.size();
    mean[1] /= members.size();
    const double spread = std::sqrt(2.0 * cfg.nu * (cfg.t - cfg.r) + bin_radius * bin_radius);
    const Window win{mean, 4.0 * spread, cfg.coarse_bins};

    const std::size_t slots = static_cast<std::size_t>(cfg.coarse_bins) * cfg.coarse_bins + 1;
    std::vector<double> p_emp(slots, 0.0), q_ref(slots, 0.0);
    for (std::size_t p : members) p_emp[win.slot(at_t.positions[p])] += 1.0 / members.size();
    double inside = 0.0;
    for (int b = 0; b < cfg.coarse_bins; ++b) {
      for (int a = 0; a < cfg.coarse_bins; ++a) {
        const double m = win.cell_mass(vt, a, b);
        q_ref[static_cast<std::size_t>(b) * cfg.coarse_bins + a] = m;
        inside += m;
      }
    }
    q_ref.back() = 1.0 - inside;
    for (std::size_t s = 0; s < slots; ++s) bin.distance += std::abs(p_emp[s] - q_ref[s]);
    run.bins.push_back(bin);
  }
  return run;
}

MarkovProbeReport markov_probe(const ScalarField& u0, const Trajectory& reference,
                               const MarkovProbeConfig& cfg) {
  if (!(0.0 < cfg.r && cfg.r < cfg.t)) throw std::invalid_argument("markov probe: need 0 < r < t");
  if (reference.snapshots.back().time < cfg.t * (1.0 - 1e-12)) {
    throw std::invalid_argument("markov probe: reference does not cover [0, t]");
  }
  if (cfg.coarse_bins < 1 || !(cfg.bin_radius_factor > 0.0)) {
    throw std::invalid_argument("markov probe: invalid binning");
  }
  const ScalarField law_r = reference.at(cfg.r);
  const std::vector<Point> centers = cfg.bin_centers.empty() ? max_speed_ring(law_r) : cfg.bin_centers;

  double bandwidth = cfg.bandwidth;
  if (bandwidth == 0.0) {
    // Spread of u(r) about its centroid.
    const Grid2D& g = law_r.grid();
    double m = 0.0, cx = 0.0, cy = 0.0, s2 = 0.0;
    for (int j = 0; j < g.n(); ++j) {
      for (int i = 0; i < g.n(); ++i) {
        m += law_r(i, j);
        cx += law_r(i, j) * g.coord(i);
        cy += law_r(i, j) * g.coord(j);
      }
    }
    cx /= m;
    cy /= m;
    for (int j = 0; j < g.n(); ++j) {
      for (int i = 0; i < g.n(); ++i) {
        const double dx = g.coord(i) - cx, dy = g.coord(j) - cy;
        s2 += law_r(i, j) * (dx * dx + dy * dy);
      }
    }
    bandwidth = silverman_bandwidth(std::sqrt(0.5 * s2 / m), cfg.particles);
  }
  const double radius = cfg.bin_radius_factor * bandwidth;

  MarkovProbeReport report;
  report.drift = markov_run(u0, reference, cfg, false, centers, radius);
  report.calibration = markov_run(u0, reference, cfg, true, centers, radius);
  report.pass = true;
  int populated = 0;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const auto& a = report.drift.bins[k];
    const auto& b = report.calibration.bins[k];
    if (a.skipped || b.skipped) continue;
    ++populated;
    if (a.distance > report.factor * b.distance) report.pass = false;
  }
  if (populated == 0) report.pass = false;
  return report;
}

}  // namespace vortlab

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

#include "vortlab/point_velocity.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include "vortlab/biot_savart.hpp"

namespace vortlab {

DriftMethod parse_drift_method(const std::string& name) {
  if (name == "direct") return DriftMethod::kDirect;
  if (name == "treecode") return DriftMethod::kTreecode;
  if (name == "grid") return DriftMethod::kGrid;
  throw std::invalid_argument("unknown drift method '" + name + "' (direct | treecode | grid)");
}

std::string to_string(DriftMethod method) {
  switch (method) {
    case DriftMethod::kDirect: return "direct";
    case DriftMethod::kTreecode: return "treecode";
    case DriftMethod::kGrid: return "grid";
  }
  return "?";
}

namespace {

void validate(const PointVelocityOptions& o) {
  if (o.method == DriftMethod::kGrid) {
    if (!o.grid) throw std::invalid_argument("grid drift needs a grid");
    if (!(o.bandwidth > 0.0)) throw std::invalid_argument("grid drift needs a positive bandwidth");
    return;
  }
  if (!(o.delta > 0.0)) throw std::invalid_argument("blob length delta must be positive");
  if (o.method == DriftMethod::kTreecode && !(o.tree.theta > 0.0 && o.tree.theta <= 1.0)) {
    throw std::invalid_argument("treecode opening parameter must be in (0, 1]");
  }
}

Point direct_sum(std::span<const Point> sources, std::span<const double> weights, Point t,
                 double delta, std::size_t self) {
  double a = 0.0, b = 0.0;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    if (s == self) continue;
    const auto k = blob_kernel_eval({t[0] - sources[s][0], t[1] - sources[s][1]}, delta);
    a += weights[s] * k[0];
    b += weights[s] * k[1];
  }
  return {a, b};
}

std::vector<Point> evaluate(std::span<const Point> sources, std::span<const double> weights,
                            std::span<const Point> targets, const PointVelocityOptions& o,
                            bool self_excluded) {
  validate(o);
  if (sources.size() != weights.size()) throw std::invalid_argument("sources/weights size mismatch");
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<Point> out(targets.size());
  switch (o.method) {
    case DriftMethod::kDirect:
      for (std::size_t t = 0; t < targets.size(); ++t) {
        out[t] = direct_sum(sources, weights, targets[t], o.delta, self_excluded ? t : kNone);
      }
      break;
    case DriftMethod::kTreecode: {
      TreecodeIndex tree(sources, weights, o.tree);
      for (std::size_t t = 0; t < targets.size(); ++t) {
        out[t] = self_excluded ? tree.velocity(targets[t], o.delta, t)
                               : tree.velocity(targets[t], o.delta);
      }
      break;
    }
    case DriftMethod::kGrid: {
      // The blob self-term vanishes; the KDE route has no per-particle self term.
      const auto density = kde_density(sources, weights, *o.grid, o.bandwidth);
      const auto velocity = biot_savart_field(density);
      double mass = 0.0, cx = 0.0, cy = 0.0;
      for (std::size_t s = 0; s < sources.size(); ++s) {
        mass += weights[s];
        cx += weights[s] * sources[s][0];
        cy += weights[s] * sources[s][1];
      }
      const Point centroid = mass != 0.0 ? Point{cx / mass, cy / mass} : Point{0.0, 0.0};
      out = interpolate_velocity(velocity, targets, mass, centroid);
      break;
    }
  }
  return out;
}

}  // namespace

std::vector<Point> velocity_at_points(std::span<const Point> sources,
                                      std::span<const double> weights,
                                      std::span<const Point> targets,
                                      const PointVelocityOptions& options) {
  return evaluate(sources, weights, targets, options, false);
}

std::vector<Point> velocity_at_sources(std::span<const Point> sources,
                                       std::span<const double> weights,
                                       const PointVelocityOptions& options) {
  return evaluate(sources, weights, sources, options, true);
}

ScalarField kde_density(std::span<const Point> points, std::span<const double> weights,
                        const Grid2D& grid, double bandwidth) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("kde: bandwidth must be positive");
  if (points.size() != weights.size()) throw std::invalid_argument("kde: size mismatch");
  const int n = grid.n();
  const double dx = grid.dx();
  const double half_box = 0.5 * grid.box_size();
  const int reach = std::max(1, static_cast<int>(std::ceil(5.0 * bandwidth / dx)));
  const int width = std::min(2 * reach + 1, n);
  std::vector<double> out(grid.size(), 0.0);
  std::vector<double> wx(width), wy(width);
  std::vector<int> ix(width), iy(width);

  auto stencil = [&](double p, std::vector<double>& w, std::vector<int>& idx) {
    const double f = (p + half_box) / dx;
    const int centre = static_cast<int>(std::floor(f + 0.5));
    const int start = centre - width / 2;
    double sum = 0.0;
    for (int k = 0; k < width; ++k) {
      const int node = start + k;
      const double d = (node - f) * dx;
      w[k] = std::exp(-0.5 * d * d / (bandwidth * bandwidth));
      idx[k] = ((node % n) + n) % n;
      sum += w[k];
    }
    for (auto& v : w) v /= sum;
  };

  const double inv_area = 1.0 / grid.cell_area();
  for (std::size_t s = 0; s < points.size(); ++s) {
    stencil(points[s][0], wx, ix);
    stencil(points[s][1], wy, iy);
    const double scale = weights[s] * inv_area;
    for (int b = 0; b < width; ++b) {
      const double wyb = wy[b] * scale;
      double* row = &out[static_cast<std::size_t>(iy[b]) * n];
      for (int a = 0; a < width; ++a) row[ix[a]] += wx[a] * wyb;
    }
  }
  return ScalarField(grid, std::move(out));
}

std::vector<Point> interpolate_velocity(const VelocityField& v, std::span<const Point> points,
                                        double mass, Point centroid) {
  const Grid2D& g = v.grid;
  const int n = g.n();
  const double dx = g.dx();
  const double half_box = 0.5 * g.box_size();
  std::vector<Point> out(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double fx = (points[p][0] + half_box) / dx;
    const double fy = (points[p][1] + half_box) / dx;
    const int i0 = static_cast<int>(std::floor(fx));
    const int j0 = static_cast<int>(std::floor(fy));
    if (i0 < 0 || j0 < 0 || i0 + 1 >= n || j0 + 1 >= n) {
      const Point d{points[p][0] - centroid[0], points[p][1] - centroid[1]};
      if (d[0] == 0.0 && d[1] == 0.0) {
        out[p] = {0.0, 0.0};
      } else {
        const auto k = kernel_eval(d);
        out[p] = {mass * k[0], mass * k[1]};
      }
      continue;
    }
    const double ax = fx - i0;
    const double ay = fy - j0;
    auto lerp = [&](const std::vector<double>& c) {
      const double c00 = c[g.index(i0, j0)], c10 = c[g.index(i0 + 1, j0)];
      const double c01 = c[g.index(i0, j0 + 1)], c11 = c[g.index(i0 + 1, j0 + 1)];
      return (1 - ay) * ((1 - ax) * c00 + ax * c10) + ay * ((1 - ax) * c01 + ax * c11);
    };
    out[p] = {lerp(v.c1), lerp(v.c2)};
  }
  return out;
}

std::vector<KernelBenchRow> kernel_bench(std::size_t n, std::uint64_t seed, const TreecodeParams& tree,
                                         std::size_t direct_targets) {
  if (n < 2) throw std::invalid_argument("kernel bench: need at least two sources");
  if (direct_targets == 0) throw std::invalid_argument("kernel bench: need direct targets");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Point> sources(n);
  for (auto& p : sources) p = {normal(rng), normal(rng)};
  const std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  const double delta = 8.0 / std::sqrt(static_cast<double>(n));

  const std::size_t stride = (n + direct_targets - 1) / direct_targets;
  std::vector<std::size_t> picks;
  for (std::size_t i = 0; i < n; i += stride) picks.push_back(i);
  std::vector<Point> targets;
  for (std::size_t i : picks) targets.push_back(sources[i]);

  using clock = std::chrono::steady_clock;
  auto elapsed_ms = [](clock::time_point a) {
    return std::chrono::duration<double, std::milli>(clock::now() - a).count();
  };

  PointVelocityOptions direct;
  direct.method = DriftMethod::kDirect;
  direct.delta = delta;
  auto start = clock::now();
  // The blob kernel vanishes at the origin, so a target's own source adds nothing.
  const auto reference = velocity_at_points(sources, weights, targets, direct);
  const double direct_ms = elapsed_ms(start) * static_cast<double>(n) / static_cast<double>(picks.size());

  PointVelocityOptions treecode;
  treecode.method = DriftMethod::kTreecode;
  treecode.delta = delta;
  treecode.tree = tree;
  start = clock::now();
  const auto fast = velocity_at_sources(sources, weights, treecode);
  const double tree_ms = elapsed_ms(start);

  double err = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < picks.size(); ++k) {
    const Point& a = fast[picks[k]];
    const Point& b = reference[k];
    err = std::max(err, std::hypot(a[0] - b[0], a[1] - b[1]));
    scale = std::max(scale, std::hypot(b[0], b[1]));
  }
  return {{n, "direct", direct_ms, 0.0, picks.size()}, {n, "treecode", tree_ms, err / scale, n}};
}

}  // namespace vortlab

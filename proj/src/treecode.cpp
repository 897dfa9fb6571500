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

#include "vortlab/treecode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "vortlab/biot_savart.hpp"

namespace vortlab {
namespace {
constexpr int kMaxDepth = 40;
// Beyond 3.5 delta the blob kernel equals the singular one to within 5e-6.
constexpr double kBlobReach = 3.5;
}  // namespace

TreecodeIndex::TreecodeIndex(std::span<const Point> sources, std::span<const double> weights,
                             TreecodeParams params)
    : params_(params) {
  if (!(params.theta > 0.0 && params.theta <= 1.0)) {
    throw std::invalid_argument("treecode: opening parameter must be in (0, 1]");
  }
  if (params.order < 0 || params.leaf_capacity < 1) {
    throw std::invalid_argument("treecode: order must be >= 0 and leaf capacity >= 1");
  }
  if (sources.size() != weights.size()) throw std::invalid_argument("treecode: size mismatch");
  if (sources.empty()) return;

  order_.resize(sources.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  points_.assign(sources.begin(), sources.end());
  weights_.assign(weights.begin(), weights.end());

  double lo_x = points_[0][0], hi_x = lo_x, lo_y = points_[0][1], hi_y = lo_y;
  for (const auto& p : points_) {
    lo_x = std::min(lo_x, p[0]);
    hi_x = std::max(hi_x, p[0]);
    lo_y = std::min(lo_y, p[1]);
    hi_y = std::max(hi_y, p[1]);
  }
  const double half = 0.5 * std::max(hi_x - lo_x, hi_y - lo_y) * (1.0 + 1e-12) + 1e-300;
  nodes_.reserve(2 * sources.size() / params_.leaf_capacity + 16);
  build(0.5 * (lo_x + hi_x), 0.5 * (lo_y + hi_y), half, 0, points_.size(), 0);
}

int TreecodeIndex::build(double cx, double cy, double half, std::size_t first, std::size_t count,
                         int depth) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{cx, cy, half});

  // Moments about the weighted centroid.
  double w = 0.0;
  cplx c(0.0);
  for (std::size_t s = first; s < first + count; ++s) {
    w += weights_[s];
    c += weights_[s] * cplx(points_[s][0], points_[s][1]);
  }
  const cplx centroid = w != 0.0 ? c / w : cplx(cx, cy);
  double radius = 0.0;
  const std::size_t offset = coeffs_.size();
  coeffs_.resize(offset + params_.order + 1, cplx(0.0));
  for (std::size_t s = first; s < first + count; ++s) {
    const cplx d = cplx(points_[s][0], points_[s][1]) - centroid;
    radius = std::max(radius, std::abs(d));
    cplx power(1.0);
    for (int k = 0; k <= params_.order; ++k) {
      coeffs_[offset + k] += weights_[s] * power;
      power *= d;
    }
  }
  {
    Node& node = nodes_[id];
    node.weight = w;
    node.centroid = centroid;
    node.radius = radius;
    node.first = first;
    node.count = count;
    node.coeff = offset;
  }

  if (count <= static_cast<std::size_t>(params_.leaf_capacity) || depth >= kMaxDepth ||
      radius == 0.0) {
    return id;
  }

  // Partition into quadrants: 0 = (-,-), 1 = (+,-), 2 = (-,+), 3 = (+,+).
  auto quadrant = [&](std::size_t s) {
    return (points_[s][0] >= cx ? 1 : 0) + (points_[s][1] >= cy ? 2 : 0);
  };
  std::vector<std::size_t> slots(count);
  std::iota(slots.begin(), slots.end(), first);
  std::stable_sort(slots.begin(), slots.end(),
                   [&](std::size_t a, std::size_t b) { return quadrant(a) < quadrant(b); });
  std::vector<Point> pts(count);
  std::vector<double> ws(count);
  std::vector<std::size_t> ord(count);
  std::size_t bounds[5] = {0, 0, 0, 0, 0};
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t s = slots[k];
    pts[k] = points_[s];
    ws[k] = weights_[s];
    ord[k] = order_[s];
    ++bounds[quadrant(s) + 1];
  }
  std::copy(pts.begin(), pts.end(), points_.begin() + first);
  std::copy(ws.begin(), ws.end(), weights_.begin() + first);
  std::copy(ord.begin(), ord.end(), order_.begin() + first);
  for (int q = 0; q < 4; ++q) bounds[q + 1] += bounds[q];

  const double h = 0.5 * half;
  for (int q = 0; q < 4; ++q) {
    const std::size_t n_q = bounds[q + 1] - bounds[q];
    if (n_q == 0) continue;
    const double qx = cx + ((q & 1) ? h : -h);
    const double qy = cy + ((q & 2) ? h : -h);
    const int child = build(qx, qy, h, first + bounds[q], n_q, depth + 1);
    nodes_[id].child[q] = child;
  }
  return id;
}

Point TreecodeIndex::velocity(Point target, double delta, std::optional<std::size_t> self) const {
  if (!(delta > 0.0)) throw std::invalid_argument("treecode: blob length must be positive");
  if (nodes_.empty()) return {0.0, 0.0};
  const double theta2 = params_.theta * params_.theta;
  const double inv2pi = 0.5 / std::numbers::pi;
  const double reach = kBlobReach * delta;
  const double reach2 = reach * reach;
  const double inv_d2 = 1.0 / (delta * delta);

  // Far nodes must also lie beyond blob reach, where the blob and singular
  // kernels agree; nearby sources get the full blob kernel directly.
  double far_r = 0.0, far_i = 0.0;  // sum a_k / (z - z_c)^{k+1}
  double near1 = 0.0, near2 = 0.0;
  int stack[4 * kMaxDepth + 8];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    const double dr = target[0] - node.centroid.real();
    const double di = target[1] - node.centroid.imag();
    const double dist2 = dr * dr + di * di;
    const double gap = reach + node.radius;
    if (node.radius * node.radius < theta2 * dist2 && dist2 > gap * gap) {
      // Horner in 1/d with plain real arithmetic (avoids the C99 complex
      // multiply slow path).
      const double ir = dr / dist2;
      const double ii = -di / dist2;
      const cplx* a = &coeffs_[node.coeff];
      double acc_r = 0.0, acc_i = 0.0;
      for (int k = params_.order; k >= 0; --k) {
        const double sr = acc_r + a[k].real();
        const double si = acc_i + a[k].imag();
        acc_r = sr * ir - si * ii;
        acc_i = sr * ii + si * ir;
      }
      far_r += acc_r;
      far_i += acc_i;
      continue;
    }
    if (node.leaf()) {
      for (std::size_t s = node.first; s < node.first + node.count; ++s) {
        const double dx = target[0] - points_[s][0];
        const double dy = target[1] - points_[s][1];
        const double r2 = dx * dx + dy * dy;
        if (r2 == 0.0 || (self && order_[s] == *self)) continue;
        double w = weights_[s] / r2;
        if (r2 < reach2) {
          const double x = r2 * inv_d2;
          w *= x < 1e-4 ? x * (1.0 - 0.5 * x) : 1.0 - std::exp(-x);
        }
        near1 -= w * dy;
        near2 += w * dx;
      }
      continue;
    }
    for (int q = 3; q >= 0; --q) {
      if (node.child[q] >= 0) stack[top++] = node.child[q];
    }
  }

  // y1 - i y2 = far / (2 pi i)  =>  y1 = Im(far) / 2pi, y2 = Re(far) / 2pi.
  return {(near1 + far_i) * inv2pi, (near2 + far_r) * inv2pi};
}

std::size_t TreecodeIndex::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf(); }));
}

bool TreecodeIndex::check_invariants(double tol) const {
  if (nodes_.empty()) return points_.empty();
  std::vector<int> seen(points_.size(), 0);
  for (const auto& node : nodes_) {
    if (node.leaf()) {
      for (std::size_t s = node.first; s < node.first + node.count; ++s) ++seen[s];
      continue;
    }
    double child_weight = 0.0;
    std::size_t child_count = 0;
    for (int c : node.child) {
      if (c < 0) continue;
      child_weight += nodes_[c].weight;
      child_count += nodes_[c].count;
    }
    if (child_count != node.count) return false;
    if (std::abs(child_weight - node.weight) > tol * std::max(1.0, std::abs(node.weight))) {
      return false;
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

}  // namespace vortlab

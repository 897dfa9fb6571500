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

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "vortlab/fft.hpp"
#include "vortlab/profiles.hpp"

namespace vortlab {

struct TreecodeParams {
  double theta = 0.5;      // opening parameter, in (0, 1]
  int order = 8;           // multipole order P
  int leaf_capacity = 16;
};

// Barnes-Hut quadtree with complex multipole expansions about each node's
// weighted centroid. Far-field nodes contribute
//
//   y1 - i y2 = 1/(2 pi i) sum_k a_k / (z - z_c)^{k+1},  a_k = sum w (z_s - z_c)^k,
//
// near-field leaves are summed with the blob kernel. Built single-threaded,
// read-only afterwards.
class TreecodeIndex {
 public:
  TreecodeIndex(std::span<const Point> sources, std::span<const double> weights,
                TreecodeParams params = {});

  // Velocity at `target`; the source with index `self` (if any) is skipped.
  Point velocity(Point target, double delta, std::optional<std::size_t> self = std::nullopt) const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const;
  double total_weight() const { return nodes_.empty() ? 0.0 : nodes_[0].weight; }
  const TreecodeParams& params() const { return params_; }

  // Structural checks: every source in exactly one leaf and child weights
  // summing to their parent. Used by tests.
  bool check_invariants(double tol = 1e-12) const;

 private:
  struct Node {
    double cx, cy, half;  // bounding square
    double weight = 0.0;
    cplx centroid{};
    double radius = 0.0;  // max distance from centroid to a member
    std::size_t first = 0, count = 0;
    int child[4] = {-1, -1, -1, -1};
    std::size_t coeff = 0;  // offset into coeffs_
    bool leaf() const { return child[0] < 0 && child[1] < 0 && child[2] < 0 && child[3] < 0; }
  };

  int build(double cx, double cy, double half, std::size_t first, std::size_t count, int depth);

  TreecodeParams params_;
  std::vector<Point> points_;       // sources, permuted into tree order
  std::vector<double> weights_;
  std::vector<std::size_t> order_;  // tree slot -> original index
  std::vector<Node> nodes_;
  std::vector<cplx> coeffs_;
};

}  // namespace vortlab

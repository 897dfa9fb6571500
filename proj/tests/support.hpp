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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "vortlab/fields.hpp"
#include "vortlab/profiles.hpp"

namespace vortlab::testing {

// Random real trigonometric polynomial with modes |k|_inf <= kmax, coefficients
// decaying like 1/(1 + |k|^2). Band-limited and smooth on the torus.
inline ScalarField random_smooth(const Grid2D& g, std::uint64_t seed, int kmax = 6) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double w = 2.0 * std::numbers::pi / g.box_size();
  struct Mode {
    int k1, k2;
    double a, b;
  };
  std::vector<Mode> modes;
  for (int k2 = -kmax; k2 <= kmax; ++k2) {
    for (int k1 = -kmax; k1 <= kmax; ++k1) {
      const double damp = 1.0 / (1.0 + k1 * k1 + k2 * k2);
      modes.push_back({k1, k2, normal(rng) * damp, normal(rng) * damp});
    }
  }
  return ScalarField::from_function(g, [&](double x, double y) {
    double s = 0.0;
    for (const auto& m : modes) {
      const double phase = w * (m.k1 * x + m.k2 * y);
      s += m.a * std::cos(phase) + m.b * std::sin(phase);
    }
    return s;
  });
}

// Random compactly concentrated density: a few Gaussians with random centres,
// variances and signed weights, resolved on `g`.
inline ScalarField random_blobs(const Grid2D& g, std::uint64_t seed, bool signed_weights = true,
                                int count = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-0.15 * g.box_size(), 0.15 * g.box_size());
  std::uniform_real_distribution<double> var(0.3, 1.0);
  std::uniform_real_distribution<double> weight(signed_weights ? -1.0 : 0.2, 1.0);
  ScalarField out(g);
  for (int k = 0; k < count; ++k) {
    out = out + gaussian_field(g, {pos(rng), pos(rng)}, var(rng), weight(rng));
  }
  return out;
}

inline double relative_l2(const ScalarField& a, const ScalarField& b) {
  return lp_norm(a - b, 2.0) / lp_norm(b, 2.0);
}

}  // namespace vortlab::testing

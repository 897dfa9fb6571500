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

#include "vortlab/profiles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vortlab {

double gaussian_density(double x, double y, Point c, double variance, double mass) {
  const double dx = x - c[0];
  const double dy = y - c[1];
  return mass / (2.0 * std::numbers::pi * variance) *
         std::exp(-(dx * dx + dy * dy) / (2.0 * variance));
}

ScalarField gaussian_field(const Grid2D& grid, Point center, double variance, double mass) {
  if (!(variance > 0.0)) throw std::invalid_argument("gaussian: variance must be positive");
  return ScalarField::from_function(
      grid, [&](double x, double y) { return gaussian_density(x, y, center, variance, mass); });
}

double LambOseen::vorticity(double x, double y, double t) const {
  return gaussian_density(x, y, {0.0, 0.0}, variance(t));
}

double LambOseen::azimuthal_speed(double r, double t) const {
  if (r == 0.0) return 0.0;
  return -std::expm1(-r * r / (2.0 * variance(t))) / (2.0 * std::numbers::pi * r);
}

ScalarField LambOseen::field(const Grid2D& grid, double t) const {
  return gaussian_field(grid, {0.0, 0.0}, variance(t));
}

VelocityField LambOseen::velocity(const Grid2D& grid, double t) const {
  VelocityField v(grid);
  for (int j = 0; j < grid.n(); ++j) {
    const double y = grid.coord(j);
    for (int i = 0; i < grid.n(); ++i) {
      const double x = grid.coord(i);
      const double r = std::hypot(x, y);
      if (r == 0.0) continue;
      const double s = azimuthal_speed(r, t) / r;
      v.c1[grid.index(i, j)] = -y * s;
      v.c2[grid.index(i, j)] = x * s;
    }
  }
  return v;
}

}  // namespace vortlab

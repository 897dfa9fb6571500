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

#include <array>

#include "vortlab/fields.hpp"

namespace vortlab {

using Point = std::array<double, 2>;

// Isotropic Gaussian with per-coordinate variance `variance`.
double gaussian_density(double x, double y, Point center, double variance, double mass = 1.0);

ScalarField gaussian_field(const Grid2D& grid, Point center, double variance, double mass = 1.0);

// Lamb-Oseen vortex of unit circulation: the exact self-similar solution
// emanating from a point vortex, u(t) = Gaussian of variance 2 nu t.
struct LambOseen {
  double nu;
  double t0 = 0.0;  // virtual origin: the profile at solver time t is the vortex at t0 + t

  double variance(double t) const { return 2.0 * nu * (t0 + t); }
  double vorticity(double x, double y, double t) const;
  // Azimuthal speed at radius r.
  double azimuthal_speed(double r, double t) const;
  ScalarField field(const Grid2D& grid, double t) const;
  VelocityField velocity(const Grid2D& grid, double t) const;
};

}  // namespace vortlab

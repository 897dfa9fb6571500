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
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "vortlab/fft.hpp"
#include "vortlab/grid.hpp"

namespace vortlab {

// Real scalar field on a Grid2D. Values are immutable after construction;
// an optional spectral cache travels with the value.
class ScalarField {
 public:
  explicit ScalarField(Grid2D grid);
  ScalarField(Grid2D grid, std::vector<double> values);

  static ScalarField from_function(const Grid2D& grid,
                                   const std::function<double(double, double)>& f);

  const Grid2D& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double operator[](std::size_t k) const { return values_[k]; }

  bool has_spectrum() const { return spectrum_ != nullptr; }
  // Cached spectrum, or a fresh forward transform.
  std::vector<cplx> spectrum() const;

  ScalarField with_spectrum(std::vector<cplx> spectrum) const;

  double min() const;
  double max() const;
  double max_abs() const;

  ScalarField operator+(const ScalarField& other) const;
  ScalarField operator-(const ScalarField& other) const;
  ScalarField operator*(double s) const;

 private:
  Grid2D grid_;
  std::vector<double> values_;
  std::shared_ptr<const std::vector<cplx>> spectrum_;
};

struct VelocityField {
  Grid2D grid;
  std::vector<double> c1;
  std::vector<double> c2;

  explicit VelocityField(Grid2D g) : grid(g), c1(g.size(), 0.0), c2(g.size(), 0.0) {}
  VelocityField(Grid2D g, std::vector<double> a, std::vector<double> b);

  double max_speed() const;
  VelocityField operator+(const VelocityField& other) const;
  VelocityField operator-(const VelocityField& other) const;
  VelocityField operator*(double s) const;
};

// Velocity gradient: component(i, j) holds d_j K^i, i, j in {0, 1}.
struct TensorField {
  Grid2D grid;
  std::array<std::vector<double>, 4> c;

  explicit TensorField(Grid2D g);
  std::vector<double>& component(int i, int j) { return c[2 * i + j]; }
  const std::vector<double>& component(int i, int j) const { return c[2 * i + j]; }
};

// --- spectral transforms --------------------------------------------------

ScalarField to_spectral(const ScalarField& f);
ScalarField from_spectral(const Grid2D& grid, std::span<const cplx> spectrum);

// Applies a real multiplier m(xi1, xi2) mode-wise.
ScalarField apply_multiplier(const ScalarField& f,
                             const std::function<double(double, double)>& symbol);

// e^{nu tau Delta}
ScalarField heat_semigroup(const ScalarField& f, double tau, double nu);

// Phi_eps(f) = (eps I - Delta)^{-1} f
ScalarField resolvent(const ScalarField& f, double eps);

// Periodic spectral calculus. Unpaired Nyquist modes are dropped by odd
// derivatives so that outputs stay real.
VelocityField spectral_gradient(const ScalarField& f);
ScalarField spectral_divergence(const VelocityField& v);
ScalarField spectral_curl(const VelocityField& v);
ScalarField spectral_laplacian(const ScalarField& f);

// Removes the unpaired Nyquist row and column.
ScalarField drop_nyquist(const ScalarField& f);

// 2/3-rule truncation of the spectrum.
ScalarField dealias(const ScalarField& f);

// Spectral interpolation / restriction between nested grids of equal box size.
ScalarField resample(const ScalarField& f, const Grid2D& target);

// --- norms and integrals --------------------------------------------------

// Midpoint rule: (sum |f|^p dx^2)^{1/p}; p = inf gives the grid max.
double lp_norm(const ScalarField& f, double p);
double lp_norm(const VelocityField& v, double p);
double lp_norm(const TensorField& t, double p);

double integral(const ScalarField& f);
double inner_product(const ScalarField& f, const ScalarField& g);

// Surrogate H^{-1} norm with multiplier (1 + |xi|^2)^{-1/2}. Diagnostic only.
double h_minus1_norm(const ScalarField& f);

inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

// Largest |f| within four cells of the box boundary, relative to max |f|.
double boundary_fraction(const ScalarField& f);

// Emits a warning when boundary_fraction exceeds 1e-10.
bool check_truncation(const ScalarField& f, const char* what);

}  // namespace vortlab

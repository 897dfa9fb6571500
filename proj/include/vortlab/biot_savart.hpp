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

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "vortlab/fields.hpp"
#include "vortlab/profiles.hpp"

namespace vortlab {

// Biot-Savart kernel k(x) = grad^perp E(x) = (-x2, x1) / (2 pi |x|^2),
// E(x) = ln|x| / (2 pi). Throws std::domain_error at x = 0.
Point kernel_eval(Point x);

// Gaussian blob k_delta(x) = k(x) (1 - exp(-|x|^2 / delta^2)); zero at the origin.
Point blob_kernel_eval(Point x, double delta);

// ---------------------------------------------------------------------------
// Free-space K(u) on the grid.
//
// The field is zero-padded to a (2n)^2 grid and convolved with tabulated
// kernels. Each table is the Green's function ln|x|/(2 pi) truncated at
// R = sqrt(2) L, differentiated in Fourier space on a (4n)^2 grid using the
// closed-form transform of the truncated kernel
//
//   G_R^(rho) = (R rho ln R J1(R rho) - 1 + J0(R rho)) / rho^2,
//
// then windowed to the offsets reachable from the box. For band-limited u
// this reproduces the whole-plane convolution to spectral accuracy.
// ---------------------------------------------------------------------------

class FreeSpaceKernels {
 public:
  // Tables are cached per (L, n) in memory, and on disk when the
  // VORTLAB_KERNEL_CACHE directory is set.
  static std::shared_ptr<const FreeSpaceKernels> get(const Grid2D& grid);

  explicit FreeSpaceKernels(const Grid2D& grid);

  const Grid2D& grid() const { return grid_; }
  double truncation_radius() const { return radius_; }

  enum Table { kK1 = 0, kK2, kD1K1, kD2K1, kD1K2, kTableCount };

  // Convolves u with the selected tables; returns one real n x n array per table.
  std::vector<std::vector<double>> apply(const ScalarField& u,
                                         std::initializer_list<Table> tables) const;

  // Content hash of the tables, used as the disk-cache integrity check.
  std::uint64_t content_hash() const;

 private:
  FreeSpaceKernels(const Grid2D& grid, bool compute);
  void compute();

  Grid2D grid_;
  double radius_;
  // Half spectra on the doubled grid, (2n) x (n + 1).
  std::vector<std::vector<cplx>> tables_;

  friend bool load_kernel_tables(FreeSpaceKernels&, const std::string&);
  friend void save_kernel_tables(const FreeSpaceKernels&, const std::string&);
};

// y = K(u).
VelocityField biot_savart_field(const ScalarField& u);

// grad K(u), component(i, j) = d_j K^i.
TensorField gradient_velocity(const ScalarField& u);

// rho_p(u) = |grad K(u)|_p / |u|_p with the pointwise Frobenius norm.
struct GradientRatios {
  double rho2;
  double rho4;
};
GradientRatios gradient_ratios(const ScalarField& u);

// Divergence and curl of K(u), assembled from the gradient tables.
struct DivCurl {
  ScalarField divergence;
  ScalarField curl;
};
DivCurl velocity_div_curl(const ScalarField& u);

// ---------------------------------------------------------------------------
// Periodic operators, applied mode-wise with the mean mode excluded.
// ---------------------------------------------------------------------------

// Torus K: multiplier (i xi2, -i xi1) / |xi|^2, zero on the mean mode.
VelocityField biot_savart_periodic(const ScalarField& z);

// K_eps(z) = grad^perp Phi_eps(z): multiplier (-i xi2, i xi1) / (eps + |xi|^2).
// Note K_eps -> -K as eps -> 0.
VelocityField k_epsilon(const ScalarField& z, double eps);

// grad^perp g_eps(x) = -k(x) m(eps |x|^2) for the resolvent kernel g_eps of
// (eps - Delta)^{-1}, with m(a) = sqrt(a) K1(sqrt(a)) in (0, 1].
double resolvent_kernel_weight(double a);
Point resolvent_kernel_gradient(Point x, double eps);

}  // namespace vortlab

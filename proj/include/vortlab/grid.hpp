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

namespace vortlab {

// Uniform periodic grid on [-L/2, L/2)^2. Node (i, j) sits at
// (-L/2 + i*dx, -L/2 + j*dx); storage is row-major with j (the x2 index)
// as the slow axis.
class Grid2D {
 public:
  Grid2D(double box_size, int resolution);

  double box_size() const { return box_size_; }
  int n() const { return n_; }
  double dx() const { return box_size_ / n_; }
  double cell_area() const { return dx() * dx(); }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }

  double coord(int i) const { return -0.5 * box_size_ + i * dx(); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n_ + i; }

  // Angular wavenumber of storage index k: 2*pi/L * {0..n/2-1, -n/2..-1}.
  double wavenumber(int k) const;
  bool is_nyquist(int k) const { return k == n_ / 2; }

  bool operator==(const Grid2D& other) const = default;

 private:
  double box_size_;
  int n_;
};

Grid2D make_grid(double box_size, int resolution);

bool is_power_of_two(int n);

}  // namespace vortlab

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

#include "vortlab/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "vortlab/fft.hpp"

namespace vortlab {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

Grid2D::Grid2D(double box_size, int resolution) : box_size_(box_size), n_(resolution) {
  if (!(box_size > 0.0) || !std::isfinite(box_size)) {
    throw std::invalid_argument("grid: box size must be positive and finite, got " +
                                std::to_string(box_size));
  }
  if (resolution < 16 || !is_power_of_two(resolution)) {
    throw std::invalid_argument("grid: resolution must be a power of two >= 16, got " +
                                std::to_string(resolution));
  }
}

double Grid2D::wavenumber(int k) const {
  return 2.0 * std::numbers::pi / box_size_ * fft::signed_index(k, n_);
}

Grid2D make_grid(double box_size, int resolution) { return Grid2D(box_size, resolution); }

}  // namespace vortlab

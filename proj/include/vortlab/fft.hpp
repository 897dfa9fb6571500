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

#include <complex>
#include <span>
#include <vector>

namespace vortlab {

using cplx = std::complex<double>;

// Square 2D transforms over row-major n x n arrays (x2 is the slow axis).
//
// Normalization: forward is unnormalized, inverse carries 1/n^2, so
// inverse(forward(f)) == f.
namespace fft {

std::vector<cplx> forward(std::span<const double> values, int n);
std::vector<cplx> forward(std::span<const cplx> values, int n);
std::vector<cplx> inverse(std::span<const cplx> spectrum, int n);
std::vector<double> inverse_real(std::span<const cplx> spectrum, int n);

// Half-spectrum real transforms, layout n x (n/2 + 1).
std::vector<cplx> forward_r2c(std::span<const double> values, int n);
std::vector<double> inverse_c2r(std::span<const cplx> half_spectrum, int n);

inline int half_width(int n) { return n / 2 + 1; }

// Signed frequency index of storage index i: 0..n/2-1, -n/2..-1.
inline int signed_index(int i, int n) { return i < n / 2 ? i : i - n; }

}  // namespace fft
}  // namespace vortlab

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

#include "vortlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace vortlab::fft {
namespace {

enum class Kind { kForward, kBackward, kR2C, kC2R };

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
 public:
  fftw_plan get(Kind kind, int n) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_tuple(kind, n);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    const std::size_t full = static_cast<std::size_t>(n) * n;
    const std::size_t half = static_cast<std::size_t>(n) * half_width(n);
    fftw_plan plan = nullptr;
    switch (kind) {
      case Kind::kForward:
      case Kind::kBackward: {
        auto* in = fftw_alloc_complex(full);
        auto* out = fftw_alloc_complex(full);
        plan = fftw_plan_dft_2d(n, n, in, out,
                                kind == Kind::kForward ? FFTW_FORWARD : FFTW_BACKWARD, flags);
        fftw_free(in);
        fftw_free(out);
        break;
      }
      case Kind::kR2C: {
        auto* in = fftw_alloc_real(full);
        auto* out = fftw_alloc_complex(half);
        plan = fftw_plan_dft_r2c_2d(n, n, in, out, flags);
        fftw_free(in);
        fftw_free(out);
        break;
      }
      case Kind::kC2R: {
        auto* in = fftw_alloc_complex(half);
        auto* out = fftw_alloc_real(full);
        plan = fftw_plan_dft_c2r_2d(n, n, in, out, flags);
        fftw_free(in);
        fftw_free(out);
        break;
      }
    }
    if (plan == nullptr) throw std::runtime_error("fftw: plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<Kind, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

void check_size(std::size_t got, std::size_t want) {
  if (got != want) throw std::invalid_argument("fft: array size does not match n");
}

}  // namespace

std::vector<cplx> forward(std::span<const double> values, int n) {
  check_size(values.size(), static_cast<std::size_t>(n) * n);
  std::vector<cplx> in(values.begin(), values.end());
  return forward(std::span<const cplx>(in), n);
}

std::vector<cplx> forward(std::span<const cplx> values, int n) {
  check_size(values.size(), static_cast<std::size_t>(n) * n);
  std::vector<cplx> in(values.begin(), values.end());
  std::vector<cplx> out(in.size());
  fftw_execute_dft(cache().get(Kind::kForward, n), as_fftw(in.data()), as_fftw(out.data()));
  return out;
}

std::vector<cplx> inverse(std::span<const cplx> spectrum, int n) {
  check_size(spectrum.size(), static_cast<std::size_t>(n) * n);
  std::vector<cplx> in(spectrum.begin(), spectrum.end());
  std::vector<cplx> out(in.size());
  fftw_execute_dft(cache().get(Kind::kBackward, n), as_fftw(in.data()), as_fftw(out.data()));
  const double scale = 1.0 / (static_cast<double>(n) * n);
  for (auto& v : out) v *= scale;
  return out;
}

std::vector<double> inverse_real(std::span<const cplx> spectrum, int n) {
  auto c = inverse(spectrum, n);
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

std::vector<cplx> forward_r2c(std::span<const double> values, int n) {
  check_size(values.size(), static_cast<std::size_t>(n) * n);
  std::vector<double> in(values.begin(), values.end());
  std::vector<cplx> out(static_cast<std::size_t>(n) * half_width(n));
  fftw_execute_dft_r2c(cache().get(Kind::kR2C, n), in.data(), as_fftw(out.data()));
  return out;
}

std::vector<double> inverse_c2r(std::span<const cplx> half_spectrum, int n) {
  check_size(half_spectrum.size(), static_cast<std::size_t>(n) * half_width(n));
  // c2r overwrites its input.
  std::vector<cplx> in(half_spectrum.begin(), half_spectrum.end());
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  fftw_execute_dft_c2r(cache().get(Kind::kC2R, n), as_fftw(in.data()), out.data());
  const double scale = 1.0 / (static_cast<double>(n) * n);
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace vortlab::fft

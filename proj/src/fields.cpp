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

#include "vortlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "vortlab/log.hpp"

namespace vortlab {
namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::domain_error(std::string(what) + ": non-finite value");
  }
}

void require_same_grid(const Grid2D& a, const Grid2D& b) {
  if (!(a == b)) throw std::invalid_argument("fields live on different grids");
}

template <typename Symbol>
std::vector<cplx> multiply_modes(std::vector<cplx> spec, const Grid2D& g, Symbol&& symbol) {
  const int n = g.n();
  for (int l = 0; l < n; ++l) {
    const double xi2 = g.wavenumber(l);
    for (int k = 0; k < n; ++k) {
      const double xi1 = g.wavenumber(k);
      spec[static_cast<std::size_t>(l) * n + k] *= symbol(k, l, xi1, xi2);
    }
  }
  return spec;
}

}  // namespace

// --- ScalarField ----------------------------------------------------------

ScalarField::ScalarField(Grid2D grid) : grid_(grid), values_(grid.size(), 0.0) {}

ScalarField::ScalarField(Grid2D grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw std::invalid_argument("field: size mismatch");
  require_finite(values_, "field");
}

ScalarField ScalarField::from_function(const Grid2D& grid,
                                       const std::function<double(double, double)>& f) {
  std::vector<double> v(grid.size());
  for (int j = 0; j < grid.n(); ++j) {
    const double y = grid.coord(j);
    for (int i = 0; i < grid.n(); ++i) v[grid.index(i, j)] = f(grid.coord(i), y);
  }
  return ScalarField(grid, std::move(v));
}

std::vector<cplx> ScalarField::spectrum() const {
  if (spectrum_) return *spectrum_;
  return fft::forward(std::span<const double>(values_), grid_.n());
}

ScalarField ScalarField::with_spectrum(std::vector<cplx> spectrum) const {
  if (spectrum.size() != grid_.size()) throw std::invalid_argument("spectrum: size mismatch");
  ScalarField out = *this;
  out.spectrum_ = std::make_shared<const std::vector<cplx>>(std::move(spectrum));
  return out;
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

ScalarField ScalarField::operator+(const ScalarField& other) const {
  require_same_grid(grid_, other.grid_);
  std::vector<double> v(values_);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] += other.values_[k];
  return ScalarField(grid_, std::move(v));
}

ScalarField ScalarField::operator-(const ScalarField& other) const {
  require_same_grid(grid_, other.grid_);
  std::vector<double> v(values_);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] -= other.values_[k];
  return ScalarField(grid_, std::move(v));
}

ScalarField ScalarField::operator*(double s) const {
  std::vector<double> v(values_);
  for (auto& x : v) x *= s;
  return ScalarField(grid_, std::move(v));
}

// --- VelocityField / TensorField -------------------------------------------

VelocityField::VelocityField(Grid2D g, std::vector<double> a, std::vector<double> b)
    : grid(g), c1(std::move(a)), c2(std::move(b)) {
  if (c1.size() != g.size() || c2.size() != g.size()) {
    throw std::invalid_argument("velocity: size mismatch");
  }
  require_finite(c1, "velocity");
  require_finite(c2, "velocity");
}

double VelocityField::max_speed() const {
  double m = 0.0;
  for (std::size_t k = 0; k < c1.size(); ++k) m = std::max(m, std::hypot(c1[k], c2[k]));
  return m;
}

VelocityField VelocityField::operator+(const VelocityField& o) const {
  require_same_grid(grid, o.grid);
  VelocityField out = *this;
  for (std::size_t k = 0; k < c1.size(); ++k) {
    out.c1[k] += o.c1[k];
    out.c2[k] += o.c2[k];
  }
  return out;
}

VelocityField VelocityField::operator-(const VelocityField& o) const { return *this + o * -1.0; }

VelocityField VelocityField::operator*(double s) const {
  VelocityField out = *this;
  for (std::size_t k = 0; k < c1.size(); ++k) {
    out.c1[k] *= s;
    out.c2[k] *= s;
  }
  return out;
}

TensorField::TensorField(Grid2D g) : grid(g) {
  for (auto& comp : c) comp.assign(g.size(), 0.0);
}

// --- transforms -----------------------------------------------------------

ScalarField to_spectral(const ScalarField& f) {
  if (f.has_spectrum()) return f;
  return f.with_spectrum(f.spectrum());
}

ScalarField from_spectral(const Grid2D& grid, std::span<const cplx> spectrum) {
  std::vector<cplx> spec(spectrum.begin(), spectrum.end());
  ScalarField out(grid, fft::inverse_real(spec, grid.n()));
  return out.with_spectrum(std::move(spec));
}

ScalarField apply_multiplier(const ScalarField& f,
                             const std::function<double(double, double)>& symbol) {
  auto spec = multiply_modes(f.spectrum(), f.grid(),
                             [&](int, int, double a, double b) { return symbol(a, b); });
  return from_spectral(f.grid(), spec);
}

ScalarField heat_semigroup(const ScalarField& f, double tau, double nu) {
  if (!(tau >= 0.0)) throw std::invalid_argument("heat_semigroup: negative duration");
  if (!(nu > 0.0)) throw std::invalid_argument("heat_semigroup: viscosity must be positive");
  if (tau == 0.0) return f;
  return apply_multiplier(f, [=](double a, double b) { return std::exp(-nu * tau * (a * a + b * b)); });
}

ScalarField resolvent(const ScalarField& f, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("resolvent: eps must be positive");
  return apply_multiplier(f, [=](double a, double b) { return 1.0 / (eps + a * a + b * b); });
}

VelocityField spectral_gradient(const ScalarField& f) {
  const Grid2D& g = f.grid();
  const auto spec = f.spectrum();
  auto d1 = multiply_modes(std::vector<cplx>(spec.begin(), spec.end()), g,
                           [&](int k, int, double a, double) {
                             return g.is_nyquist(k) ? cplx(0.0) : cplx(0.0, a);
                           });
  auto d2 = multiply_modes(std::vector<cplx>(spec.begin(), spec.end()), g,
                           [&](int, int l, double, double b) {
                             return g.is_nyquist(l) ? cplx(0.0) : cplx(0.0, b);
                           });
  return VelocityField(g, fft::inverse_real(d1, g.n()), fft::inverse_real(d2, g.n()));
}

ScalarField spectral_divergence(const VelocityField& v) {
  const Grid2D& g = v.grid;
  auto s1 = fft::forward(std::span<const double>(v.c1), g.n());
  auto s2 = fft::forward(std::span<const double>(v.c2), g.n());
  std::vector<cplx> out(g.size());
  for (int l = 0; l < g.n(); ++l) {
    for (int k = 0; k < g.n(); ++k) {
      const auto idx = g.index(k, l);
      const cplx i1 = g.is_nyquist(k) ? cplx(0.0) : cplx(0.0, g.wavenumber(k));
      const cplx i2 = g.is_nyquist(l) ? cplx(0.0) : cplx(0.0, g.wavenumber(l));
      out[idx] = i1 * s1[idx] + i2 * s2[idx];
    }
  }
  return from_spectral(g, out);
}

ScalarField spectral_curl(const VelocityField& v) {
  const Grid2D& g = v.grid;
  auto s1 = fft::forward(std::span<const double>(v.c1), g.n());
  auto s2 = fft::forward(std::span<const double>(v.c2), g.n());
  std::vector<cplx> out(g.size());
  for (int l = 0; l < g.n(); ++l) {
    for (int k = 0; k < g.n(); ++k) {
      const auto idx = g.index(k, l);
      const cplx i1 = g.is_nyquist(k) ? cplx(0.0) : cplx(0.0, g.wavenumber(k));
      const cplx i2 = g.is_nyquist(l) ? cplx(0.0) : cplx(0.0, g.wavenumber(l));
      out[idx] = i1 * s2[idx] - i2 * s1[idx];
    }
  }
  return from_spectral(g, out);
}

ScalarField spectral_laplacian(const ScalarField& f) {
  return apply_multiplier(f, [](double a, double b) { return -(a * a + b * b); });
}

ScalarField drop_nyquist(const ScalarField& f) {
  const Grid2D& g = f.grid();
  auto spec = multiply_modes(f.spectrum(), g, [&](int k, int l, double, double) {
    return (g.is_nyquist(k) || g.is_nyquist(l)) ? 0.0 : 1.0;
  });
  return from_spectral(g, spec);
}

ScalarField dealias(const ScalarField& f) {
  const Grid2D& g = f.grid();
  const int cutoff = g.n() / 3;
  auto spec = multiply_modes(f.spectrum(), g, [&](int k, int l, double, double) {
    return (std::abs(fft::signed_index(k, g.n())) > cutoff ||
            std::abs(fft::signed_index(l, g.n())) > cutoff)
               ? 0.0
               : 1.0;
  });
  return from_spectral(g, spec);
}

ScalarField resample(const ScalarField& f, const Grid2D& target) {
  const Grid2D& src = f.grid();
  if (src == target) return f;
  if (src.box_size() != target.box_size()) {
    throw std::invalid_argument("resample: box sizes differ");
  }
  const int ns = src.n();
  const int nt = target.n();
  if (nt < ns) {
    // Coarse nodes are a subset of the fine nodes.
    const int stride = ns / nt;
    std::vector<double> v(target.size());
    for (int j = 0; j < nt; ++j)
      for (int i = 0; i < nt; ++i) v[target.index(i, j)] = f(i * stride, j * stride);
    return ScalarField(target, std::move(v));
  }
  // Zero-padding; the source Nyquist mode is split symmetrically.
  const auto spec = f.spectrum();
  std::vector<cplx> out(target.size(), cplx(0.0));
  const double scale = static_cast<double>(nt) * nt / (static_cast<double>(ns) * ns);
  for (int l = 0; l < ns; ++l) {
    const int sl = fft::signed_index(l, ns);
    for (int k = 0; k < ns; ++k) {
      const int sk = fft::signed_index(k, ns);
      const cplx value = spec[src.index(k, l)] * scale;
      const double wk = (sk == -ns / 2) ? 0.5 : 1.0;
      const double wl = (sl == -ns / 2) ? 0.5 : 1.0;
      auto place = [&](int a, int b, double w) {
        const int ti = (a + nt) % nt;
        const int tj = (b + nt) % nt;
        out[target.index(ti, tj)] += value * w;
      };
      place(sk, sl, wk * wl);
      if (sk == -ns / 2) place(-sk, sl, wk * wl);
      if (sl == -ns / 2) place(sk, -sl, wk * wl);
      if (sk == -ns / 2 && sl == -ns / 2) place(-sk, -sl, wk * wl);
    }
  }
  return from_spectral(target, out);
}

// --- norms ----------------------------------------------------------------

namespace {

template <typename Magnitude>
double grid_norm(std::size_t count, double cell_area, double p, Magnitude&& mag) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: exponent must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t k = 0; k < count; ++k) m = std::max(m, mag(k));
    return m;
  }
  double sum = 0.0;
  if (p == 1.0) {
    for (std::size_t k = 0; k < count; ++k) sum += mag(k);
    return sum * cell_area;
  }
  if (p == 2.0) {
    for (std::size_t k = 0; k < count; ++k) {
      const double m = mag(k);
      sum += m * m;
    }
    return std::sqrt(sum * cell_area);
  }
  for (std::size_t k = 0; k < count; ++k) sum += std::pow(mag(k), p);
  return std::pow(sum * cell_area, 1.0 / p);
}

}  // namespace

double lp_norm(const ScalarField& f, double p) {
  auto v = f.values();
  return grid_norm(v.size(), f.grid().cell_area(), p, [&](std::size_t k) { return std::abs(v[k]); });
}

double lp_norm(const VelocityField& f, double p) {
  return grid_norm(f.c1.size(), f.grid.cell_area(), p,
                   [&](std::size_t k) { return std::hypot(f.c1[k], f.c2[k]); });
}

double lp_norm(const TensorField& t, double p) {
  return grid_norm(t.c[0].size(), t.grid.cell_area(), p, [&](std::size_t k) {
    double s = 0.0;
    for (const auto& comp : t.c) s += comp[k] * comp[k];
    return std::sqrt(s);
  });
}

double integral(const ScalarField& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return sum * f.grid().cell_area();
}

double inner_product(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid(), g.grid());
  double sum = 0.0;
  auto a = f.values();
  auto b = g.values();
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
  return sum * f.grid().cell_area();
}

double h_minus1_norm(const ScalarField& f) {
  const Grid2D& g = f.grid();
  const auto spec = f.spectrum();
  double sum = 0.0;
  for (int l = 0; l < g.n(); ++l) {
    const double b = g.wavenumber(l);
    for (int k = 0; k < g.n(); ++k) {
      const double a = g.wavenumber(k);
      sum += std::norm(spec[g.index(k, l)]) / (1.0 + a * a + b * b);
    }
  }
  // Parseval: sum |f|^2 dx^2 = dx^2 / n^2 sum |f_hat|^2.
  return std::sqrt(sum * g.cell_area() / static_cast<double>(g.size()));
}

double boundary_fraction(const ScalarField& f) {
  const Grid2D& g = f.grid();
  const int band = 4;
  const double peak = f.max_abs();
  if (peak == 0.0) return 0.0;
  double edge = 0.0;
  for (int j = 0; j < g.n(); ++j) {
    for (int i = 0; i < g.n(); ++i) {
      const bool near = i < band || j < band || i >= g.n() - band || j >= g.n() - band;
      if (near) edge = std::max(edge, std::abs(f(i, j)));
    }
  }
  return edge / peak;
}

bool check_truncation(const ScalarField& f, const char* what) {
  const double frac = boundary_fraction(f);
  if (frac > 1e-10) {
    std::ostringstream msg;
    msg << what << ": field reaches " << frac
        << " of its maximum near the box boundary; truncation error is not controlled";
    log::warn(msg.str());
    return false;
  }
  return true;
}

}  // namespace vortlab

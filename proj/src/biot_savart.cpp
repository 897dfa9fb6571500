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

#include "vortlab/biot_savart.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "vortlab/field_io.hpp"
#include "vortlab/log.hpp"

namespace vortlab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::uint32_t kTableFormatVersion = 1;
}  // namespace

Point kernel_eval(Point x) {
  const double r2 = x[0] * x[0] + x[1] * x[1];
  if (r2 == 0.0) throw std::domain_error("kernel_eval: singular at the origin");
  return {-x[1] / (kTwoPi * r2), x[0] / (kTwoPi * r2)};
}

Point blob_kernel_eval(Point x, double delta) {
  const double r2 = x[0] * x[0] + x[1] * x[1];
  if (r2 == 0.0) return {0.0, 0.0};
  const double s = -std::expm1(-r2 / (delta * delta)) / (kTwoPi * r2);
  return {-x[1] * s, x[0] * s};
}

// --- free-space tables ------------------------------------------------------

FreeSpaceKernels::FreeSpaceKernels(const Grid2D& grid) : FreeSpaceKernels(grid, true) {}

FreeSpaceKernels::FreeSpaceKernels(const Grid2D& grid, bool do_compute)
    : grid_(grid), radius_(std::numbers::sqrt2 * grid.box_size()) {
  if (do_compute) compute();
}

void FreeSpaceKernels::compute() {
  const int n = grid_.n();
  const int m4 = 4 * n;
  const int m2 = 2 * n;
  const double dx = grid_.dx();
  const double period = 4.0 * grid_.box_size();
  const double dxi = kTwoPi / period;
  const double R = radius_;
  const double lnR = std::log(R);

  // G_R^ depends on |xi|^2 = dxi^2 (k1^2 + k2^2) only.
  const std::size_t max_sq = 2 * static_cast<std::size_t>(m4 / 2) * (m4 / 2) + 1;
  std::vector<double> ghat(max_sq, std::numeric_limits<double>::quiet_NaN());
  auto ghat_at = [&](int k1, int k2) {
    const std::size_t sq = static_cast<std::size_t>(k1 * k1) + static_cast<std::size_t>(k2 * k2);
    double& slot = ghat[sq];
    if (std::isnan(slot)) {
      if (sq == 0) {
        slot = R * R * (0.5 * lnR - 0.25);
      } else {
        const double rho = dxi * std::sqrt(static_cast<double>(sq));
        const double z = R * rho;
        slot = (z * lnR * std::cyl_bessel_j(1.0, z) - 1.0 + std::cyl_bessel_j(0.0, z)) /
               (rho * rho);
      }
    }
    return slot;
  };

  tables_.assign(kTableCount, {});
  std::vector<cplx> symbol(static_cast<std::size_t>(m4) * m4);
  for (int table = 0; table < kTableCount; ++table) {
    for (int l = 0; l < m4; ++l) {
      const int s2 = fft::signed_index(l, m4);
      const bool nyq2 = (l == m4 / 2);
      const double xi2 = dxi * s2;
      for (int k = 0; k < m4; ++k) {
        const int s1 = fft::signed_index(k, m4);
        const bool nyq1 = (k == m4 / 2);
        const double xi1 = dxi * s1;
        const double g = ghat_at(s1, s2);
        cplx v;
        switch (table) {
          case kK1: v = nyq2 ? cplx(0.0) : cplx(0.0, -xi2 * g); break;
          case kK2: v = nyq1 ? cplx(0.0) : cplx(0.0, xi1 * g); break;
          case kD1K1: v = (nyq1 || nyq2) ? 0.0 : xi1 * xi2 * g; break;
          case kD2K1: v = xi2 * xi2 * g; break;
          case kD1K2: v = -xi1 * xi1 * g; break;
        }
        symbol[static_cast<std::size_t>(l) * m4 + k] = v;
      }
    }
    // Kernel samples: (1/period^2) sum_xi symbol e^{i xi x}.
    auto samples = fft::inverse(symbol, m4);
    const double to_samples = static_cast<double>(m4) * m4 / (period * period);

    std::vector<double> window(static_cast<std::size_t>(m2) * m2);
    for (int b = -n; b < n; ++b) {
      for (int a = -n; a < n; ++a) {
        const auto src = static_cast<std::size_t>((b + m4) % m4) * m4 + (a + m4) % m4;
        const auto dst = static_cast<std::size_t>((b + m2) % m2) * m2 + (a + m2) % m2;
        window[dst] = samples[src].real() * to_samples * dx * dx;
      }
    }
    tables_[table] = fft::forward_r2c(window, m2);
  }
}

std::vector<std::vector<double>> FreeSpaceKernels::apply(
    const ScalarField& u, std::initializer_list<Table> tables) const {
  if (!(u.grid() == grid_)) throw std::invalid_argument("kernels: grid mismatch");
  const int n = grid_.n();
  const int m2 = 2 * n;
  std::vector<double> padded(static_cast<std::size_t>(m2) * m2, 0.0);
  const auto values = u.values();
  for (int j = 0; j < n; ++j) {
    std::memcpy(&padded[static_cast<std::size_t>(j) * m2], &values[grid_.index(0, j)],
                sizeof(double) * n);
  }
  const auto uhat = fft::forward_r2c(padded, m2);

  std::vector<std::vector<double>> out;
  std::vector<cplx> product(uhat.size());
  for (Table t : tables) {
    const auto& table = tables_[t];
    for (std::size_t k = 0; k < product.size(); ++k) product[k] = uhat[k] * table[k];
    const auto full = fft::inverse_c2r(product, m2);
    std::vector<double> cropped(grid_.size());
    for (int j = 0; j < n; ++j) {
      std::memcpy(&cropped[grid_.index(0, j)], &full[static_cast<std::size_t>(j) * m2],
                  sizeof(double) * n);
    }
    out.push_back(std::move(cropped));
  }
  return out;
}

std::uint64_t FreeSpaceKernels::content_hash() const {
  std::uint64_t h = 0;
  for (const auto& t : tables_) {
    h ^= fnv1a(std::string_view(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(cplx)));
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string cache_file_name(const Grid2D& g) {
  std::string key = "bs-freespace-v" + std::to_string(kTableFormatVersion) + "-L" +
                    std::to_string(g.box_size()) + "-n" + std::to_string(g.n());
  return "bs_" + hex64(fnv1a(key)) + ".bin";
}

}  // namespace

bool load_kernel_tables(FreeSpaceKernels& k, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::uint32_t version = 0;
  double box = 0.0;
  std::int32_t n = 0;
  std::uint64_t hash = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&box), sizeof(box));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&hash), sizeof(hash));
  if (!in || version != kTableFormatVersion || box != k.grid_.box_size() || n != k.grid_.n()) {
    return false;
  }
  const std::size_t len = static_cast<std::size_t>(2 * n) * (n + 1);
  k.tables_.assign(FreeSpaceKernels::kTableCount, std::vector<cplx>(len));
  for (auto& t : k.tables_) in.read(reinterpret_cast<char*>(t.data()), len * sizeof(cplx));
  if (!in || k.content_hash() != hash) {
    log::warn("kernel cache " + path + " failed its integrity check; recomputing");
    return false;
  }
  return true;
}

void save_kernel_tables(const FreeSpaceKernels& k, const std::string& path) {
  std::string buf;
  const std::uint32_t version = kTableFormatVersion;
  const double box = k.grid_.box_size();
  const std::int32_t n = k.grid_.n();
  const std::uint64_t hash = k.content_hash();
  buf.append(reinterpret_cast<const char*>(&version), sizeof(version));
  buf.append(reinterpret_cast<const char*>(&box), sizeof(box));
  buf.append(reinterpret_cast<const char*>(&n), sizeof(n));
  buf.append(reinterpret_cast<const char*>(&hash), sizeof(hash));
  for (const auto& t : k.tables_) {
    buf.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(cplx));
  }
  write_atomically(path, buf);
}

std::shared_ptr<const FreeSpaceKernels> FreeSpaceKernels::get(const Grid2D& grid) {
  static std::mutex mutex;
  static std::map<std::pair<double, int>, std::shared_ptr<const FreeSpaceKernels>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_pair(grid.box_size(), grid.n());
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  std::shared_ptr<FreeSpaceKernels> tables(new FreeSpaceKernels(grid, false));
  const char* dir = std::getenv("VORTLAB_KERNEL_CACHE");
  bool loaded = false;
  std::string path;
  if (dir != nullptr && *dir != '\0') {
    path = (std::filesystem::path(dir) / cache_file_name(grid)).string();
    loaded = load_kernel_tables(*tables, path);
  }
  if (!loaded) {
    tables->compute();
    if (!path.empty()) {
      try {
        std::filesystem::create_directories(dir);
        save_kernel_tables(*tables, path);
      } catch (const std::exception& e) {
        log::warn(std::string("could not write kernel cache: ") + e.what());
      }
    }
  }
  cache.emplace(key, tables);
  return tables;
}

// --- grid operators -------------------------------------------------------

VelocityField biot_savart_field(const ScalarField& u) {
  auto k = FreeSpaceKernels::get(u.grid());
  auto out = k->apply(u, {FreeSpaceKernels::kK1, FreeSpaceKernels::kK2});
  return VelocityField(u.grid(), std::move(out[0]), std::move(out[1]));
}

TensorField gradient_velocity(const ScalarField& u) {
  auto k = FreeSpaceKernels::get(u.grid());
  auto out = k->apply(u, {FreeSpaceKernels::kD1K1, FreeSpaceKernels::kD2K1,
                          FreeSpaceKernels::kD1K2});
  TensorField t(u.grid());
  t.component(0, 0) = out[0];
  t.component(0, 1) = std::move(out[1]);
  t.component(1, 0) = std::move(out[2]);
  // Trace-free: d2 K^2 = -d1 K^1.
  auto& d22 = t.component(1, 1);
  d22 = std::move(out[0]);
  for (auto& v : d22) v = -v;
  return t;
}

GradientRatios gradient_ratios(const ScalarField& u) {
  const auto grad = gradient_velocity(u);
  const double u2 = lp_norm(u, 2.0);
  const double u4 = lp_norm(u, 4.0);
  if (u2 == 0.0) return {0.0, 0.0};
  return {lp_norm(grad, 2.0) / u2, lp_norm(grad, 4.0) / u4};
}

DivCurl velocity_div_curl(const ScalarField& u) {
  const auto g = gradient_velocity(u);
  std::vector<double> div(u.grid().size());
  std::vector<double> curl(u.grid().size());
  for (std::size_t k = 0; k < div.size(); ++k) {
    div[k] = g.component(0, 0)[k] + g.component(1, 1)[k];
    curl[k] = g.component(1, 0)[k] - g.component(0, 1)[k];
  }
  return {ScalarField(u.grid(), std::move(div)), ScalarField(u.grid(), std::move(curl))};
}

// --- periodic operators -----------------------------------------------------

namespace {

template <typename Weight>
VelocityField perp_gradient_with_weight(const ScalarField& z, Weight&& weight) {
  const Grid2D& g = z.grid();
  const auto spec = z.spectrum();
  std::vector<cplx> a(g.size());
  std::vector<cplx> b(g.size());
  for (int l = 0; l < g.n(); ++l) {
    const double xi2 = g.wavenumber(l);
    for (int k = 0; k < g.n(); ++k) {
      const double xi1 = g.wavenumber(k);
      const auto idx = g.index(k, l);
      const double w = weight(xi1 * xi1 + xi2 * xi2);
      // grad^perp = (-d2, d1)
      a[idx] = g.is_nyquist(l) ? cplx(0.0) : cplx(0.0, -xi2) * w * spec[idx];
      b[idx] = g.is_nyquist(k) ? cplx(0.0) : cplx(0.0, xi1) * w * spec[idx];
    }
  }
  return VelocityField(g, fft::inverse_real(a, g.n()), fft::inverse_real(b, g.n()));
}

}  // namespace

VelocityField biot_savart_periodic(const ScalarField& z) {
  // K = grad^perp (Delta^{-1} z); Delta^{-1} has symbol -1/|xi|^2.
  return perp_gradient_with_weight(z, [](double s) { return s == 0.0 ? 0.0 : -1.0 / s; });
}

VelocityField k_epsilon(const ScalarField& z, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("k_epsilon: eps must be positive");
  return perp_gradient_with_weight(z, [eps](double s) { return 1.0 / (eps + s); });
}

double resolvent_kernel_weight(double a) {
  if (a < 0.0) throw std::invalid_argument("resolvent_kernel_weight: negative argument");
  if (a == 0.0) return 1.0;
  const double s = std::sqrt(a);
  return s * std::cyl_bessel_k(1.0, s);
}

Point resolvent_kernel_gradient(Point x, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("resolvent_kernel_gradient: eps must be positive");
  const auto k = kernel_eval(x);
  const double m = resolvent_kernel_weight(eps * (x[0] * x[0] + x[1] * x[1]));
  return {-k[0] * m, -k[1] * m};
}

}  // namespace vortlab

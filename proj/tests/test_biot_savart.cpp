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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <random>

#include "support.hpp"
#include "vortlab/biot_savart.hpp"
#include "vortlab/point_velocity.hpp"
#include "vortlab/treecode.hpp"

using namespace vortlab;
using vortlab::testing::random_blobs;
using vortlab::testing::random_smooth;
using vortlab::testing::relative_l2;

namespace {

const double kPi = std::numbers::pi;

std::vector<Point> gaussian_cloud(std::size_t n, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<Point> pts(n);
  for (auto& p : pts) p = {g(rng), g(rng)};
  return pts;
}

double field_relative_error(const std::vector<Point>& a, const std::vector<Point>& b) {
  double err = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    err = std::max(err, std::hypot(a[k][0] - b[k][0], a[k][1] - b[k][1]));
    scale = std::max(scale, std::hypot(b[k][0], b[k][1]));
  }
  return err / scale;
}

// m(eps |x|^2) from the heat-kernel representation of the resolvent kernel:
// grad^perp g_eps = -k(x) |x|^2/4 int_0^inf e^{-eps t} e^{-|x|^2/(4t)} t^{-2} dt,
// integrated on t = e^s with the trapezoid rule.
double resolvent_weight_by_quadrature(double r, double eps) {
  const int m = 40000;
  const double lo = -30.0, hi = 12.0, h = (hi - lo) / m;
  double s = 0.0;
  for (int k = 0; k <= m; ++k) {
    const double t = std::exp(lo + k * h);
    const double f = std::exp(-eps * t - r * r / (4.0 * t)) / t;  // t^{-2} dt = t^{-1} ds
    s += (k == 0 || k == m ? 0.5 : 1.0) * f;
  }
  return 0.25 * r * r * s * h;
}

}  // namespace

TEST_CASE("kernel_eval: closed form and symmetries") {
  const auto k = kernel_eval({1.0, 0.0});
  CHECK(k[0] == 0.0);
  CHECK(k[1] == doctest::Approx(0.15915494309189535).epsilon(1e-15));
  CHECK_THROWS_AS(kernel_eval({0.0, 0.0}), std::domain_error);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const Point x{u(rng), u(rng)};
    const auto a = kernel_eval(x);
    const auto b = kernel_eval({-x[0], -x[1]});
    CHECK(a[0] == -b[0]);
    CHECK(a[1] == -b[1]);
    CHECK(std::abs(std::hypot(a[0], a[1]) * 2.0 * kPi * std::hypot(x[0], x[1]) - 1.0) <= 1e-14);
  }
}

TEST_CASE("blob kernel is bounded by C / delta and vanishes at the origin") {
  const double delta = 0.05;
  CHECK(blob_kernel_eval({0.0, 0.0}, delta) == Point{0.0, 0.0});
  // max_s (1 - e^{-s^2}) / s = 0.6382...
  const double bound = 0.6382 / (2.0 * kPi * delta);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int i = 0; i < 1000; ++i) {
    const auto k = blob_kernel_eval({u(rng), u(rng)}, delta);
    CHECK(std::hypot(k[0], k[1]) <= bound);
  }
  const auto far = blob_kernel_eval({1.0, 0.0}, delta);
  CHECK(far[1] == doctest::Approx(kernel_eval({1.0, 0.0})[1]).epsilon(1e-15));
}

TEST_CASE("biot_savart_field: div and curl identities") {
  const auto g = make_grid(20.0, 256);
  const auto u = gaussian_field(g, {0.4, -0.3}, 0.5) + gaussian_field(g, {-1.0, 1.0}, 0.8, -0.4);
  // y has a 1/r tail and is not box-periodic; derivatives come from the
  // differentiated kernel tables.
  const auto dc = velocity_div_curl(u);
  CHECK(lp_norm(dc.divergence, 2.0) <= 1e-10 * lp_norm(u, 2.0));
  CHECK(relative_l2(dc.curl, u) <= 1e-8);
}

TEST_CASE("biot_savart_field: radial Gaussian speed") {
  // Per-coordinate variance s^2: |y|(r) = (1 - e^{-r^2/(2 s^2)}) / (2 pi r).
  // Closed form cross-checked against circulation quadrature (1/r) int_0^r rho u drho.
  const double s2 = 1.0;
  const auto g = make_grid(16.0, 256);
  const auto y = biot_savart_field(gaussian_field(g, {0.0, 0.0}, s2));
  for (double r : {0.5, 1.0, 2.0}) {
    const double closed = (1.0 - std::exp(-r * r / (2.0 * s2))) / (2.0 * kPi * r);
    double circ = 0.0;
    const int m = 20000;
    for (int k = 0; k < m; ++k) {
      const double rho = (k + 0.5) * r / m;
      circ += rho * std::exp(-rho * rho / (2.0 * s2)) / (2.0 * kPi * s2) * (r / m);
    }
    REQUIRE(std::abs(circ * 2.0 * kPi / (2.0 * kPi * r) - closed) < 1e-8);

    // Grid node at (r, 0) exists for these radii on this grid.
    const int i = static_cast<int>(std::lround((r + 8.0) / g.dx()));
    const int j = static_cast<int>(std::lround(8.0 / g.dx()));
    REQUIRE(std::abs(g.coord(i) - r) < 1e-12);
    const auto k = g.index(i, j);
    CHECK(std::abs(y.c1[k]) < 1e-6);
    CHECK(std::abs(y.c2[k] - closed) <= 1e-6);
  }
}

TEST_CASE("biot_savart_field of zero is zero") {
  const auto g = make_grid(10.0, 64);
  const auto y = biot_savart_field(ScalarField(g));
  CHECK(y.max_speed() == 0.0);
}

TEST_CASE("gradient_velocity: trace, curl and the p = 2 bound") {
  const auto g = make_grid(16.0, 128);
  int count = 0;
  for (int seed = 0; seed < 50; ++seed) {
    const auto u = random_blobs(g, 4000 + seed);
    const auto grad = gradient_velocity(u);
    double trace = 0.0, curl_err = 0.0, curl_ref = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      trace = std::max(trace, std::abs(grad.component(0, 0)[k] + grad.component(1, 1)[k]));
      const double c = grad.component(1, 0)[k] - grad.component(0, 1)[k];
      curl_err += (c - u[k]) * (c - u[k]);
      curl_ref += u[k] * u[k];
    }
    REQUIRE(trace <= 1e-10);
    REQUIRE(std::sqrt(curl_err / curl_ref) <= 1e-8);
    REQUIRE(gradient_ratios(u).rho2 <= 1.01);
    ++count;
  }
  CHECK(count == 50);
}

TEST_CASE("Young-type ratio |K z|_4 / |z|_{4/3} stays bounded across a bank") {
  const auto g = make_grid(24.0, 256);
  std::vector<double> ratios;
  for (int seed = 0; seed < 12; ++seed) {
    const auto z = random_blobs(g, 6000 + seed, seed % 2 == 0, 2 + seed % 3);
    ratios.push_back(lp_norm(biot_savart_field(z), 4.0) / lp_norm(z, 4.0 / 3.0));
  }
  for (double var : {0.05, 0.2, 1.0}) {
    ratios.push_back(lp_norm(biot_savart_field(gaussian_field(g, {0, 0}, var)), 4.0) /
                     lp_norm(gaussian_field(g, {0, 0}, var), 4.0 / 3.0));
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  MESSAGE("empirical Young constant: max ratio " << *hi << ", min " << *lo);
  for (double r : ratios) CHECK(std::isfinite(r));
  CHECK(*hi < 1.0);
}

TEST_CASE("k_epsilon: Appendix identity and comparison bound") {
  const auto g = make_grid(20.0, 128);
  const auto z = gaussian_field(g, {0.3, 0.1}, 0.6) - gaussian_field(g, {-0.7, 0.4}, 0.9, 0.5);
  for (double eps : {0.1, 1.0, 10.0}) {
    const auto lhs = k_epsilon(z, eps) + biot_savart_periodic(z) -
                     biot_savart_periodic(resolvent(z, eps)) * eps;
    CHECK(lp_norm(lhs, 2.0) <= 1e-10 * lp_norm(z, 2.0));
  }
  CHECK_THROWS_AS(k_epsilon(z, 0.0), std::invalid_argument);

  const auto bank_grid = make_grid(12.0, 64);
  for (int seed = 0; seed < 50; ++seed) {
    const auto zb = random_smooth(bank_grid, 7000 + seed, 8);
    const double kz = lp_norm(biot_savart_periodic(zb), 2.0);
    for (double eps : {0.01, 0.1, 1.0}) REQUIRE(lp_norm(k_epsilon(zb, eps), 2.0) <= 2.0 * kz);
  }
}

TEST_CASE("k_epsilon converges to -K as eps decreases") {
  const auto g = make_grid(10.0, 64);
  const auto z = random_smooth(g, 42, 6);
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {1.0, 0.1, 0.01}) {
    const double gap = lp_norm(k_epsilon(z, eps) + biot_savart_periodic(z), 2.0);
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("resolvent kernel gradient matches the heat-kernel representation") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> radius(0.1, 5.0), angle(0.0, 2.0 * kPi);
  for (int i = 0; i < 20; ++i) {
    const double r = radius(rng), a = angle(rng);
    const Point x{r * std::cos(a), r * std::sin(a)};
    for (double eps : {0.5, 2.0}) {
      const double m = resolvent_kernel_weight(eps * r * r);
      CHECK(m > 0.0);
      CHECK(m <= 1.0);
      CHECK(std::abs(resolvent_weight_by_quadrature(r, eps) - m) <= 1e-8);
      const auto grad = resolvent_kernel_gradient(x, eps);
      const auto k = kernel_eval(x);
      CHECK(std::abs(grad[0] + k[0] * m) <= 1e-15);
      CHECK(std::abs(grad[1] + k[1] * m) <= 1e-15);
    }
    double prev = 0.0;
    for (double eps : {2.0, 0.5, 0.1, 0.01, 1e-4}) {
      const auto grad = resolvent_kernel_gradient(x, eps);
      const double mag = std::hypot(grad[0], grad[1]);
      CHECK(mag > prev);
      CHECK(mag <= 1.0 / (2.0 * kPi * r) * (1.0 + 1e-15));
      prev = mag;
    }
  }
}

TEST_CASE("velocity_at_points: point-vortex pair") {
  const double d = 1.0, delta = d / 100.0;
  const std::vector<Point> src = {{-d / 2, 0.0}, {d / 2, 0.0}};
  const std::vector<double> w = {0.5, 0.5};
  for (auto method : {DriftMethod::kDirect, DriftMethod::kTreecode}) {
    PointVelocityOptions opt;
    opt.method = method;
    opt.delta = delta;
    const auto v = velocity_at_sources(src, w, opt);
    const double expected = 0.5 / (2.0 * kPi * d);
    CHECK(std::abs(v[0][0]) <= 1e-12);
    CHECK(std::abs(std::abs(v[0][1]) - expected) <= 0.01 * expected);
    CHECK(v[0][1] == doctest::Approx(-v[1][1]));
  }
}

TEST_CASE("velocity_at_points: symmetric cloud cancels at its centroid") {
  const std::size_t n = 10000;
  const double sigma = 0.5;
  const auto pts = gaussian_cloud(n, sigma, 5);
  std::vector<Point> sym;
  for (const auto& p : pts) {
    sym.push_back(p);
    sym.push_back({-p[0], -p[1]});
  }
  std::vector<double> w(sym.size(), 1.0 / sym.size());
  PointVelocityOptions opt;
  opt.method = DriftMethod::kDirect;
  opt.delta = 0.05;
  const auto v = velocity_at_points(sym, w, std::vector<Point>{{0.0, 0.0}}, opt);
  CHECK(std::hypot(v[0][0], v[0][1]) <= 1e-12);

  // Random (not mirrored) cloud: cancellation up to sampling noise.
  std::vector<double> wr(pts.size(), 1.0 / pts.size());
  Point c{0.0, 0.0};
  for (const auto& p : pts) {
    c[0] += p[0] / n;
    c[1] += p[1] / n;
  }
  const auto vr = velocity_at_points(pts, wr, std::vector<Point>{c}, opt);
  CHECK(std::hypot(vr[0][0], vr[0][1]) <= 3.0 / std::sqrt(double(n)) / (2.0 * kPi * sigma));
}

TEST_CASE("velocity_at_points: argument validation") {
  const std::vector<Point> src = {{0.0, 0.0}, {1.0, 0.0}};
  const std::vector<double> w = {0.5, 0.5};
  PointVelocityOptions opt;
  opt.method = DriftMethod::kDirect;
  opt.delta = 0.0;
  CHECK_THROWS_AS(velocity_at_sources(src, w, opt), std::invalid_argument);
  opt.method = DriftMethod::kTreecode;
  opt.delta = 0.1;
  opt.tree.theta = 1.5;
  CHECK_THROWS_AS(velocity_at_sources(src, w, opt), std::invalid_argument);
  opt.tree.theta = 0.0;
  CHECK_THROWS_AS(velocity_at_sources(src, w, opt), std::invalid_argument);
  opt.method = DriftMethod::kGrid;
  CHECK_THROWS_AS(velocity_at_sources(src, w, opt), std::invalid_argument);
  CHECK_THROWS_AS(parse_drift_method("fmm"), std::invalid_argument);
  CHECK(parse_drift_method("treecode") == DriftMethod::kTreecode);
}

TEST_CASE("treecode: structure and determinism") {
  const std::size_t n = 5000;
  const auto pts = gaussian_cloud(n, 0.5, 17);
  const std::vector<double> w(n, 1.0 / n);
  TreecodeIndex tree(pts, w);
  CHECK(tree.check_invariants());
  CHECK(tree.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tree.leaf_count() >= n / 16);

  PointVelocityOptions opt;
  opt.delta = 0.03;
  const auto a = velocity_at_sources(pts, w, opt);
  const auto b = velocity_at_sources(pts, w, opt);
  CHECK(a == b);

  // Reversed input order: same sums up to reordering of the reductions.
  std::vector<Point> rev(pts.rbegin(), pts.rend());
  const auto c = velocity_at_sources(rev, w, opt);
  std::vector<Point> c_back(c.rbegin(), c.rend());
  CHECK(field_relative_error(c_back, a) <= 1e-12);
  CHECK_THROWS_AS(TreecodeIndex(pts, w, {0.5, -1, 16}), std::invalid_argument);
}

TEST_CASE("treecode: error against direct, and its decrease with the order") {
  const std::size_t n = 10000;
  const auto pts = gaussian_cloud(n, 0.5, 19);
  const std::vector<double> w(n, 1.0 / n);
  PointVelocityOptions direct;
  direct.method = DriftMethod::kDirect;
  direct.delta = 2.0 * 4.0 * 0.5 / std::sqrt(double(n));
  const auto t0 = std::chrono::steady_clock::now();
  const auto ref = velocity_at_sources(pts, w, direct);
  const auto t1 = std::chrono::steady_clock::now();

  PointVelocityOptions tree = direct;
  tree.method = DriftMethod::kTreecode;
  const auto fast = velocity_at_sources(pts, w, tree);
  const auto t2 = std::chrono::steady_clock::now();
  const double err = field_relative_error(fast, ref);
  MESSAGE("N = 1e4: direct " << std::chrono::duration<double>(t1 - t0).count() << " s, treecode "
                             << std::chrono::duration<double>(t2 - t1).count() << " s, error " << err);
  CHECK(err <= 1e-3);

  double prev = std::numeric_limits<double>::infinity();
  for (int order : {0, 2, 4, 8}) {
    tree.tree.order = order;
    const double e = field_relative_error(velocity_at_sources(pts, w, tree), ref);
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("blob velocity converges to the singular sum away from the sources") {
  const auto pts = gaussian_cloud(400, 1.0, 23);
  const std::vector<double> w(pts.size(), 1.0 / pts.size());
  std::vector<Point> targets;
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  while (targets.size() < 50) {
    const Point t{u(rng), u(rng)};
    double dmin = 1e300;
    for (const auto& p : pts) dmin = std::min(dmin, std::hypot(t[0] - p[0], t[1] - p[1]));
    if (dmin >= 0.03) targets.push_back(t);
  }
  std::vector<Point> singular(targets.size(), Point{0.0, 0.0});
  for (std::size_t k = 0; k < targets.size(); ++k) {
    for (std::size_t s = 0; s < pts.size(); ++s) {
      const auto kv = kernel_eval({targets[k][0] - pts[s][0], targets[k][1] - pts[s][1]});
      singular[k][0] += w[s] * kv[0];
      singular[k][1] += w[s] * kv[1];
    }
  }
  std::vector<double> errs;
  PointVelocityOptions opt;
  opt.method = DriftMethod::kDirect;
  for (double delta : {0.04, 0.02, 0.01}) {
    opt.delta = delta;
    errs.push_back(field_relative_error(velocity_at_points(pts, w, targets, opt), singular));
  }
  for (std::size_t k = 1; k < errs.size(); ++k) {
    CHECK(errs[k] < errs[k - 1]);
    CHECK(std::log2(errs[k - 1] / std::max(errs[k], 1e-300)) >= 1.0);
  }
}

TEST_CASE("grid drift interpolates K of the KDE") {
  const auto pts = gaussian_cloud(20000, 0.6, 31);
  const std::vector<double> w(pts.size(), 1.0 / pts.size());
  PointVelocityOptions opt;
  opt.method = DriftMethod::kGrid;
  opt.grid = make_grid(12.0, 128);
  opt.bandwidth = 0.1;
  const std::vector<Point> targets = {{1.0, 0.0}, {0.0, -2.0}, {9.0, 0.0}};
  const auto v = velocity_at_points(pts, w, targets, opt);
  // Gaussian of variance 0.6^2 + 0.1^2 up to sampling noise.
  const double s2 = 0.36 + 0.01;
  for (std::size_t k = 0; k < 2; ++k) {
    const double r = std::hypot(targets[k][0], targets[k][1]);
    const double speed = (1.0 - std::exp(-r * r / (2.0 * s2))) / (2.0 * kPi * r);
    CHECK(std::abs(std::hypot(v[k][0], v[k][1]) - speed) <= 0.03 * speed);
  }
  // Outside the lattice: far field of a point vortex at the centroid.
  CHECK(std::abs(std::hypot(v[2][0], v[2][1]) - 1.0 / (2.0 * kPi * 9.0)) <= 1e-3);
}

TEST_CASE("kernel tables persist to a disk cache") {
  const auto dir = std::filesystem::temp_directory_path() / "vortlab_kernel_cache_test";
  std::filesystem::remove_all(dir);
  ::setenv("VORTLAB_KERNEL_CACHE", dir.c_str(), 1);
  const auto g = make_grid(7.0, 32);
  const auto tables = FreeSpaceKernels::get(g);
  ::unsetenv("VORTLAB_KERNEL_CACHE");
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files += e.is_regular_file();
  CHECK(files == 1);
  const FreeSpaceKernels fresh(g);
  CHECK(fresh.content_hash() == tables->content_hash());
  std::filesystem::remove_all(dir);
}

#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "gradbound/errors.hpp"
#include "gradbound/grid.hpp"

using namespace gradbound;
using std::numbers::pi;

namespace {

template <class Fn>
ScalarField sample(const PeriodicGrid& g, Fn fn) {
  ScalarField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.position(i, 0);
    const double y = g.dim() == 2 ? g.position(i, 1) : 0.0;
    f[i] = fn(x, y);
  }
  return f;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("grid rejects unsupported shapes") {
  CHECK_THROWS_AS(PeriodicGrid(1, 2), PreconditionError);
  CHECK_THROWS_AS(PeriodicGrid(1, 3), PreconditionError);
  CHECK_THROWS_AS(PeriodicGrid(3, 16), PreconditionError);
  PeriodicGrid g(2, 8);
  CHECK(g.size() == 64);
  CHECK(g.h() * g.n() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.neighbor(0, 0, -1) == 56);
  CHECK(g.neighbor(0, 1, -1) == 7);
  CHECK(g.neighbor(63, 1, 1) == 56);
}

TEST_CASE("gradient of a constant is exactly zero") {
  for (int d : {1, 2}) {
    PeriodicGrid g(d, 16);
    ScalarField f(g, 0.37);
    const auto grad = gradient_centered(f);
    for (const auto& comp : grad.components)
      for (double v : comp) CHECK(v == 0.0);
    CHECK(sup_grad_norm(f) == 0.0);
  }
}

TEST_CASE("centred gradient of sine and cosine within the Taylor remainder") {
  PeriodicGrid g(1, 256);
  const double h = g.h();
  const double bound = std::pow(2 * pi, 3) * h * h / 6.0;

  const auto s = sample(g, [](double x, double) { return std::sin(2 * pi * x); });
  const auto gs = gradient_centered(s);
  const auto ds = sample(g, [](double x, double) { return 2 * pi * std::cos(2 * pi * x); });
  CHECK(max_abs_diff(gs.components[0], ds.values) <= bound);

  const auto c = sample(g, [](double x, double) { return std::cos(2 * pi * x); });
  const auto gc = gradient_centered(c);
  const auto dc = sample(g, [](double x, double) { return -2 * pi * std::sin(2 * pi * x); });
  CHECK(max_abs_diff(gc.components[0], dc.values) <= bound);
}

TEST_CASE("sup_grad_norm matches analytic maxima") {
  PeriodicGrid g(1, 1024);
  const auto f = sample(g, [](double x, double) { return 0.5 + 0.1 * std::sin(2 * pi * x); });
  const double h = g.h();
  CHECK(std::abs(sup_grad_norm(f) - 0.2 * pi) <= 0.2 * pi * std::pow(2 * pi * h, 2) / 6.0);
}

TEST_CASE("2D sup_grad_norm agrees with a dense brute-force scan") {
  PeriodicGrid g(2, 64);
  const double h = g.h();
  auto fn = [](double x, double y) { return std::sin(2 * pi * x) + std::sin(2 * pi * y); };
  const auto f = sample(g, fn);

  // oracle: centred differences of the analytic function at every node
  double oracle = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) {
      const double x = i * h, y = j * h;
      const double gx = (fn(x + h, y) - fn(x - h, y)) / (2 * h);
      const double gy = (fn(x, y + h) - fn(x, y - h)) / (2 * h);
      oracle = std::max(oracle, std::hypot(gx, gy));
    }
  CHECK(sup_grad_norm(f) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(sup_grad_norm(f) == doctest::Approx(2 * pi * std::sqrt(2.0)).epsilon(std::pow(2 * pi * h, 2)));
}

TEST_CASE("divergence of face fluxes") {
  SUBCASE("zero flux") {
    PeriodicGrid g(2, 8);
    const auto div = divergence_of_face_flux(g, FaceFlux(2, std::vector<double>(g.size(), 0.0)));
    for (double v : div.values) CHECK(v == 0.0);
  }
  SUBCASE("sine flux differentiates to cosine") {
    PeriodicGrid g(1, 256);
    const double h = g.h();
    FaceFlux flux(1, std::vector<double>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) flux[0][i] = std::sin(2 * pi * (i + 0.5) * h);
    const auto div = divergence_of_face_flux(g, flux);
    const auto exact = sample(g, [](double x, double) { return 2 * pi * std::cos(2 * pi * x); });
    CHECK(max_abs_diff(div.values, exact.values) <= std::pow(2 * pi, 3) * h * h / 24.0 * 1.01);
  }
  SUBCASE("random flux telescopes to zero total") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    for (int d : {1, 2}) {
      PeriodicGrid g(d, 32);
      FaceFlux flux(d, std::vector<double>(g.size()));
      for (auto& f : flux)
        for (auto& v : f) v = dist(rng);
      const auto div = divergence_of_face_flux(g, flux);
      double sum = 0.0;
      for (double v : div.values) sum += v;
      const double scale = 3.0 / g.h() * static_cast<double>(g.size());
      CHECK(std::abs(sum) <= 1e-12 * scale);
    }
  }
  SUBCASE("wrong flux shape rejected") {
    PeriodicGrid g(2, 8);
    CHECK_THROWS_AS(divergence_of_face_flux(g, FaceFlux(1, std::vector<double>(g.size()))),
                    PreconditionError);
  }
}

TEST_CASE("field_minmax and mass") {
  PeriodicGrid g(1, 256);
  ScalarField c(g, 0.3);
  CHECK(field_minmax(c) == std::pair{0.3, 0.3});
  CHECK(mass(c) == doctest::Approx(0.3).epsilon(1e-13));

  const auto f = sample(g, [](double x, double) { return 0.5 + 0.4 * std::sin(2 * pi * x); });
  double lo = f[0], hi = f[0];
  for (double v : f.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const auto [mn, mx] = field_minmax(f);
  CHECK(mn == lo);
  CHECK(mx == hi);
  CHECK(mn == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(mx == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(std::abs(mass(f) - 0.5) <= 1e-12);

  ScalarField sum(g);
  for (std::size_t i = 0; i < g.size(); ++i) sum[i] = f[i] + c[i];
  CHECK(mass(sum) == doctest::Approx(mass(f) + mass(c)).epsilon(1e-14));

  PeriodicGrid g2(2, 16);
  CHECK(mass(ScalarField(g2, 0.25)) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("operators commute with periodic shifts bit-exactly") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int d : {1, 2}) {
    PeriodicGrid g(d, 16);
    ScalarField f(g);
    for (auto& v : f.values) v = dist(rng);
    for (int axis = 0; axis < d; ++axis) {
      const int k = 5;
      const auto fs = shifted(f, axis, k);
      const auto g1 = gradient_centered(fs);
      const auto g0 = gradient_centered(f);
      for (int a = 0; a < d; ++a)
        CHECK(g1.components[a] == shifted(ScalarField(g, g0.components[a]), axis, k).values);

      FaceFlux flux(d, std::vector<double>(g.size()));
      FaceFlux flux_s(d);
      for (int a = 0; a < d; ++a) {
        for (auto& v : flux[a]) v = dist(rng);
        flux_s[a] = shifted(ScalarField(g, flux[a]), axis, k).values;
      }
      CHECK(divergence_of_face_flux(g, flux_s).values ==
            shifted(divergence_of_face_flux(g, flux), axis, k).values);

      const std::size_t node = 3;
      CHECK(hessian_at(fs, g.neighbor(node, axis, k)) == hessian_at(f, node));
      CHECK(field_minmax(fs) == field_minmax(f));
    }
  }
}

TEST_CASE("operators converge at second order") {
  auto grad_error = [](int n) {
    PeriodicGrid g(1, n);
    const auto f = sample(g, [](double x, double) { return std::exp(std::sin(2 * pi * x)); });
    const auto exact =
        sample(g, [](double x, double) { return 2 * pi * std::cos(2 * pi * x) * std::exp(std::sin(2 * pi * x)); });
    return max_abs_diff(gradient_centered(f).components[0], exact.values);
  };
  auto div_error = [](int n) {
    PeriodicGrid g(2, n);
    const double h = g.h();
    FaceFlux flux(2, std::vector<double>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.position(i, 0), y = g.position(i, 1);
      flux[0][i] = std::sin(2 * pi * (x + 0.5 * h)) * std::cos(2 * pi * y);
      flux[1][i] = std::cos(2 * pi * x) * std::sin(4 * pi * (y + 0.5 * h));
    }
    const auto div = divergence_of_face_flux(g, flux);
    const auto exact = sample(g, [](double x, double y) {
      return 2 * pi * std::cos(2 * pi * x) * std::cos(2 * pi * y) +
             4 * pi * std::cos(2 * pi * x) * std::cos(4 * pi * y);
    });
    return max_abs_diff(div.values, exact.values);
  };
  for (int n : {32, 64, 128}) {
    CHECK(grad_error(n) / grad_error(2 * n) >= 3.5);
    CHECK(div_error(n) / div_error(2 * n) >= 3.5);
  }
}

TEST_CASE("snapshot files round-trip at full precision") {
  PeriodicGrid g(2, 8);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ScalarField f(g);
  for (auto& v : f.values) v = dist(rng);
  const auto path = std::filesystem::temp_directory_path() / "gradbound_snapshot_test.txt";
  write_snapshot(path, f, 0.125);
  {
    std::ifstream is(path);
    std::string header;
    std::getline(is, header);
    CHECK(header == "# d=2 n=8 t=0.125");
  }
  const auto back = read_snapshot(path);
  CHECK(back.t == 0.125);
  CHECK(back.field.grid == g);
  CHECK(back.field.values == f.values);
  std::filesystem::remove(path);
}

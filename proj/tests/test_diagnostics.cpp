#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "gradbound/errors.hpp"
#include "gradbound/solver.hpp"

using namespace gradbound;
using std::numbers::pi;

namespace {

ScalarField sine_field(int n, double mean, double amp) {
  PeriodicGrid g(1, n);
  ScalarField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = mean + amp * std::sin(2 * pi * g.position(i, 0));
  return f;
}

const ModelSpec& heat() {
  static const auto m = ModelSpec::pme(1.0, {0.0, 1.0, 1.0, 1});
  return m;
}

DiagnosticsRow row(double t, double grad, double lo, double hi, double m) {
  DiagnosticsRow r;
  r.t = t;
  r.max_grad = grad;
  r.u_min = lo;
  r.u_max = hi;
  r.mass = m;
  return r;
}

}  // namespace

TEST_CASE("record_row statistics") {
  RunDiagnostics diag;
  const auto u = sine_field(1024, 0.5, 0.4);
  record_row(diag, 0.0, 0.0, u, heat());
  const auto& r = diag.rows.front();
  const double h = u.grid.h();
  CHECK(std::abs(r.max_grad - 0.8 * pi) <= 0.8 * pi * std::pow(2 * pi * h, 2) / 6.0);
  CHECK(r.u_min == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r.u_max == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(r.mass == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(r.w_rate.has_value());

  record_row(diag, 0.5, 0.1, ScalarField(u.grid, 0.25), heat());
  const auto& c = diag.rows.back();
  CHECK(c.max_grad == 0.0);
  CHECK(c.u_min == 0.25);
  CHECK(c.u_max == 0.25);
  CHECK(*c.w_rate == 0.0);

  CHECK_THROWS_AS(record_row(diag, 0.5, 0.1, u, heat()), PreconditionError);
  CHECK_THROWS_AS(record_row(diag, 0.4, 0.1, u, heat()), PreconditionError);

  RunDiagnostics bare;
  record_row(bare, 0.0, 0.0, u, heat(), false);
  CHECK_FALSE(bare.rows.front().w_rate.has_value());
}

TEST_CASE("w rate at the steepest node") {
  // heat: the Hessian vanishes where the sine is steepest
  const auto u = sine_field(256, 0.5, 0.1);
  const auto w = w_rate_at_argmax(heat(), u);
  CHECK(w.node == 0);
  CHECK(w.scale > 0.0);
  CHECK(std::abs(w.rate) <= 1e-10 * w.scale);

  // a single Fourier mode under heat: w_rate = -(u_xx)^2 at the argmax
  PeriodicGrid g(1, 64);
  ScalarField c(g);
  for (std::size_t i = 0; i < g.size(); ++i) c[i] = 0.5 + 0.05 * std::cos(2 * pi * (g.position(i, 0) - 0.1));
  const auto wc = w_rate_at_argmax(heat(), c);
  const auto hess = hessian_at(c, wc.node);
  CHECK(wc.rate == doctest::Approx(-hess[0] * hess[0]).epsilon(1e-12));
  CHECK(wc.rate <= 0.0);

  CHECK_THROWS_AS(w_rate_at_argmax(ModelSpec::hydrology_full(2), u), PreconditionError);
}

TEST_CASE("verdicts on synthetic diagnostics") {
  RunDiagnostics single;
  single.rows.push_back(row(0.0, 1.0, 0.1, 0.9, 0.5));
  for (const auto& v : verdict_bounds(single, 0.0)) {
    CHECK(v.pass);
    CHECK(v.worst_violation == 0.0);
  }

  RunDiagnostics grow = single;
  grow.rows.push_back(row(0.1, 1.1, 0.1, 0.9, 0.5));
  auto v = verdict_bounds(grow, 0.0);
  CHECK(v[0].name == "gradient");
  CHECK_FALSE(v[0].pass);
  CHECK(v[0].worst_violation == doctest::Approx(0.1));
  CHECK(v[0].time == 0.1);
  CHECK(v[1].pass);
  CHECK(v[2].pass);
  CHECK(verdict_bounds(grow, 0.2)[0].pass);

  // pass at one tolerance implies pass at every larger one
  for (double tol = 0.0; tol < 0.3; tol += 0.01) {
    if (verdict_bounds(grow, tol)[0].pass) CHECK(verdict_bounds(grow, tol + 0.01)[0].pass);
  }

  RunDiagnostics leak = single;
  leak.rows.push_back(row(0.1, 0.9, 0.1, 0.9, 0.5 * (1 + 1e-9)));
  v = verdict_bounds(leak, 0.0);
  CHECK(v[0].pass);
  CHECK_FALSE(v[2].pass);

  RunDiagnostics spill = single;
  spill.rows.push_back(row(0.1, 0.9, 0.05, 0.9, 0.5));
  CHECK_FALSE(verdict_bounds(spill, 0.0)[1].pass);
  CHECK_FALSE(all_pass(verdict_bounds(spill, 0.0)));

  CHECK_THROWS_AS(verdict_bounds(RunDiagnostics{}, 0.0), PreconditionError);
}

TEST_CASE("CSV and verdict serialization") {
  RunDiagnostics diag;
  const auto u = sine_field(32, 0.5, 0.1);
  record_row(diag, 0.0, 0.0, u, heat());
  record_row(diag, 0.1, 0.01, u, heat(), false);
  std::ostringstream os;
  write_diagnostics_csv(os, diag);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,dt,max_grad,u_min,u_max,mass,w_rate");
  int lines = 0;
  while (std::getline(is, line)) {
    ++lines;
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
  }
  CHECK(lines == 2);
  CHECK(os.str().back() == '\n');
  CHECK(os.str().find(",\n") != std::string::npos);  // empty w_rate on the second row

  std::ostringstream vs;
  write_verdicts(vs, verdict_bounds(diag, 0.0));
  CHECK(vs.str().rfind("gradient = pass worst_violation=0 t=", 0) == 0);
}

TEST_CASE("recorded rows match recomputation from snapshots") {
  SolverConfig cfg;
  cfg.n = 64;
  cfg.t_end = 0.02;
  cfg.output_every = 0.005;
  cfg.snapshot_times = {0.0, 0.005, 0.01, 0.015, 0.02};
  const auto model = ModelSpec::pme(2.0, {0.0, 1.0, 1.0, 1});
  const auto res = run(model, sine_field(64, 0.5, 0.1), cfg);
  REQUIRE(res.snapshots.size() == res.diagnostics.rows.size());
  for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
    const auto& r = res.diagnostics.rows[k];
    const auto& s = res.snapshots[k];
    CHECK(r.t == s.t);
    CHECK(r.max_grad == sup_grad_norm(s.field));
    CHECK(r.mass == mass(s.field));
    CHECK(*r.w_rate == w_rate_at_argmax(model, s.field).rate);
  }
}

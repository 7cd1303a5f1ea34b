#include "gradbound/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "gradbound/certify.hpp"
#include "gradbound/errors.hpp"

namespace gradbound {

namespace {

Eigen::MatrixXd to_matrix(const std::vector<double>& hess, int d) {
  Eigen::MatrixXd X(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) X(i, j) = hess[static_cast<std::size_t>(i * d + j)];
  return X;
}

double max_hessian_norm(const ScalarField& u) {
  const int d = u.grid.dim();
  double best = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    best = std::max(best, to_matrix(hessian_at(u, i), d).norm());
  return best;
}

}  // namespace

WRate w_rate_at_argmax(const ModelSpec& model, const ScalarField& u) {
  const auto& g = u.grid;
  const int d = g.dim();
  if (d != model.dim()) throw PreconditionError("w_rate_at_argmax: field and model dimension differ");

  std::size_t arg = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double gn = grad_norm_at(u, i);
    if (gn > best) {
      best = gn;
      arg = i;
    }
  }

  Eigen::VectorXd p(d);
  const double inv2h = 0.5 / g.h();
  for (int a = 0; a < d; ++a)
    p(a) = (u[g.neighbor(arg, a, 1)] - u[g.neighbor(arg, a, -1)]) * inv2h;
  const Eigen::MatrixXd X = to_matrix(hessian_at(u, arg), d);
  const double uval = u[arg];
  const double s = p.squaredNorm();

  const auto der = F_derivatives(model, X, p, uval, BoxCheck::Skip);
  WRate out;
  out.node = arg;
  out.rate = inequality_A_lhs(der, X, p);

  double a1 = 0.0, a2 = 0.0, a3 = 0.0;
  if (model.form() == FluxForm::G) {
    const auto& t = model.g_table();
    a1 = std::abs(t.dG(uval));
    a2 = std::abs(t.d2G(uval));
    a3 = std::abs(t.d3G(uval));
  } else {
    const auto& t = model.psi_table();
    const double ps = s > 0.0 ? std::abs(t.psi_s(uval, s)) : 0.0;
    const double pus = s > 0.0 ? std::abs(t.psi_us(uval, s)) : 0.0;
    a1 = std::abs(t.psi(uval, s)) + 2.0 * s * ps;
    a2 = std::abs(t.psi_u(uval, s)) + 2.0 * s * pus;
    a3 = std::abs(t.psi_uu(uval, s));
  }
  const double xm = max_hessian_norm(u);
  out.scale = a1 * xm * xm + s * a2 * std::sqrt(static_cast<double>(d)) * xm + s * s * a3 +
              std::abs(der.dx_dot_p);
  return out;
}

void record_row(RunDiagnostics& diag, double t, double dt, const ScalarField& u,
                const ModelSpec& model, bool with_w_rate) {
  if (!diag.rows.empty() && !(t > diag.rows.back().t))
    throw PreconditionError("record_row: time must increase strictly");
  DiagnosticsRow row;
  row.t = t;
  row.dt = dt;
  row.max_grad = sup_grad_norm(u);
  const auto [lo, hi] = field_minmax(u);
  row.u_min = lo;
  row.u_max = hi;
  row.mass = mass(u);
  if (with_w_rate) {
    const auto w = w_rate_at_argmax(model, u);
    row.w_rate = w.rate;
    row.w_rate_scale = w.scale;
  }
  diag.rows.push_back(row);
}

std::vector<BoundVerdict> verdict_bounds(const RunDiagnostics& diag, double tol_grad) {
  if (diag.rows.empty()) throw PreconditionError("verdict_bounds: no diagnostics rows");
  const auto& first = diag.rows.front();

  BoundVerdict grad{"gradient", true, -std::numeric_limits<double>::infinity(), first.t};
  BoundVerdict range{"range", true, -std::numeric_limits<double>::infinity(), first.t};
  BoundVerdict mass_v{"mass", true, 0.0, first.t};

  const double grad_cap = first.max_grad * (1.0 + tol_grad);
  const double mass_ref = first.mass != 0.0 ? std::abs(first.mass) : 1.0;
  for (const auto& r : diag.rows) {
    const double over = r.max_grad - first.max_grad;
    if (over > grad.worst_violation) {
      grad.worst_violation = over;
      grad.time = r.t;
    }
    if (r.max_grad > grad_cap) grad.pass = false;

    const double out = std::max(first.u_min - r.u_min, r.u_max - first.u_max);
    if (out > range.worst_violation) {
      range.worst_violation = out;
      range.time = r.t;
    }
    if (out > kRangeTol) range.pass = false;

    const double drift = std::abs(r.mass - first.mass) / mass_ref;
    if (drift > mass_v.worst_violation) {
      mass_v.worst_violation = drift;
      mass_v.time = r.t;
    }
    if (drift > kMassDriftTol) mass_v.pass = false;
  }
  return {grad, range, mass_v};
}

bool all_pass(const std::vector<BoundVerdict>& verdicts) {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.pass; });
}

void write_diagnostics_csv(std::ostream& os, const RunDiagnostics& diag) {
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << "t,dt,max_grad,u_min,u_max,mass,w_rate\n";
  for (const auto& r : diag.rows) {
    os << r.t << ',' << r.dt << ',' << r.max_grad << ',' << r.u_min << ',' << r.u_max << ','
       << r.mass << ',';
    if (r.w_rate) os << *r.w_rate;
    os << '\n';
  }
  os.precision(prec);
}

void write_verdicts(std::ostream& os, const std::vector<BoundVerdict>& verdicts) {
  const auto prec = os.precision();
  os << std::setprecision(17);
  for (const auto& v : verdicts) {
    os << v.name << " = " << (v.pass ? "pass" : "fail") << " worst_violation=" << v.worst_violation
       << " t=" << v.time << '\n';
  }
  os.precision(prec);
}

}  // namespace gradbound

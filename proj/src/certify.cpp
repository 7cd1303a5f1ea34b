#include "gradbound/certify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

#include "gradbound/errors.hpp"

namespace gradbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sample_point(double lo, double hi, int i, int n) {
  if (n <= 1 || lo == hi) return lo;
  if (i == n - 1) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

// Running minimum of normalized slacks; NaN counts as an unbounded violation.
class MarginTracker {
 public:
  MarginTracker(std::string condition, double tol) : tol_(tol) { report_.condition = std::move(condition); }

  void offer(double margin, double u, double s, std::vector<double> lambda = {}) {
    if (std::isnan(margin)) margin = -kInf;
    ++report_.samples;
    if (report_.samples == 1 || margin < report_.worst_margin) {
      report_.worst_margin = margin;
      report_.witness = Witness{u, s, std::move(lambda)};
    }
  }

  CertReport finish(std::optional<std::uint64_t> seed = std::nullopt) {
    if (report_.samples == 0) report_.worst_margin = 0.0;
    report_.pass = report_.worst_margin >= -tol_;
    report_.seed = seed;
    return std::move(report_);
  }

 private:
  double tol_;
  CertReport report_;
};

CertReport combine(std::string condition, std::vector<CertReport> parts) {
  CertReport out;
  out.condition = std::move(condition);
  out.pass = true;
  out.worst_margin = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& p = parts[i];
    out.pass = out.pass && p.pass;
    out.samples += p.samples;
    if (p.seed && !out.seed) out.seed = p.seed;
    if (i == 0 || p.worst_margin < out.worst_margin) {
      out.worst_margin = p.worst_margin;
      out.witness = p.witness;
    }
  }
  out.parts = std::move(parts);
  return out;
}

// Slack of the reduced inequality: the exact minimum over Lambda when a > 0,
// the degenerate branch (b must vanish, c >= 0) when a = 0.
struct ReducedSlack {
  double margin;
  std::vector<double> lambda;
};

ReducedSlack degenerate_branch(const QuadraticForm& q, double tol) {
  if (q.a < 0.0 || std::isnan(q.a)) return {-kInf, {}};
  if (std::abs(q.b) / (1.0 + std::abs(q.b) + std::abs(q.c)) > tol) return {-kInf, {}};
  return {q.c / (1.0 + std::abs(q.c)), std::vector<double>(static_cast<std::size_t>(q.dim - 1), 0.0)};
}

ReducedSlack exact_min_slack(const QuadraticForm& q, double tol) {
  const double base = 1.0 + std::abs(q.a) + std::abs(q.b) + std::abs(q.c);
  if (q.dim == 1) return {q.c / base, {}};
  if (!(q.a > 0.0)) return degenerate_branch(q, tol);
  const double cross = (q.dim - 1) * q.b * q.b / (4.0 * q.a);
  const double value = quadratic_min_closed_form(q);
  return {value / (base + cross),
          std::vector<double>(static_cast<std::size_t>(q.dim - 1), -q.b / (2.0 * q.a))};
}

ReducedSlack sufficient_slack(const QuadraticForm& q, double tol) {
  if (q.dim == 1) return {q.c / (1.0 + std::abs(q.a) + std::abs(q.b) + std::abs(q.c)), {}};
  if (!(q.a > 0.0)) return degenerate_branch(q, tol);
  const double lhs = (q.dim - 1) * q.b * q.b;
  const double rhs = 4.0 * q.a * q.c;
  return {(rhs - lhs) / (1.0 + std::abs(rhs) + lhs), {}};
}

double require_finite_grad_box(const AdmissibilityBox& box, const std::string& who) {
  if (!std::isfinite(box.grad_sq_max))
    throw DomainError(who + ": certification needs a bounded gradient box (grad_sq_max finite)");
  return box.grad_sq_max;
}

Eigen::VectorXd random_unit(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(d);
  do {
    for (int i = 0; i < d; ++i) v(i) = normal(rng);
  } while (v.norm() < 1e-8);
  return v.normalized();
}

// Orthogonal matrix whose first column is +-direction.
Eigen::MatrixXd frame_with_first(std::mt19937_64& rng, const Eigen::VectorXd& direction) {
  const auto d = direction.size();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(d, d);
  m.col(0) = direction;
  for (Eigen::Index j = 1; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) m(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
}

}  // namespace

double quadratic_min_closed_form(const QuadraticForm& q) {
  if (q.dim < 1) throw DomainError("quadratic form: dim must be >= 1");
  if (!(q.a > 0.0)) throw DomainError("quadratic_min_closed_form: need a > 0");
  return q.c - (q.dim - 1) * q.b * q.b / (4.0 * q.a);
}

double quadratic_min_brute_force(const QuadraticForm& q, double radius, long n_steps) {
  if (!(radius > 0.0)) throw PreconditionError("quadratic_min_brute_force: radius must be > 0");
  if (n_steps < 3) throw PreconditionError("quadratic_min_brute_force: need n_steps >= 3");
  if (q.dim <= 1) return q.c;
  double best = kInf;
  const double step = 2.0 * radius / static_cast<double>(n_steps - 1);
  for (long i = 0; i < n_steps; ++i) {
    // symmetric placement keeps the midpoint exactly at 0 for odd n_steps
    const double lambda = (2 * i == n_steps - 1) ? 0.0 : -radius + step * static_cast<double>(i);
    best = std::min(best, q.b * lambda + q.a * lambda * lambda);
  }
  return q.c + (q.dim - 1) * best;
}

double inequality_A_lhs(const FDerivatives& der, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& p) {
  const double dx_x2 = (der.dX * X * X).trace();
  return -dx_x2 + p.squaredNorm() * der.du + der.dx_dot_p;
}

QuadraticForm reduced_form(const ModelSpec& model, double u, double s) {
  QuadraticForm q;
  q.dim = model.dim();
  if (model.form() == FluxForm::G) {
    const auto& g = model.g_table();
    q.a = g.dG(u);
    q.b = -s * g.d2G(u);
    q.c = -s * s * g.d3G(u);
  } else {
    const auto& t = model.psi_table();
    q.a = t.psi(u, s);
    q.b = -s * t.psi_u(u, s);
    q.c = -s * s * t.psi_uu(u, s);
  }
  return q;
}

CertReport check_differential_inequality_A(const ModelSpec& model, int n_u, int n_s,
                                           int n_matrix_samples, std::uint64_t seed,
                                           double tol) {
  if (n_u < 2 || n_s < 2 || n_matrix_samples < 2)
    throw PreconditionError("check_differential_inequality_A: sample counts must be >= 2");
  const auto& box = model.box();
  const double s_hi = require_finite_grad_box(box, "check_differential_inequality_A");
  const int d = model.dim();

  MarginTracker closed("inequality_A.closed_form", tol);
  MarginTracker sufficient("inequality_A.sufficient", tol);
  for (int i = 0; i < n_u; ++i) {
    const double u = sample_point(box.u_lo, box.u_hi, i, n_u);
    for (int j = 0; j < n_s; ++j) {
      const double s = sample_point(box.grad_sq_min, s_hi, j, n_s);
      const auto q = reduced_form(model, u, s);
      auto exact = exact_min_slack(q, tol);
      closed.offer(exact.margin, u, s, std::move(exact.lambda));
      sufficient.offer(sufficient_slack(q, tol).margin, u, s);
    }
  }

  // Random X with X.p = 0: X = Q diag(0, lambda_1, ..., lambda_{d-1}) Q^T
  // where the first column of Q is p/|p|.
  MarginTracker matrix("inequality_A.random_matrix", tol);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> decades(-3.0, 3.0);
  for (int k = 0; k < n_matrix_samples; ++k) {
    const double u = box.u_lo + (box.u_hi - box.u_lo) * unit(rng);
    const double s = box.grad_sq_min + (s_hi - box.grad_sq_min) * unit(rng);
    const Eigen::VectorXd dir = random_unit(rng, d);
    const Eigen::VectorXd p = std::sqrt(s) * dir;
    const Eigen::MatrixXd Q = frame_with_first(rng, dir);

    std::vector<double> lambda(static_cast<std::size_t>(d - 1));
    const bool aligned = unit(rng) < 0.5;
    const double common = (unit(rng) < 0.5 ? -1.0 : 1.0) * std::pow(10.0, decades(rng));
    for (auto& l : lambda)
      l = aligned ? common : (unit(rng) < 0.5 ? -1.0 : 1.0) * std::pow(10.0, decades(rng));

    Eigen::VectorXd diag = Eigen::VectorXd::Zero(d);
    for (int i = 1; i < d; ++i) diag(i) = lambda[static_cast<std::size_t>(i - 1)];
    const Eigen::MatrixXd X = Q * diag.asDiagonal() * Q.transpose();

    const double xp = (X * p).norm();
    if (xp > 1e-12 * (1.0 + X.norm()) * (1.0 + p.norm()))
      throw std::logic_error("check_differential_inequality_A: sampled X does not annihilate p");

    const auto der = F_derivatives(model, X, p, u, BoxCheck::Skip);
    const double dx_x2 = (der.dX * X * X).trace();
    const double lhs = inequality_A_lhs(der, X, p);
    const double scale = 1.0 + std::abs(dx_x2) + s * std::abs(der.du) + std::abs(der.dx_dot_p);
    matrix.offer(-lhs / scale, u, s, std::move(lambda));
  }

  return combine("inequality_A", {closed.finish(), sufficient.finish(), matrix.finish(seed)});
}

CertReport check_G_condition(const GTable& g, int dim, double u_lo, double u_hi, int n_u,
                             double tol) {
  if (!(u_lo <= u_hi)) throw PreconditionError("check_G_condition: need u_lo <= u_hi");
  if (dim < 1) throw DomainError("check_G_condition: dim must be >= 1");
  MarginTracker monotone("G.first_derivative_nonneg", tol);
  MarginTracker main("G.condition", tol);
  MarginTracker third("G.third_derivative_nonpos", tol);
  for (int i = 0; i < n_u; ++i) {
    const double u = sample_point(u_lo, u_hi, i, n_u);
    const double g1 = g.dG(u);
    const double g2 = g.d2G(u);
    const double g3 = g.d3G(u);
    monotone.offer(g1 / (1.0 + std::abs(g1)), u, 0.0);
    const double lhs = 0.25 * (dim - 1) * g2 * g2;
    const double rhs = -g3 * g1;
    main.offer((rhs - lhs) / (1.0 + lhs + std::abs(rhs)), u, 0.0);
    third.offer(-g3 / (1.0 + std::abs(g3)), u, 0.0);
  }
  return combine("G_condition", {monotone.finish(), main.finish(), third.finish()});
}

CertReport check_psi_condition(const PsiTable& psi, int dim, const AdmissibilityBox& box, int n_u,
                               int n_s, double tol) {
  box.validate();
  if (dim < 1) throw DomainError("check_psi_condition: dim must be >= 1");
  const double s_hi = require_finite_grad_box(box, "check_psi_condition");
  MarginTracker nonneg("psi.nonneg", tol);
  MarginTracker radial("psi.radial_nonneg", tol);
  MarginTracker main("psi.condition", tol);
  for (int i = 0; i < n_u; ++i) {
    const double u = sample_point(box.u_lo, box.u_hi, i, n_u);
    for (int j = 0; j < n_s; ++j) {
      const double s = sample_point(box.grad_sq_min, s_hi, j, n_s);
      const double v = psi.psi(u, s);
      const double r = psi.radial_at(u, s);
      const double pu = psi.psi_u(u, s);
      const double puu = psi.psi_uu(u, s);
      nonneg.offer(v / (1.0 + std::abs(v)), u, s);
      radial.offer(r / (1.0 + std::abs(r)), u, s);
      const double lhs = 0.25 * (dim - 1) * pu * pu;
      const double rhs = -v * puu;
      main.offer((rhs - lhs) / (1.0 + lhs + std::abs(rhs)), u, s);
    }
  }
  return combine("psi_condition", {nonneg.finish(), radial.finish(), main.finish()});
}

CertReport check_parabolicity(const ModelSpec& model, int n_samples, std::uint64_t seed,
                              double tol, std::optional<AdmissibilityBox> probe) {
  if (n_samples < 1) throw PreconditionError("check_parabolicity: need n_samples >= 1");
  const AdmissibilityBox box = probe.value_or(model.box());
  box.validate();
  const double s_hi = require_finite_grad_box(box, "check_parabolicity");
  const int d = model.dim();

  MarginTracker monotone("parabolicity.monotone_in_X", tol);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> decades(-2.0, 2.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < n_samples; ++k) {
    const double u = box.u_lo + (box.u_hi - box.u_lo) * unit(rng);
    const double s = box.grad_sq_min + (s_hi - box.grad_sq_min) * unit(rng);
    const Eigen::VectorXd dir = random_unit(rng, d);
    const Eigen::VectorXd p = std::sqrt(s) * dir;

    Eigen::MatrixXd A(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) A(i, j) = normal(rng);
    const Eigen::MatrixXd X = std::pow(10.0, decades(rng)) * 0.5 * (A + A.transpose());

    Eigen::MatrixXd P(d, d);
    if (unit(rng) < 0.5) {
      // rank one along the gradient direction probes the radial eigenvalue
      P = Eigen::MatrixXd::Zero(d, d);
      P.row(0) = dir.transpose();
    } else {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) P(i, j) = normal(rng);
    }
    P *= std::pow(10.0, decades(rng));
    const Eigen::MatrixXd Y = X + P.transpose() * P;

    const double fx = eval_F(model, X, p, u, BoxCheck::Skip);
    const double fy = eval_F(model, Y, p, u, BoxCheck::Skip);
    monotone.offer((fy - fx) / (1.0 + std::abs(fx) + std::abs(fy)), u, s);
  }

  constexpr int kGrid = 101;
  MarginTracker diffusivity("parabolicity.diffusivities_nonneg", tol);
  for (int i = 0; i < kGrid; ++i) {
    const double u = sample_point(box.u_lo, box.u_hi, i, kGrid);
    for (int j = 0; j < kGrid; ++j) {
      const double s = sample_point(box.grad_sq_min, s_hi, j, kGrid);
      const auto [tangential, radial] = effective_diffusivities(model, u, s, BoxCheck::Skip);
      const double worst = std::min(tangential, radial);
      diffusivity.offer(worst / (1.0 + std::abs(worst)), u, s);
    }
  }
  return combine("parabolicity", {monotone.finish(seed), diffusivity.finish()});
}

CertReport certify_model(const ModelSpec& model, int n_u, int n_s, int n_matrix_samples,
                         std::uint64_t seed, double tol) {
  const auto& box = model.box();
  std::vector<CertReport> reports;
  reports.push_back(check_parabolicity(model, n_matrix_samples, seed, tol));
  if (model.form() == FluxForm::G)
    reports.push_back(check_G_condition(model.g_table(), model.dim(), box.u_lo, box.u_hi, n_u, tol));
  else
    reports.push_back(check_psi_condition(model.psi_table(), model.dim(), box, n_u, n_s, tol));
  reports.push_back(check_differential_inequality_A(model, n_u, n_s, n_matrix_samples, seed, tol));
  return combine(model.name(), std::move(reports));
}

double pme_m_max(int dim) {
  if (dim < 1) throw DomainError("pme_m_max: dim must be >= 1");
  return 1.0 + 4.0 / (3.0 + dim);
}

double hydrology_delta(int dim) {
  if (dim < 1) throw DomainError("hydrology_delta: dim must be >= 1");
  return 1.0 / std::sqrt(2.0 + 2.0 * dim);
}

double doubly_nonlinear_window(int dim) {
  if (dim < 1) throw DomainError("doubly_nonlinear_window: dim must be >= 1");
  return 4.0 / (3.0 + dim);
}

void write_report(std::ostream& os, const CertReport& report) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  os << "condition = " << report.condition << '\n';
  os << "verdict = " << (report.pass ? "pass" : "fail") << '\n';
  os << "worst_margin = " << report.worst_margin << '\n';
  os << "witness_u = " << report.witness.u << '\n';
  os << "witness_s = " << report.witness.s << '\n';
  os << "witness_lambda = ";
  for (std::size_t i = 0; i < report.witness.lambda.size(); ++i)
    os << (i ? "," : "") << report.witness.lambda[i];
  os << '\n';
  os << "samples = " << report.samples << '\n';
  os << "seed = ";
  if (report.seed) os << *report.seed;
  os << '\n';
  os.flags(flags);
  os.precision(prec);
  for (const auto& part : report.parts) {
    os << '\n';
    write_report(os, part);
  }
}

}  // namespace gradbound

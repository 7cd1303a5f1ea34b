#include "gradbound/models.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "gradbound/certify.hpp"
#include "gradbound/errors.hpp"

namespace gradbound {

namespace {

// coeff * u^e with a zero coefficient winning over a singular power.
double scaled_pow(double coeff, double u, double e) {
  if (coeff == 0.0) return 0.0;
  if (e == 0.0) return coeff;
  return coeff * std::pow(u, e);
}

double horner(const std::vector<double>& c, double u) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u + *it;
  return acc;
}

std::vector<double> poly_derivative(const std::vector<double>& c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = static_cast<double>(k) * c[k];
  return d;
}

bool near_le(double a, double b) { return a <= b + 1e-12 * (1.0 + std::abs(b)); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void AdmissibilityBox::validate() const {
  if (dim < 1) throw PreconditionError("AdmissibilityBox: dim must be >= 1");
  if (!(u_lo <= u_hi))
    throw PreconditionError("AdmissibilityBox: u_lo " + fmt(u_lo) + " exceeds u_hi " + fmt(u_hi));
  if (!(grad_sq_max >= 0.0)) throw PreconditionError("AdmissibilityBox: grad_sq_max must be >= 0");
  if (!(grad_sq_min >= 0.0 && grad_sq_min <= grad_sq_max))
    throw PreconditionError("AdmissibilityBox: need 0 <= grad_sq_min <= grad_sq_max");
}

double PsiTable::radial_at(double u, double s) const {
  if (radial) return radial(u, s);
  if (s == 0.0) return psi(u, s);
  return psi(u, s) + 2.0 * s * psi_s(u, s);
}

GTable power_g(double m) {
  return GTable{
      [m](double u) { return scaled_pow(1.0, u, m); },
      [m](double u) { return scaled_pow(m, u, m - 1.0); },
      [m](double u) { return scaled_pow(m * (m - 1.0), u, m - 2.0); },
      [m](double u) { return scaled_pow(m * (m - 1.0) * (m - 2.0), u, m - 3.0); },
  };
}

GTable poly_g(std::vector<double> coeffs) {
  if (coeffs.empty()) coeffs = {0.0};
  auto d1 = poly_derivative(coeffs);
  auto d2 = poly_derivative(d1);
  auto d3 = poly_derivative(d2);
  return GTable{
      [c = std::move(coeffs)](double u) { return horner(c, u); },
      [c = std::move(d1)](double u) { return horner(c, u); },
      [c = std::move(d2)](double u) { return horner(c, u); },
      [c = std::move(d3)](double u) { return horner(c, u); },
  };
}

PsiTable hydrology_full_psi() {
  // psi = h(u) f(s), h = u(1-u), f = 1/(1+s)
  return PsiTable{
      [](double u, double s) { return u * (1.0 - u) / (1.0 + s); },
      [](double u, double s) { return (1.0 - 2.0 * u) / (1.0 + s); },
      [](double u, double s) { return -u * (1.0 - u) / ((1.0 + s) * (1.0 + s)); },
      [](double, double s) { return -2.0 / (1.0 + s); },
      [](double u, double s) { return -(1.0 - 2.0 * u) / ((1.0 + s) * (1.0 + s)); },
      [](double u, double s) { return u * (1.0 - u) * (1.0 - s) / ((1.0 + s) * (1.0 + s)); },
  };
}

PsiTable hydrology_simplified_psi() {
  return PsiTable{
      [](double u, double) { return u * (1.0 - u); },
      [](double u, double) { return 1.0 - 2.0 * u; },
      [](double, double) { return 0.0; },
      [](double, double) { return -2.0; },
      [](double, double) { return 0.0; },
      [](double u, double) { return u * (1.0 - u); },
  };
}

PsiTable doubly_nonlinear_psi(double m, double p_exp) {
  if (!(m >= 1.0)) throw PreconditionError("doubly_nonlinear_psi: need m >= 1");
  if (!(p_exp >= 1.0)) throw PreconditionError("doubly_nonlinear_psi: need p >= 1");
  // psi = k u^alpha s^beta with k = m^{p-1}, alpha = (m-1)(p-1), beta = (p-2)/2
  const double k = std::pow(m, p_exp - 1.0);
  const double alpha = (m - 1.0) * (p_exp - 1.0);
  const double beta = 0.5 * (p_exp - 2.0);
  auto h = [=](double u) { return scaled_pow(k, u, alpha); };
  auto dh = [=](double u) { return scaled_pow(k * alpha, u, alpha - 1.0); };
  auto d2h = [=](double u) { return scaled_pow(k * alpha * (alpha - 1.0), u, alpha - 2.0); };
  auto f = [=](double s) { return scaled_pow(1.0, s, beta); };
  auto df = [=](double s) { return scaled_pow(beta, s, beta - 1.0); };
  return PsiTable{
      [=](double u, double s) { return h(u) * f(s); },
      [=](double u, double s) { return dh(u) * f(s); },
      [=](double u, double s) { return h(u) * df(s); },
      [=](double u, double s) { return d2h(u) * f(s); },
      [=](double u, double s) { return dh(u) * df(s); },
      [=](double u, double s) { return (p_exp - 1.0) * h(u) * f(s); },
  };
}

ModelSpec::ModelSpec(ModelKind kind, std::string name, std::vector<double> params,
                     AdmissibilityBox box, std::variant<GTable, PsiTable> table)
    : kind_(kind),
      name_(std::move(name)),
      params_(std::move(params)),
      box_(box),
      table_(std::move(table)) {
  check_invariants();
}

void ModelSpec::check_invariants() const {
  box_.validate();
  switch (kind_) {
    case ModelKind::Pme:
      if (!(params_.at(0) >= 1.0)) throw PreconditionError("pme: need m >= 1, got " + fmt(params_[0]));
      if (box_.u_lo < 0.0) throw PreconditionError("pme: box lower bound must be >= 0");
      break;
    case ModelKind::DoublyNonlinear:
      if (!(params_.at(0) >= 1.0))
        throw PreconditionError("doubly_nonlinear: need m >= 1, got " + fmt(params_[0]));
      if (!(params_.at(1) >= 2.0))
        throw PreconditionError("doubly_nonlinear: need p >= 2, got " + fmt(params_[1]));
      if (box_.u_lo < 0.0) throw PreconditionError("doubly_nonlinear: box lower bound must be >= 0");
      break;
    case ModelKind::HydrologyFull:
      if (box_.grad_sq_max > 1.0)
        throw PreconditionError("hydrology_full: grad_sq_max must be <= 1, got " +
                                fmt(box_.grad_sq_max));
      break;
    default:
      break;
  }
}

ModelSpec ModelSpec::pme(double m, AdmissibilityBox box) {
  return ModelSpec(ModelKind::Pme, "pme", {m}, box, power_g(m));
}

ModelSpec ModelSpec::g_diffusion(GTable g, AdmissibilityBox box, std::vector<double> params) {
  return ModelSpec(ModelKind::GDiffusion, "gdiff", std::move(params), box, std::move(g));
}

ModelSpec ModelSpec::psi_diffusion(PsiTable psi, AdmissibilityBox box) {
  return ModelSpec(ModelKind::PsiDiffusion, "psi", {}, box, std::move(psi));
}

ModelSpec ModelSpec::hydrology_full(int dim) {
  const double delta = hydrology_delta(dim);
  AdmissibilityBox box{0.5 - delta, 0.5 + delta, 1.0, dim};
  return ModelSpec(ModelKind::HydrologyFull, "psi:hydrology_full", {}, box, hydrology_full_psi());
}

ModelSpec ModelSpec::hydrology_simplified(int dim, double grad_bound) {
  if (!(grad_bound > 0.0)) throw PreconditionError("hydrology_simple: need M > 0");
  const double delta = hydrology_delta(dim);
  AdmissibilityBox box{0.5 - delta, 0.5 + delta, grad_bound * grad_bound, dim};
  return ModelSpec(ModelKind::HydrologySimplified, "psi:hydrology_simple", {grad_bound}, box,
                   hydrology_simplified_psi());
}

ModelSpec ModelSpec::doubly_nonlinear(double m, double p_exp, AdmissibilityBox box) {
  if (!(p_exp >= 2.0))
    throw PreconditionError("doubly_nonlinear: need p >= 2, got " + fmt(p_exp));
  return ModelSpec(ModelKind::DoublyNonlinear, "doubly_nonlinear", {m, p_exp}, box,
                   doubly_nonlinear_psi(m, p_exp));
}

const GTable& ModelSpec::g_table() const {
  if (const auto* g = std::get_if<GTable>(&table_)) return *g;
  throw PreconditionError(name_ + " is not a G-form model");
}

const PsiTable& ModelSpec::psi_table() const {
  if (const auto* p = std::get_if<PsiTable>(&table_)) return *p;
  throw PreconditionError(name_ + " is not a psi-form model");
}

ModelSpec ModelSpec::with_box(AdmissibilityBox box) const {
  ModelSpec copy = *this;
  copy.box_ = box;
  copy.check_invariants();
  return copy;
}

void ModelSpec::require_in_box(double u, double s) const {
  if (!near_le(box_.u_lo, u))
    throw DomainError(name_ + ": u = " + fmt(u) + " below u_lo = " + fmt(box_.u_lo));
  if (!near_le(u, box_.u_hi))
    throw DomainError(name_ + ": u = " + fmt(u) + " above u_hi = " + fmt(box_.u_hi));
  if (!near_le(s, box_.grad_sq_max))
    throw DomainError(name_ + ": |p|^2 = " + fmt(s) + " above grad_sq_max = " +
                      fmt(box_.grad_sq_max));
  if (!near_le(box_.grad_sq_min, s))
    throw DomainError(name_ + ": |p|^2 = " + fmt(s) + " below grad_sq_min = " +
                      fmt(box_.grad_sq_min));
}

ModelSpec builtin_model(const std::string& name, const std::vector<double>& params, int dim,
                        const BoxOverrides& overrides) {
  auto param = [&](std::size_t i, double fallback) {
    return i < params.size() ? params[i] : fallback;
  };
  auto apply = [&](AdmissibilityBox box) {
    if (overrides.u_lo) box.u_lo = *overrides.u_lo;
    if (overrides.u_hi) box.u_hi = *overrides.u_hi;
    if (overrides.grad_sq_max) box.grad_sq_max = *overrides.grad_sq_max;
    return box;
  };
  const double inf = std::numeric_limits<double>::infinity();

  if (name == "pme") {
    if (params.empty()) throw PreconditionError("pme: missing exponent m");
    return ModelSpec::pme(params[0], apply({0.0, 1.0, inf, dim}));
  }
  if (name == "gdiff:poly") {
    if (params.empty()) throw PreconditionError("gdiff:poly: missing coefficients");
    return ModelSpec::g_diffusion(poly_g(params), apply({0.0, 1.0, inf, dim}), params);
  }
  if (name == "psi:hydrology_full" || name == "hydrology_full") {
    return ModelSpec::hydrology_full(dim).with_box(apply(ModelSpec::hydrology_full(dim).box()));
  }
  if (name == "psi:hydrology_simple" || name == "hydrology_simple") {
    auto model = ModelSpec::hydrology_simplified(dim, param(0, 1.0));
    return model.with_box(apply(model.box()));
  }
  if (name == "doubly_nonlinear") {
    if (params.size() < 2) throw PreconditionError("doubly_nonlinear: need parameters m and p");
    return ModelSpec::doubly_nonlinear(params[0], params[1], apply({0.0, 1.0, inf, dim}));
  }
  throw PreconditionError("unknown model '" + name + "'");
}

namespace {

void check_shapes(const ModelSpec& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& p) {
  const auto d = static_cast<Eigen::Index>(model.dim());
  if (X.rows() != d || X.cols() != d || p.size() != d)
    throw PreconditionError(model.name() + ": X and p must match the model dimension");
}

}  // namespace

double eval_F(const ModelSpec& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& p, double u,
              BoxCheck check) {
  check_shapes(model, X, p);
  const double s = p.squaredNorm();
  if (check == BoxCheck::Enforce) model.require_in_box(u, s);
  if (model.form() == FluxForm::G) {
    const auto& g = model.g_table();
    return g.dG(u) * X.trace() + g.d2G(u) * s;
  }
  const auto& t = model.psi_table();
  double f = t.psi(u, s) * X.trace() + t.psi_u(u, s) * s;
  if (s > 0.0) f += 2.0 * t.psi_s(u, s) * p.dot(X * p);
  return f;
}

FDerivatives F_derivatives(const ModelSpec& model, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& p, double u, BoxCheck check) {
  check_shapes(model, X, p);
  const double s = p.squaredNorm();
  if (check == BoxCheck::Enforce) model.require_in_box(u, s);
  const auto d = X.rows();
  FDerivatives out;
  if (model.form() == FluxForm::G) {
    const auto& g = model.g_table();
    out.dX = g.dG(u) * Eigen::MatrixXd::Identity(d, d);
    out.du = g.d2G(u) * X.trace() + g.d3G(u) * s;
    return out;
  }
  const auto& t = model.psi_table();
  out.dX = t.psi(u, s) * Eigen::MatrixXd::Identity(d, d);
  out.du = t.psi_u(u, s) * X.trace() + t.psi_uu(u, s) * s;
  if (s > 0.0) {
    out.dX += 2.0 * t.psi_s(u, s) * (p * p.transpose());
    out.du += 2.0 * t.psi_us(u, s) * p.dot(X * p);
  }
  return out;
}

double face_flux(const ModelSpec& model, double u_left, double u_right,
                 std::span<const double> grad_face, int axis, double h) {
  if (model.form() == FluxForm::G) {
    const auto& G = model.g_table().G;
    return (G(u_right) - G(u_left)) / h;
  }
  double s = 0.0;
  for (double g : grad_face) s += g * g;
  const double u_face = 0.5 * (u_left + u_right);
  return model.psi_table().psi(u_face, s) * grad_face[static_cast<std::size_t>(axis)];
}

std::pair<double, double> effective_diffusivities(const ModelSpec& model, double u, double s,
                                                  BoxCheck check) {
  if (check == BoxCheck::Enforce) model.require_in_box(u, s);
  if (model.form() == FluxForm::G) {
    const double d = model.g_table().dG(u);
    return {d, d};
  }
  const auto& t = model.psi_table();
  return {t.psi(u, s), t.radial_at(u, s)};
}

}  // namespace gradbound

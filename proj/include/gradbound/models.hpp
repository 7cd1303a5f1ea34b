#pragma once

// The equation zoo. Every model is autonomous and comes in one of two
// shapes:
//
//   G-form:   u_t = Lap G(u),                 F = G'(u) tr X + G''(u) |p|^2
//   psi-form: u_t = div(psi(u, |Du|^2) Du),   F = (psi I + 2 psi_s p(x)p) : X
//                                                 + psi_u |p|^2
//
// Coefficient derivatives are closed-form so the certifier can resolve
// inequalities that hold with equality on the box boundary.

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gradbound {

struct AdmissibilityBox {
  double u_lo = 0.0;
  double u_hi = 1.0;
  double grad_sq_max = 1.0;  // L = M^2
  int dim = 1;
  double grad_sq_min = 0.0;  // > 0 only for psi tables singular at s = 0

  void validate() const;
};

struct GTable {
  std::function<double(double)> G;
  std::function<double(double)> dG;
  std::function<double(double)> d2G;
  std::function<double(double)> d3G;
};

struct PsiTable {
  std::function<double(double, double)> psi;
  std::function<double(double, double)> psi_u;
  std::function<double(double, double)> psi_s;
  std::function<double(double, double)> psi_uu;
  std::function<double(double, double)> psi_us;
  // psi + 2 s psi_s; optional, needed where psi_s itself blows up at s = 0.
  std::function<double(double, double)> radial;

  double radial_at(double u, double s) const;
};

GTable power_g(double m);
/// G(u) = sum_k coeffs[k] u^k.
GTable poly_g(std::vector<double> coeffs);

PsiTable hydrology_full_psi();
PsiTable hydrology_simplified_psi();
/// psi(u, s) = (m u^{m-1})^{p-1} s^{(p-2)/2}, the flux of Delta_p(u^m).
/// Valid for any p >= 1 on boxes with s > 0; p >= 2 also at s = 0.
PsiTable doubly_nonlinear_psi(double m, double p_exp);

enum class ModelKind {
  Pme,
  GDiffusion,
  PsiDiffusion,
  HydrologyFull,
  HydrologySimplified,
  DoublyNonlinear,
};

enum class FluxForm { G, Psi };

enum class BoxCheck { Enforce, Skip };

class ModelSpec {
 public:
  static ModelSpec pme(double m, AdmissibilityBox box);
  static ModelSpec g_diffusion(GTable g, AdmissibilityBox box, std::vector<double> params = {});
  static ModelSpec psi_diffusion(PsiTable psi, AdmissibilityBox box);
  static ModelSpec hydrology_full(int dim);
  static ModelSpec hydrology_simplified(int dim, double grad_bound);
  static ModelSpec doubly_nonlinear(double m, double p_exp, AdmissibilityBox box);

  ModelKind kind() const { return kind_; }
  FluxForm form() const { return std::holds_alternative<GTable>(table_) ? FluxForm::G : FluxForm::Psi; }
  const std::string& name() const { return name_; }
  const std::vector<double>& params() const { return params_; }
  const AdmissibilityBox& box() const { return box_; }
  int dim() const { return box_.dim; }

  const GTable& g_table() const;
  const PsiTable& psi_table() const;

  /// Copy of this model on a different box (model invariants re-checked).
  ModelSpec with_box(AdmissibilityBox box) const;

  /// Throws DomainError naming the violated bound.
  void require_in_box(double u, double s) const;

 private:
  ModelSpec(ModelKind kind, std::string name, std::vector<double> params, AdmissibilityBox box,
            std::variant<GTable, PsiTable> table);
  void check_invariants() const;

  ModelKind kind_;
  std::string name_;
  std::vector<double> params_;
  AdmissibilityBox box_;
  std::variant<GTable, PsiTable> table_;
};

struct BoxOverrides {
  std::optional<double> u_lo;
  std::optional<double> u_hi;
  std::optional<double> grad_sq_max;

  bool operator==(const BoxOverrides&) const = default;
};

/// Constructs a model from its CLI name: `pme` [m], `gdiff:poly` [c0, c1, ...],
/// `psi:hydrology_full` [], `psi:hydrology_simple` [M],
/// `doubly_nonlinear` [m, p].
ModelSpec builtin_model(const std::string& name, const std::vector<double>& params, int dim,
                        const BoxOverrides& overrides = {});

/// First derivatives of F with respect to X and u, and the D_xF . p slot
/// (zero for every shipped model).
struct FDerivatives {
  Eigen::MatrixXd dX;
  double du = 0.0;
  double dx_dot_p = 0.0;
};

double eval_F(const ModelSpec& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& p, double u,
              BoxCheck check = BoxCheck::Enforce);

FDerivatives F_derivatives(const ModelSpec& model, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& p, double u,
                           BoxCheck check = BoxCheck::Enforce);

/// Flux through the face between `u_left` and its +1 neighbour `u_right`
/// along `axis`. G-form ignores `grad_face` and returns (G(u_r) - G(u_l)) / h.
double face_flux(const ModelSpec& model, double u_left, double u_right,
                 std::span<const double> grad_face, int axis, double h);

/// (tangential, radial) eigenvalues of the diffusion tensor at (u, s = |p|^2).
std::pair<double, double> effective_diffusivities(const ModelSpec& model, double u, double s,
                                                  BoxCheck check = BoxCheck::Enforce);

}  // namespace gradbound

#pragma once

// Sampling certifier for the structural conditions that make the gradient
// sup-norm non-expanding.
//
// Every check walks a grid (or a seeded random sample) of the admissibility
// box and records a normalized slack, value / (1 + local magnitude). A sample
// passes when its slack is >= -tol, so tol acts as an absolute tolerance plus
// the same tolerance relative to the magnitude of the terms involved. The
// report keeps the smallest slack and the first sample that attained it.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gradbound/models.hpp"

namespace gradbound {

inline constexpr double kDefaultTolCert = 1e-9;
inline constexpr std::uint64_t kDefaultSeed = 20240917;

/// c + b (e . Lambda) + a |Lambda|^2 over Lambda in R^{dim-1}, with
/// e = (1, ..., 1).
struct QuadraticForm {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  int dim = 1;
};

struct Witness {
  double u = 0.0;
  double s = 0.0;
  std::vector<double> lambda;
};

struct CertReport {
  std::string condition;
  bool pass = true;
  double worst_margin = 0.0;
  Witness witness;
  std::size_t samples = 0;
  std::optional<std::uint64_t> seed;
  std::vector<CertReport> parts;
};

/// Exact minimum c - (dim-1) b^2 / (4a). Requires a > 0.
double quadratic_min_closed_form(const QuadraticForm& q);

/// Minimum over the uniform tensor grid of n_steps points per coordinate in
/// [-radius, radius]^{dim-1}. The objective is a sum of identical
/// one-dimensional terms, so the tensor-grid minimum is c plus (dim-1) times
/// the minimum over the one-dimensional grid; it is computed that way.
double quadratic_min_brute_force(const QuadraticForm& q, double radius, long n_steps);

/// Left side of the differential inequality,
/// -D_XF : X^2 + |p|^2 D_uF + D_xF . p, for given F derivatives.
double inequality_A_lhs(const FDerivatives& der, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& p);

/// Coefficients of the reduced quadratic form at (u, s = |p|^2).
QuadraticForm reduced_form(const ModelSpec& model, double u, double s);

CertReport check_differential_inequality_A(const ModelSpec& model, int n_u = 201, int n_s = 201,
                                           int n_matrix_samples = 2000,
                                           std::uint64_t seed = kDefaultSeed,
                                           double tol = kDefaultTolCert);

CertReport check_G_condition(const GTable& g, int dim, double u_lo, double u_hi, int n_u = 201,
                             double tol = kDefaultTolCert);

CertReport check_psi_condition(const PsiTable& psi, int dim, const AdmissibilityBox& box,
                               int n_u = 201, int n_s = 201, double tol = kDefaultTolCert);

/// Degenerate parabolicity. `probe` replaces the model box for sampling,
/// which lets a caller look outside the region the model was built for.
CertReport check_parabolicity(const ModelSpec& model, int n_samples = 2000,
                              std::uint64_t seed = kDefaultSeed, double tol = kDefaultTolCert,
                              std::optional<AdmissibilityBox> probe = std::nullopt);

/// All checks that apply to the model, as one composite report.
CertReport certify_model(const ModelSpec& model, int n_u = 201, int n_s = 201,
                         int n_matrix_samples = 2000, std::uint64_t seed = kDefaultSeed,
                         double tol = kDefaultTolCert);

/// Largest porous-medium exponent covered: 1 + 4 / (3 + dim).
double pme_m_max(int dim);
/// Half-width of the hydrology box: (2 + 2 dim)^{-1/2}.
double hydrology_delta(int dim);
/// Largest admissible (m-1)(p-1) for Delta_p(u^m): 4 / (3 + dim).
double doubly_nonlinear_window(int dim);

/// Writes `condition`, `verdict`, `worst_margin`, `witness_u`, `witness_s`,
/// `witness_lambda`, `samples`, `seed` as `key = value` lines, one block per
/// report (parts follow their parent, separated by blank lines).
void write_report(std::ostream& os, const CertReport& report);

}  // namespace gradbound

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gradbound/grid.hpp"
#include "gradbound/models.hpp"

namespace gradbound {

struct DiagnosticsRow {
  double t = 0.0;
  double dt = 0.0;
  double max_grad = 0.0;  // sup |Du|; the w-maximum is max_grad^2 / 2
  double u_min = 0.0;
  double u_max = 0.0;
  double mass = 0.0;
  std::optional<double> w_rate;
  double w_rate_scale = 0.0;  // magnitude of the terms entering w_rate
};

struct BoundVerdict {
  std::string name;
  bool pass = true;
  double worst_violation = 0.0;  // > 0 means the bound was exceeded by that much
  double time = 0.0;             // time of the worst row
};

struct RunDiagnostics {
  std::vector<DiagnosticsRow> rows;
  std::vector<BoundVerdict> verdicts;
};

/// Appends statistics of `u` at time `t`. Throws PreconditionError unless t
/// is strictly after the last recorded row.
void record_row(RunDiagnostics& diag, double t, double dt, const ScalarField& u,
                const ModelSpec& model, bool with_w_rate = true);

struct WRate {
  double rate = 0.0;
  double scale = 0.0;
  std::size_t node = 0;
};

/// Right side of the evolution inequality for w = |Du|^2 / 2 at the node
/// where w is largest (lowest index on ties):
///   -D_XF : (D^2u)^2 + 2 w D_uF + D_xF . Du
/// with Du and D^2u from centred differences. `scale` is the same expression
/// with every coefficient replaced by its absolute value and D^2u by the
/// largest discrete Hessian norm on the grid.
WRate w_rate_at_argmax(const ModelSpec& model, const ScalarField& u);

/// Gradient, range and mass verdicts against the first row.
std::vector<BoundVerdict> verdict_bounds(const RunDiagnostics& diag, double tol_grad);

inline constexpr double kRangeTol = 1e-12;
inline constexpr double kMassDriftTol = 1e-10;

/// `t,dt,max_grad,u_min,u_max,mass,w_rate`, full precision.
void write_diagnostics_csv(std::ostream& os, const RunDiagnostics& diag);

void write_verdicts(std::ostream& os, const std::vector<BoundVerdict>& verdicts);

bool all_pass(const std::vector<BoundVerdict>& verdicts);

}  // namespace gradbound

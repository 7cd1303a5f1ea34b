#pragma once

// Explicit conservative time stepping on the torus.
//
// G-form models use the standard 3/5-point Laplacian of G(u), which is
// monotone for dt <= h^2 / (2 d max G'). psi-form models use face fluxes
// psi(u_face, |p_face|^2) p_face with arithmetic face averages; the range of
// u is checked at runtime instead of assumed.

#include <cstddef>
#include <functional>
#include <vector>

#include "gradbound/diagnostics.hpp"
#include "gradbound/grid.hpp"
#include "gradbound/models.hpp"

namespace gradbound {

struct SolverConfig {
  int n = 128;
  int dim = 1;
  double t_end = 0.1;
  double cfl_safety = 0.9;
  double output_every = 0.01;  // <= 0 records only t = 0 and t_end
  std::vector<double> snapshot_times;
  bool compute_w_rate = true;
  // called after every step with the new time and field
  std::function<void(double, const ScalarField&)> on_step;

  void validate() const;
};

/// cfl_safety * h^2 / (2 d D_max), D_max the largest effective diffusivity
/// over nodes and faces; cfl_safety * h^2 when D_max = 0.
double compute_dt_cfl(const ModelSpec& model, const ScalarField& u, double cfl_safety);

/// Face fluxes of the model for the current field.
FaceFlux model_face_fluxes(const ModelSpec& model, const ScalarField& u);

/// One forward-Euler step. Throws PreconditionError if dt exceeds the CFL
/// bound, InstabilityError if the result is not finite.
ScalarField step_explicit(const ModelSpec& model, const ScalarField& u, double dt,
                          std::size_t step_index = 0);

struct RunResult {
  ScalarField final_field;
  RunDiagnostics diagnostics;
  std::vector<Snapshot> snapshots;
  std::size_t steps = 0;
};

/// Advances u0 to config.t_end. Initial data outside the model box (values
/// or gradient ball) and any later excursion raise BoxExitError.
RunResult run(const ModelSpec& model, const ScalarField& u0, const SolverConfig& config);

struct GapRow {
  double t;
  double max_gap;  // max over nodes of u - v
};

struct ComparisonReport {
  double max_gap = 0.0;  // over every step
  double time_of_max = 0.0;
  std::vector<GapRow> rows;  // at the output cadence
  ScalarField u_final;
  ScalarField v_final;
  std::size_t steps = 0;
};

/// Co-evolves u0 <= v0 with a shared dt sequence (the smaller CFL step).
ComparisonReport comparison_run(const ModelSpec& model, const ScalarField& u0,
                                const ScalarField& v0, const SolverConfig& config);

/// Throws BoxExitError if u leaves [u_lo - tol, u_hi + tol].
void require_field_in_box(const ModelSpec& model, const ScalarField& u, double t);

}  // namespace gradbound

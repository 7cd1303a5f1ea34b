#include "gradbound/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "gradbound/errors.hpp"

namespace gradbound {

namespace {

constexpr double kBoxTol = 1e-9;

// Gradient on the face between `node` and its +1 neighbour along `axis`:
// normal difference plus the average of the two nodes' centred tangential
// differences.
std::array<double, 2> face_gradient(const ScalarField& u, std::size_t node, int axis) {
  const auto& g = u.grid;
  const double h = g.h();
  const std::size_t right = g.neighbor(node, axis, 1);
  std::array<double, 2> grad{0.0, 0.0};
  grad[static_cast<std::size_t>(axis)] = (u[right] - u[node]) / h;
  if (g.dim() == 2) {
    const int t = 1 - axis;
    const double left_t = u[g.neighbor(node, t, 1)] - u[g.neighbor(node, t, -1)];
    const double right_t = u[g.neighbor(right, t, 1)] - u[g.neighbor(right, t, -1)];
    grad[static_cast<std::size_t>(t)] = 0.5 * (left_t + right_t) / (2.0 * h);
  }
  return grad;
}

double squared(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

ScalarField advance(const ModelSpec& model, const ScalarField& u, double dt, std::size_t step) {
  const auto flux = model_face_fluxes(model, u);
  const auto div = divergence_of_face_flux(u.grid, flux);
  ScalarField next(u.grid);
  for (std::size_t i = 0; i < u.size(); ++i) {
    next[i] = u[i] + dt * div[i];
    if (!std::isfinite(next[i])) {
      std::ostringstream os;
      os << model.name() << ": non-finite value at node " << i << " in step " << step;
      throw InstabilityError(os.str(), step);
    }
  }
  return next;
}

void validate_initial(const ModelSpec& model, const ScalarField& u0, const std::string& label) {
  if (u0.grid.dim() != model.dim())
    throw PreconditionError(label + ": field dimension does not match the model");
  if (!u0.all_finite()) throw PreconditionError(label + ": initial data not finite");
  require_field_in_box(model, u0, 0.0);
  const double g = sup_grad_norm(u0);
  const double cap = model.box().grad_sq_max;
  if (g * g > cap * (1.0 + 1e-12)) {
    std::ostringstream os;
    os.precision(17);
    os << label << ": initial sup|Du|^2 = " << g * g << " exceeds grad_sq_max = " << cap;
    throw BoxExitError(os.str());
  }
}

// Output times k * output_every (the last one snapped to t_end) merged with
// the requested snapshot times.
class EventClock {
 public:
  explicit EventClock(const SolverConfig& c) : config_(c), snapshots_(c.snapshot_times) {
    std::sort(snapshots_.begin(), snapshots_.end());
    while (next_snap_ < snapshots_.size() && snapshots_[next_snap_] <= 0.0) ++next_snap_;
  }

  double next_output() const {
    if (config_.output_every <= 0.0) return config_.t_end;
    const double next = static_cast<double>(outputs_ + 1) * config_.output_every;
    return next >= config_.t_end * (1.0 - 1e-12) ? config_.t_end : next;
  }

  double next_event() const {
    const double out = next_output();
    if (next_snap_ < snapshots_.size() && snapshots_[next_snap_] < out) return snapshots_[next_snap_];
    return out;
  }

  /// Called after landing on `t`; reports which events fire there.
  std::pair<bool, bool> arrive(double t) {
    bool output = false;
    bool snapshot = false;
    if (t == next_output()) {
      output = true;
      ++outputs_;
    }
    while (next_snap_ < snapshots_.size() && snapshots_[next_snap_] <= t) {
      snapshot = snapshot || snapshots_[next_snap_] == t;
      ++next_snap_;
    }
    return {output, snapshot};
  }

  bool snapshot_at_zero() const {
    return std::find(snapshots_.begin(), snapshots_.end(), 0.0) != snapshots_.end();
  }

 private:
  const SolverConfig& config_;
  std::vector<double> snapshots_;
  std::size_t next_snap_ = 0;
  long outputs_ = 0;
};

}  // namespace

void SolverConfig::validate() const {
  if (!(t_end > 0.0)) throw PreconditionError("SolverConfig: t_end must be > 0");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
    throw PreconditionError("SolverConfig: cfl_safety must lie in (0, 1]");
  if (n < 4) throw PreconditionError("SolverConfig: n must be >= 4");
  if (dim != 1 && dim != 2) throw PreconditionError("SolverConfig: dim must be 1 or 2");
}

void require_field_in_box(const ModelSpec& model, const ScalarField& u, double t) {
  const auto& box = model.box();
  const double lo = box.u_lo - kBoxTol * (1.0 + std::abs(box.u_lo));
  const double hi = box.u_hi + kBoxTol * (1.0 + std::abs(box.u_hi));
  const auto [umin, umax] = field_minmax(u);
  if (umin < lo || umax > hi) {
    std::ostringstream os;
    os.precision(17);
    os << model.name() << ": field range [" << umin << ", " << umax << "] leaves box ["
       << box.u_lo << ", " << box.u_hi << "] at t = " << t;
    throw BoxExitError(os.str());
  }
}

FaceFlux model_face_fluxes(const ModelSpec& model, const ScalarField& u) {
  const auto& g = u.grid;
  const double h = g.h();
  FaceFlux flux(static_cast<std::size_t>(g.dim()), std::vector<double>(g.size()));
  if (model.form() == FluxForm::G) {
    // (G(u_r) - G(u_l)) / h with G evaluated once per node
    const auto& G = model.g_table().G;
    std::vector<double> gv(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) gv[i] = G(u[i]);
    for (int a = 0; a < g.dim(); ++a)
      for (std::size_t i = 0; i < g.size(); ++i) flux[a][i] = (gv[g.neighbor(i, a, 1)] - gv[i]) / h;
    return flux;
  }
  for (int a = 0; a < g.dim(); ++a) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto grad = face_gradient(u, i, a);
      flux[a][i] = face_flux(model, u[i], u[g.neighbor(i, a, 1)],
                             std::span<const double>(grad.data(), static_cast<std::size_t>(g.dim())),
                             a, h);
    }
  }
  return flux;
}

double compute_dt_cfl(const ModelSpec& model, const ScalarField& u, double cfl_safety) {
  const auto& g = u.grid;
  const int d = g.dim();
  const double h = g.h();
  double dmax = 0.0;
  auto offer = [&](double uu, double s) {
    const auto [t, r] = effective_diffusivities(model, uu, s, BoxCheck::Skip);
    dmax = std::max({dmax, std::abs(t), std::abs(r)});
  };
  if (model.form() == FluxForm::G) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      offer(u[i], 0.0);
      for (int a = 0; a < d; ++a) offer(0.5 * (u[i] + u[g.neighbor(i, a, 1)]), 0.0);
    }
  } else {
    const auto grad = gradient_centered(u);
    for (std::size_t i = 0; i < g.size(); ++i) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) s += grad.components[a][i] * grad.components[a][i];
      offer(u[i], s);
      for (int a = 0; a < d; ++a) {
        const auto fg = face_gradient(u, i, a);
        offer(0.5 * (u[i] + u[g.neighbor(i, a, 1)]),
              squared(std::span<const double>(fg.data(), static_cast<std::size_t>(d))));
      }
    }
  }
  if (dmax == 0.0) return cfl_safety * h * h;
  return cfl_safety * h * h / (2.0 * d * dmax);
}

ScalarField step_explicit(const ModelSpec& model, const ScalarField& u, double dt,
                          std::size_t step_index) {
  if (!(dt > 0.0)) throw PreconditionError("step_explicit: dt must be > 0");
  const double limit = compute_dt_cfl(model, u, 1.0);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os.precision(17);
    os << "step_explicit: dt = " << dt << " exceeds the CFL bound " << limit;
    throw PreconditionError(os.str());
  }
  return advance(model, u, dt, step_index);
}

RunResult run(const ModelSpec& model, const ScalarField& u0, const SolverConfig& config) {
  config.validate();
  validate_initial(model, u0, "run");

  RunResult result{u0, {}, {}, 0};
  ScalarField& u = result.final_field;
  record_row(result.diagnostics, 0.0, 0.0, u, model, config.compute_w_rate);

  EventClock clock(config);
  if (clock.snapshot_at_zero()) result.snapshots.push_back({u, 0.0});

  double t = 0.0;
  while (t < config.t_end) {
    double dt = compute_dt_cfl(model, u, config.cfl_safety);
    const double event = clock.next_event();
    double t_next = t + dt;
    if (t_next >= event) {
      t_next = event;
      dt = event - t;
    }
    u = advance(model, u, dt, result.steps);
    ++result.steps;
    t = t_next;
    require_field_in_box(model, u, t);
    if (config.on_step) config.on_step(t, u);

    const auto [output, snapshot] = clock.arrive(t);
    if (output) record_row(result.diagnostics, t, dt, u, model, config.compute_w_rate);
    if (snapshot) result.snapshots.push_back({u, t});
  }
  result.diagnostics.verdicts = verdict_bounds(result.diagnostics, 0.0);
  return result;
}

ComparisonReport comparison_run(const ModelSpec& model, const ScalarField& u0,
                                const ScalarField& v0, const SolverConfig& config) {
  config.validate();
  if (!(u0.grid == v0.grid)) throw PreconditionError("comparison_run: fields live on different grids");
  for (std::size_t i = 0; i < u0.size(); ++i)
    if (u0[i] > v0[i]) {
      std::ostringstream os;
      os << "comparison_run: u0 > v0 at node " << i;
      throw PreconditionError(os.str());
    }
  validate_initial(model, u0, "comparison_run(u0)");
  validate_initial(model, v0, "comparison_run(v0)");

  auto gap = [](const ScalarField& a, const ScalarField& b) {
    double g = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i) g = std::max(g, a[i] - b[i]);
    return g;
  };

  ComparisonReport rep{0.0, 0.0, {}, u0, v0, 0};
  ScalarField& u = rep.u_final;
  ScalarField& v = rep.v_final;
  rep.max_gap = gap(u, v);
  rep.rows.push_back({0.0, rep.max_gap});

  EventClock clock(config);
  double t = 0.0;
  while (t < config.t_end) {
    double dt = std::min(compute_dt_cfl(model, u, config.cfl_safety),
                         compute_dt_cfl(model, v, config.cfl_safety));
    const double event = clock.next_event();
    double t_next = t + dt;
    if (t_next >= event) {
      t_next = event;
      dt = event - t;
    }
    u = advance(model, u, dt, rep.steps);
    v = advance(model, v, dt, rep.steps);
    ++rep.steps;
    t = t_next;
    require_field_in_box(model, u, t);
    require_field_in_box(model, v, t);

    const double g = gap(u, v);
    if (g > rep.max_gap) {
      rep.max_gap = g;
      rep.time_of_max = t;
    }
    if (clock.arrive(t).first) rep.rows.push_back({t, g});
  }
  return rep;
}

}  // namespace gradbound

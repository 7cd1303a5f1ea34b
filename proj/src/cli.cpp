#include "gradbound/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "gradbound/errors.hpp"
#include "gradbound/solver.hpp"

namespace gradbound::cli {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  return os;
}

void write_effective_config(const fs::path& dir, const RunConfig& config) {
  fs::create_directories(dir);
  auto os = open_out(dir / "config.txt");
  write_config(os, config);
}

// Runs `body`, mapping library exceptions onto exit codes.
template <class Body>
int guarded(std::ostream& err, Body body) {
  try {
    return body();
  } catch (const BoxExitError& e) {
    err << "box violation: " << e.what() << '\n';
    return kExitBox;
  } catch (const InstabilityError& e) {
    err << "instability: " << e.what() << '\n';
    return kExitInstability;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const PreconditionError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  }
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

struct SweepPoint {
  double value = 0.0;
  int dim = 1;
  std::string certify;
  double worst = 0.0;
  std::string run;
};

ModelSpec sweep_model(const SweepOptions& o, double value, int dim) {
  if (o.family == "pme") return certification_model("pme", {value}, dim);
  if (o.family == "hydrology")
    return ModelSpec::hydrology_full(dim).with_box({0.5 - value, 0.5 + value, 1.0, dim});
  return ModelSpec::doubly_nonlinear(1.0 + value / (o.p - 1.0), o.p, {0.1, 1.0, 1.0, dim, 0.01});
}

std::string sweep_run_verdict(const ModelSpec& model) {
  if (model.dim() > 2) return "n/a";
  RunConfig rc;
  rc.dim = model.dim();
  rc.n = 64;
  rc.t_end = 0.05;
  rc.output_every = 0.01;
  rc.initial.mean = 0.5 * (model.box().u_lo + model.box().u_hi);
  rc.initial.amplitude = 0.1;
  auto solver = rc.solver_config();
  solver.compute_w_rate = false;
  try {
    const auto res = run(model, build_initial(rc.initial, PeriodicGrid(rc.dim, rc.n)), solver);
    return all_pass(res.diagnostics.verdicts) ? "pass" : "fail";
  } catch (const BoxExitError&) {
    return "box_exit";
  } catch (const InstabilityError&) {
    return "unstable";
  }
}

SweepPoint sweep_point(const SweepOptions& o, double value, int dim) {
  SweepPoint pt{value, dim, "", 0.0, ""};
  try {
    const auto model = sweep_model(o, value, dim);
    const auto rep = certify_model(model, o.grid, o.grid, o.samples, o.seed, o.tol);
    pt.certify = rep.pass ? "pass" : "fail";
    pt.worst = rep.worst_margin;
    if (o.run) pt.run = sweep_run_verdict(model);
  } catch (const PreconditionError&) {
    pt.certify = "invalid";
    pt.worst = std::numeric_limits<double>::quiet_NaN();
  }
  return pt;
}

}  // namespace

fs::path output_dir(const RunConfig& config, const std::optional<fs::path>& out) {
  if (out) return *out;
  return fs::path("runs") / config_hash(config);
}

int cmd_run(const RunConfig& config, const fs::path& dir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto model = config.build_model();
    const auto u0 = build_initial(config.initial, PeriodicGrid(config.dim, config.n));
    write_effective_config(dir, config);
    auto res = run(model, u0, config.solver_config());
    res.diagnostics.verdicts = verdict_bounds(res.diagnostics, config.tol_grad);
    {
      auto os = open_out(dir / "diagnostics.csv");
      write_diagnostics_csv(os, res.diagnostics);
    }
    {
      auto os = open_out(dir / "verdicts.txt");
      write_verdicts(os, res.diagnostics.verdicts);
    }
    for (std::size_t k = 0; k < res.snapshots.size(); ++k)
      write_snapshot(dir / ("snapshot_" + std::to_string(k) + ".txt"), res.snapshots[k].field,
                     res.snapshots[k].t);
    write_verdicts(out, res.diagnostics.verdicts);
    out << "steps = " << res.steps << "\noutput = " << dir.string() << '\n';
    return all_pass(res.diagnostics.verdicts) ? kExitOk : kExitFail;
  });
}

int cmd_compare(const RunConfig& config, const fs::path& dir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!config.initial2) throw ConfigError("compare needs initial2.* keys for the second field");
    const auto model = config.build_model();
    const PeriodicGrid grid(config.dim, config.n);
    const auto u0 = build_initial(config.initial, grid);
    const auto v0 = build_initial(*config.initial2, grid);
    write_effective_config(dir, config);
    const auto rep = comparison_run(model, u0, v0, config.solver_config());
    {
      auto os = open_out(dir / "gap.csv");
      os << std::setprecision(17) << "t,max_gap\n";
      for (const auto& r : rep.rows) os << r.t << ',' << r.max_gap << '\n';
    }
    out << "max_gap = " << fmt(rep.max_gap) << "\ntime_of_max = " << fmt(rep.time_of_max)
        << "\nsteps = " << rep.steps << "\noutput = " << dir.string() << '\n';
    return rep.max_gap <= kCompareGapTol ? kExitOk : kExitFail;
  });
}

ModelSpec certification_model(const std::string& name, const std::vector<double>& params, int dim,
                              const BoxOverrides& overrides) {
  const auto model = builtin_model(name, params, dim);
  AdmissibilityBox box = model.box();
  if (model.kind() == ModelKind::DoublyNonlinear)
    box = {0.1, 1.0, 1.0, dim, 0.01};
  else if (model.form() == FluxForm::G && !std::isfinite(box.grad_sq_max))
    box = {0.01, 1.0, 1.0, dim};
  if (overrides.u_lo) box.u_lo = *overrides.u_lo;
  if (overrides.u_hi) box.u_hi = *overrides.u_hi;
  if (overrides.grad_sq_max) box.grad_sq_max = *overrides.grad_sq_max;
  return model.with_box(box);
}

int cmd_certify(const CertifyOptions& o, const std::optional<fs::path>& dir, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&] {
    const auto model = certification_model(o.model, o.params, o.dim, o.box);
    const auto rep = certify_model(model, o.grid, o.grid, o.samples, o.seed, o.tol);
    write_report(out, rep);
    if (dir) {
      fs::create_directories(*dir);
      auto os = open_out(*dir / "certify.txt");
      write_report(os, rep);
    }
    return rep.pass ? kExitOk : kExitFail;
  });
}

std::vector<double> sweep_values(double from, double to, double step) {
  if (!std::isfinite(from) || !std::isfinite(to)) throw ConfigError("sweep: range ends must be finite");
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("sweep: step must be positive");
  std::vector<double> out;
  if (from > to) return out;
  const auto count = static_cast<long>(std::floor((to - from) / step + 1e-9)) + 1;
  for (long k = 0; k < count; ++k) {
    // snap to 12 decimals so 1 + 20 * 0.05 lands on 2 rather than next to it
    const double v = from + static_cast<double>(k) * step;
    out.push_back(std::round(v * 1e12) / 1e12);
  }
  return out;
}

int cmd_sweep(const SweepOptions& o, const fs::path& dir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (o.family != "pme" && o.family != "hydrology" && o.family != "doubly_nonlinear")
      throw ConfigError("sweep: unknown family '" + o.family + "'");
    if (o.dims.empty()) throw ConfigError("sweep: no dimensions given");
    for (int d : o.dims)
      if (d < 1) throw ConfigError("sweep: dimensions must be >= 1");
    if (o.family == "doubly_nonlinear" && !(o.p >= 2.0)) throw ConfigError("sweep: need p >= 2");
    const auto values = sweep_values(o.from, o.to, o.step);

    std::vector<SweepPoint> points;
    for (int d : o.dims)
      for (double v : values) points.push_back({v, d, "", 0.0, ""});

    // grid points are independent; each worker fills its own slots
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < points.size(); i = next++)
        points[i] = sweep_point(o, points[i].value, points[i].dim);
    };
    const unsigned n_workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                               static_cast<unsigned>(points.size())));
    {
      std::vector<std::jthread> pool;
      for (unsigned k = 0; k < n_workers; ++k) pool.emplace_back(worker);
    }

    std::ostringstream csv;
    csv << "parameter,dim,certify,worst_margin" << (o.run ? ",run" : "") << '\n';
    for (const auto& p : points) {
      csv << fmt(p.value) << ',' << p.dim << ',' << p.certify << ',' << fmt(p.worst);
      if (o.run) csv << ',' << p.run;
      csv << '\n';
    }
    fs::create_directories(dir);
    {
      auto os = open_out(dir / "sweep.csv");
      os << csv.str();
    }
    out << csv.str();
    return kExitOk;
  });
}

namespace {

void add_box_flags(CLI::App* cmd, BoxOverrides& box) {
  cmd->add_option("--u-lo", box.u_lo, "Lower bound of the u box");
  cmd->add_option("--u-hi", box.u_hi, "Upper bound of the u box");
  cmd->add_option("--grad-sq-max", box.grad_sq_max, "Bound L on |Du|^2");
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gradient-bound certification and simulation for degenerate parabolic equations"};
  app.require_subcommand(1);

  // run / compare
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<int> dim, n;
  std::optional<double> m, tol_grad;
  std::optional<std::uint64_t> seed;
  BoxOverrides box;

  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Config file")->required();
    cmd->add_option("--out", out_dir, "Output directory");
    cmd->add_option("--dim", dim, "Spatial dimension (1 or 2)");
    cmd->add_option("--n", n, "Grid points per axis");
    cmd->add_option("--m", m, "First model parameter");
    cmd->add_option("--seed", seed, "Seed");
    cmd->add_option("--tol-grad", tol_grad, "Relative tolerance of the gradient verdict");
    add_box_flags(cmd, box);
  };
  auto* run_cmd = app.add_subcommand("run", "Run a simulation and write diagnostics");
  add_run_flags(run_cmd);
  auto* compare_cmd = app.add_subcommand("compare", "Co-evolve two ordered initial fields");
  add_run_flags(compare_cmd);

  // certify
  CertifyOptions copt;
  std::optional<double> cm, cp;
  auto* cert_cmd = app.add_subcommand("certify", "Check the structural conditions for a model");
  cert_cmd->add_option("model", copt.model, "Model name")->required();
  cert_cmd->add_option("--params", copt.params, "Model parameters");
  cert_cmd->add_option("--m", cm, "Exponent m");
  cert_cmd->add_option("--p", cp, "Exponent p (doubly_nonlinear)");
  cert_cmd->add_option("--dim", copt.dim, "Dimension");
  cert_cmd->add_option("--grid", copt.grid, "Grid points per box axis");
  cert_cmd->add_option("--samples", copt.samples, "Random matrix samples");
  cert_cmd->add_option("--seed", copt.seed, "Seed");
  cert_cmd->add_option("--tol-cert", copt.tol, "Margin tolerance");
  cert_cmd->add_option("--out", out_dir, "Also write certify.txt here");
  add_box_flags(cert_cmd, copt.box);

  // sweep
  SweepOptions sopt;
  auto* sweep_cmd = app.add_subcommand("sweep", "Certify over a parameter range");
  sweep_cmd->add_option("--family", sopt.family, "pme | hydrology | doubly_nonlinear");
  sweep_cmd->add_option("--from", sopt.from, "First parameter value");
  sweep_cmd->add_option("--to", sopt.to, "Last parameter value");
  sweep_cmd->add_option("--step", sopt.step, "Parameter step");
  sweep_cmd->add_option("--dims", sopt.dims, "Dimensions")->delimiter(',');
  sweep_cmd->add_option("--p", sopt.p, "Exponent p (doubly_nonlinear)");
  sweep_cmd->add_flag("--run", sopt.run, "Also run a short simulation per point");
  sweep_cmd->add_option("--grid", sopt.grid, "Grid points per box axis");
  sweep_cmd->add_option("--samples", sopt.samples, "Random matrix samples");
  sweep_cmd->add_option("--seed", sopt.seed, "Seed");
  sweep_cmd->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run_cmd || *compare_cmd) {
    RunConfig config;
    try {
      config = load_config(config_path);
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << '\n';
      return kExitConfig;
    }
    if (dim) config.dim = *dim;
    if (n) config.n = *n;
    if (m) {
      if (config.params.empty()) config.params.push_back(*m);
      else config.params[0] = *m;
    }
    if (seed) config.seed = *seed;
    if (tol_grad) config.tol_grad = *tol_grad;
    if (box.u_lo) config.box.u_lo = box.u_lo;
    if (box.u_hi) config.box.u_hi = box.u_hi;
    if (box.grad_sq_max) config.box.grad_sq_max = box.grad_sq_max;
    std::optional<fs::path> dir_opt;
    if (out_dir) dir_opt = *out_dir;
    const auto dir = output_dir(config, dir_opt);
    return *run_cmd ? cmd_run(config, dir, out, err) : cmd_compare(config, dir, out, err);
  }

  if (*cert_cmd) {
    if (copt.params.empty() && cm) {
      copt.params.push_back(*cm);
      if (copt.model == "doubly_nonlinear") copt.params.push_back(cp.value_or(2.0));
    }
    std::optional<fs::path> dir_opt;
    if (out_dir) dir_opt = *out_dir;
    return cmd_certify(copt, dir_opt, out, err);
  }

  std::ostringstream key;
  key << std::setprecision(17) << sopt.family << ' ' << sopt.from << ' ' << sopt.to << ' ' << sopt.step
      << ' ' << sopt.p << ' ' << sopt.run << ' ' << sopt.grid << ' ' << sopt.samples << ' ' << sopt.seed;
  for (int d : sopt.dims) key << ' ' << d;
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : key.str()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream name;
  name << "sweep-" << std::hex << std::setw(16) << std::setfill('0') << h;
  const fs::path dir = out_dir ? fs::path(*out_dir) : fs::path("runs") / name.str();
  return cmd_sweep(sopt, dir, out, err);
}

}  // namespace gradbound::cli

#include "gradbound/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "gradbound/errors.hpp"

namespace gradbound {

namespace {

std::size_t int_pow(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

}  // namespace

PeriodicGrid::PeriodicGrid(int dim, int n) : dim_(dim), n_(n) {
  if (dim != 1 && dim != 2)
    throw PreconditionError("PeriodicGrid: dim must be 1 or 2, got " + std::to_string(dim));
  if (n < 4)
    throw PreconditionError("PeriodicGrid: need at least 4 points per axis, got " +
                            std::to_string(n));
  size_ = int_pow(n, dim);
}

int PeriodicGrid::coord(std::size_t node, int axis) const {
  if (dim_ == 1) return static_cast<int>(node);
  return axis == 0 ? static_cast<int>(node / n_) : static_cast<int>(node % n_);
}

std::size_t PeriodicGrid::neighbor(std::size_t node, int axis, int offset) const {
  const int c = coord(node, axis);
  int w = (c + offset) % n_;
  if (w < 0) w += n_;
  if (dim_ == 1) return static_cast<std::size_t>(w);
  if (axis == 0) return static_cast<std::size_t>(w) * n_ + node % n_;
  return (node / n_) * n_ + static_cast<std::size_t>(w);
}

ScalarField::ScalarField(PeriodicGrid g, double fill) : grid(g), values(g.size(), fill) {}

ScalarField::ScalarField(PeriodicGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size())
    throw PreconditionError("ScalarField: value count " + std::to_string(values.size()) +
                            " does not match grid size " + std::to_string(grid.size()));
}

bool ScalarField::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

VectorField::VectorField(PeriodicGrid g)
    : grid(g), components(g.dim(), std::vector<double>(g.size(), 0.0)) {}

VectorField gradient_centered(const ScalarField& f) {
  const auto& g = f.grid;
  VectorField out(g);
  const double inv2h = 0.5 / g.h();
  for (int a = 0; a < g.dim(); ++a) {
    auto& comp = out.components[a];
    for (std::size_t i = 0; i < g.size(); ++i)
      comp[i] = (f[g.neighbor(i, a, 1)] - f[g.neighbor(i, a, -1)]) * inv2h;
  }
  return out;
}

double grad_norm_at(const ScalarField& f, std::size_t node) {
  const auto& g = f.grid;
  const double inv2h = 0.5 / g.h();
  double sq = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    const double d = (f[g.neighbor(node, a, 1)] - f[g.neighbor(node, a, -1)]) * inv2h;
    sq += d * d;
  }
  return std::sqrt(sq);
}

double sup_grad_norm(const ScalarField& f) {
  double best = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) best = std::max(best, grad_norm_at(f, i));
  return best;
}

ScalarField divergence_of_face_flux(const PeriodicGrid& grid, const FaceFlux& flux) {
  if (static_cast<int>(flux.size()) != grid.dim())
    throw PreconditionError("divergence_of_face_flux: need one flux array per axis");
  for (const auto& f : flux)
    if (f.size() != grid.size())
      throw PreconditionError("divergence_of_face_flux: flux array has wrong length");

  ScalarField out(grid);
  const double invh = 1.0 / grid.h();
  for (int a = 0; a < grid.dim(); ++a) {
    const auto& fa = flux[a];
    for (std::size_t i = 0; i < grid.size(); ++i)
      out[i] += (fa[i] - fa[grid.neighbor(i, a, -1)]) * invh;
  }
  return out;
}

std::pair<double, double> field_minmax(const ScalarField& f) {
  const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
  return {*lo, *hi};
}

double mass(const ScalarField& f) {
  double sum = 0.0;
  for (double v : f.values) sum += v;
  return sum * std::pow(f.grid.h(), f.grid.dim());
}

std::vector<double> hessian_at(const ScalarField& f, std::size_t node) {
  const auto& g = f.grid;
  const int d = g.dim();
  const double h = g.h();
  std::vector<double> hess(static_cast<std::size_t>(d * d), 0.0);
  for (int a = 0; a < d; ++a) {
    hess[a * d + a] =
        (f[g.neighbor(node, a, 1)] - 2.0 * f[node] + f[g.neighbor(node, a, -1)]) / (h * h);
  }
  if (d == 2) {
    const auto pp = g.neighbor(g.neighbor(node, 0, 1), 1, 1);
    const auto pm = g.neighbor(g.neighbor(node, 0, 1), 1, -1);
    const auto mp = g.neighbor(g.neighbor(node, 0, -1), 1, 1);
    const auto mm = g.neighbor(g.neighbor(node, 0, -1), 1, -1);
    const double mixed = (f[pp] - f[pm] - f[mp] + f[mm]) / (4.0 * h * h);
    hess[1] = mixed;
    hess[2] = mixed;
  }
  return hess;
}

ScalarField shifted(const ScalarField& f, int axis, int k) {
  ScalarField out(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) out[f.grid.neighbor(i, axis, k)] = f[i];
  return out;
}

void write_snapshot(const std::filesystem::path& path, const ScalarField& f, double t) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open snapshot file for writing: " + path.string());
  os << std::setprecision(17);
  os << "# d=" << f.grid.dim() << " n=" << f.grid.n() << " t=" << t << '\n';
  for (double v : f.values) os << v << '\n';
  if (!os) throw std::runtime_error("failed writing snapshot: " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open snapshot file: " + path.string());
  std::string header;
  std::getline(is, header);
  int dim = 0;
  int n = 0;
  double t = 0.0;
  {
    std::istringstream hs(header);
    std::string hash, dtok, ntok, ttok;
    hs >> hash >> dtok >> ntok >> ttok;
    if (hash != "#" || dtok.rfind("d=", 0) != 0 || ntok.rfind("n=", 0) != 0 ||
        ttok.rfind("t=", 0) != 0)
      throw std::runtime_error("malformed snapshot header: '" + header + "'");
    dim = std::stoi(dtok.substr(2));
    n = std::stoi(ntok.substr(2));
    t = std::stod(ttok.substr(2));
  }
  PeriodicGrid grid(dim, n);
  std::vector<double> values;
  values.reserve(grid.size());
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    values.push_back(std::stod(line));
  }
  if (values.size() != grid.size())
    throw std::runtime_error("snapshot " + path.string() + ": expected " +
                             std::to_string(grid.size()) + " values, found " +
                             std::to_string(values.size()));
  return {ScalarField(grid, std::move(values)), t};
}

}  // namespace gradbound

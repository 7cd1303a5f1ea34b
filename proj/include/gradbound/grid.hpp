#pragma once

// Uniform periodic grids on the unit torus T^d (d = 1 or 2) and the discrete
// operators shared by the solver and the diagnostics.
//
// Storage is row-major over axes: in 2D the node (i0, i1) lives at
// i0 * n + i1, with axis 0 the slow index. Neighbours wrap modulo n; there
// are no ghost cells.

#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace gradbound {

class PeriodicGrid {
 public:
  PeriodicGrid(int dim, int n);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double h() const { return 1.0 / n_; }
  std::size_t size() const { return size_; }

  /// Index of the node reached from `node` by `offset` steps along `axis`.
  std::size_t neighbor(std::size_t node, int axis, int offset) const;

  /// Integer coordinate of `node` along `axis`.
  int coord(std::size_t node, int axis) const;

  /// Physical coordinate x_axis = coord * h of `node`.
  double position(std::size_t node, int axis) const { return coord(node, axis) * h(); }

  friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;

 private:
  int dim_;
  int n_;
  std::size_t size_;
};

struct ScalarField {
  PeriodicGrid grid;
  std::vector<double> values;

  explicit ScalarField(PeriodicGrid g, double fill = 0.0);
  ScalarField(PeriodicGrid g, std::vector<double> v);

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }

  bool all_finite() const;
};

struct VectorField {
  PeriodicGrid grid;
  std::vector<std::vector<double>> components;  // one per axis

  explicit VectorField(PeriodicGrid g);
};

/// Per-axis face values; entry `node` of axis `a` sits on the face between
/// `node` and its +1 neighbour along `a`.
using FaceFlux = std::vector<std::vector<double>>;

VectorField gradient_centered(const ScalarField& f);

/// Euclidean norm of the centred gradient at a single node.
double grad_norm_at(const ScalarField& f, std::size_t node);

/// max over nodes of |gradient_centered(f)|.
double sup_grad_norm(const ScalarField& f);

ScalarField divergence_of_face_flux(const PeriodicGrid& grid, const FaceFlux& flux);

std::pair<double, double> field_minmax(const ScalarField& f);

/// h^d * sum of nodal values.
double mass(const ScalarField& f);

/// Discrete Hessian at `node` from centred second differences, row-major
/// d x d. Mixed entries use the 4-point cross stencil.
std::vector<double> hessian_at(const ScalarField& f, std::size_t node);

/// Periodic shift: result(x) = f(x - k h e_axis).
ScalarField shifted(const ScalarField& f, int axis, int k);

/// Snapshot format: `# d=<dim> n=<n> t=<time>` followed by one value per
/// line (row-major, 17 significant digits).
void write_snapshot(const std::filesystem::path& path, const ScalarField& f, double t);

struct Snapshot {
  ScalarField field;
  double t;
};

Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace gradbound

#pragma once

// Flat `key = value` run configuration with dotted sections.
//
//   model = pme
//   model.params = 2
//   dim = 1
//   n = 256
//   initial.kind = sine
//   initial.amplitude = 0.4
//
// Lines starting with '#' are comments. Lists are comma separated.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gradbound/grid.hpp"
#include "gradbound/models.hpp"
#include "gradbound/solver.hpp"

namespace gradbound {

enum class InitialKind { Constant, Sine, Bump, File };

struct InitialSpec {
  InitialKind kind = InitialKind::Sine;
  double value = 0.5;  // constant
  double mean = 0.5;   // sine
  double amplitude = 0.1;
  int mode = 1;
  double center = 0.5;  // bump
  double width = 0.5;
  double height = 0.5;
  double floor = 0.0;
  std::string path;  // file

  bool operator==(const InitialSpec&) const = default;
};

struct RunConfig {
  std::string model = "pme";
  std::vector<double> params{2.0};
  int dim = 1;
  int n = 128;
  double t_end = 0.1;
  double cfl_safety = 0.9;
  double output_every = 0.01;
  std::vector<double> snapshot_times;
  InitialSpec initial;
  std::optional<InitialSpec> initial2;
  BoxOverrides box;
  double tol_grad = 1e-2;
  double tol_cert = 1e-9;
  std::uint64_t seed = 20240917;

  bool operator==(const RunConfig&) const = default;

  SolverConfig solver_config() const;
  ModelSpec build_model() const;
};

/// Throws ConfigError with the offending line number on malformed input,
/// unknown or duplicate keys.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::filesystem::path& path);

/// Every key, full precision; parse_config reads it back unchanged.
void write_config(std::ostream& os, const RunConfig& config);

/// 16 hex digits of FNV-1a over the effective-config dump.
std::string config_hash(const RunConfig& config);

/// Samples the initial profile on `grid`. Sine in 2D is
/// mean + amplitude * (sin 2 pi k x + sin 2 pi k y) / 2; bump is a cosine
/// taper of radius width / 2 around `center` (torus distance) on `floor`.
ScalarField build_initial(const InitialSpec& spec, const PeriodicGrid& grid);

}  // namespace gradbound

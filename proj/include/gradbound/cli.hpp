#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gradbound/certify.hpp"
#include "gradbound/config.hpp"

namespace gradbound::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBox = 3;
inline constexpr int kExitInstability = 4;

inline constexpr double kCompareGapTol = 1e-12;

/// `runs/<config hash>` unless `out` is set.
std::filesystem::path output_dir(const RunConfig& config, const std::optional<std::filesystem::path>& out);

/// Writes config.txt, diagnostics.csv, verdicts.txt and snapshot_<k>.txt.
int cmd_run(const RunConfig& config, const std::filesystem::path& dir, std::ostream& out,
            std::ostream& err);

/// Writes config.txt and gap.csv; prints the largest u - v.
int cmd_compare(const RunConfig& config, const std::filesystem::path& dir, std::ostream& out,
                std::ostream& err);

struct CertifyOptions {
  std::string model;
  std::vector<double> params;
  int dim = 1;
  BoxOverrides box;
  int grid = 201;  // n_u = n_s
  int samples = 2000;
  std::uint64_t seed = kDefaultSeed;
  double tol = kDefaultTolCert;
};

/// Model on the box used for certification. G-form models without a finite
/// gradient bound get u in [0.01, 1], |p|^2 <= 1; the doubly nonlinear model
/// gets u in [0.1, 1], |p|^2 in [0.01, 1]. Overrides apply last.
ModelSpec certification_model(const std::string& name, const std::vector<double>& params, int dim,
                              const BoxOverrides& overrides = {});

int cmd_certify(const CertifyOptions& opts, const std::optional<std::filesystem::path>& dir,
                std::ostream& out, std::ostream& err);

struct SweepOptions {
  std::string family = "pme";  // pme (m), hydrology (half-width v), doubly_nonlinear (alpha)
  double from = 1.0;
  double to = 2.2;
  double step = 0.05;
  std::vector<int> dims{1};
  double p = 2.0;  // doubly_nonlinear exponent
  bool run = false;
  int grid = 201;
  int samples = 2000;
  std::uint64_t seed = kDefaultSeed;
  double tol = kDefaultTolCert;
};

/// from, from + step, ... up to `to`; empty when from > to. Throws
/// ConfigError on a non-positive or non-finite step.
std::vector<double> sweep_values(double from, double to, double step);

/// Writes sweep.csv (`parameter,dim,certify,worst_margin[,run]`) to `dir`
/// and echoes it to `out`.
int cmd_sweep(const SweepOptions& opts, const std::filesystem::path& dir, std::ostream& out,
              std::ostream& err);

/// Entry point shared by the executable and the tests.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gradbound::cli

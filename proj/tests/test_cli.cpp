#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gradbound/cli.hpp"

using namespace gradbound;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "gradbound");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("certify exit codes") {
  CHECK(invoke({"certify", "pme", "--m", "1.8", "--dim", "2"}).code == 0);
  const auto fail = invoke({"certify", "pme", "--m", "1.81", "--dim", "2"});
  CHECK(fail.code == 1);
  CHECK(fail.out.find("verdict = fail") != std::string::npos);
  CHECK(fail.out.find("witness_u") != std::string::npos);
  CHECK(invoke({"certify", "psi:hydrology_full", "--dim", "1"}).code == 0);
  CHECK(invoke({"certify", "psi:hydrology_full", "--dim", "2", "--u-lo", "0", "--u-hi", "1"}).code == 1);
  CHECK(invoke({"certify", "doubly_nonlinear", "--m", "2", "--p", "2"}).code == 0);
  CHECK(invoke({"certify", "nosuch"}).code == 2);
  CHECK(invoke({"certify", "pme", "--m", "0.5"}).code == 2);
  CHECK(invoke({"certify"}).code == 2);
}

TEST_CASE("certify output regenerates identically") {
  TempDir dir("gradbound_cli_certify");
  const auto a = invoke({"certify", "pme", "--m", "1.5", "--dim", "3", "--seed", "5", "--out", dir.path.string()});
  const auto first = slurp(dir.path / "certify.txt");
  const auto b = invoke({"certify", "pme", "--m", "1.5", "--dim", "3", "--seed", "5", "--out", dir.path.string()});
  CHECK(a.out == b.out);
  CHECK(first == slurp(dir.path / "certify.txt"));
  CHECK(first == a.out);
}

TEST_CASE("run writes diagnostics, verdicts and snapshots") {
  TempDir dir("gradbound_cli_run");
  const auto cfg = dir.write("pme.cfg",
                             "model = pme\nmodel.params = 2\nn = 256\nt_end = 0.25\noutput_every = 0.05\n"
                             "snapshot_times = 0.1\ninitial.kind = sine\ninitial.mean = 0.5\n"
                             "initial.amplitude = 0.4\n");
  const auto out = dir.path / "out";
  const auto r = invoke({"run", "--config", cfg.string(), "--out", out.string()});
  CHECK(r.code == 0);
  const auto rows = csv_rows(slurp(out / "diagnostics.csv"));
  REQUIRE(rows.size() == 6);
  const double g0 = std::stod(rows.front()[2]);
  for (const auto& row : rows) CHECK(std::stod(row[2]) <= 1.01 * g0);
  CHECK(slurp(out / "verdicts.txt").find("gradient = pass") == 0);
  CHECK(read_snapshot(out / "snapshot_0.txt").t == 0.1);

  // effective config reparses to the same configuration
  CHECK(load_config(out / "config.txt") == load_config(cfg));

  const auto diag = slurp(out / "diagnostics.csv");
  const auto verdicts = slurp(out / "verdicts.txt");
  CHECK(invoke({"run", "--config", cfg.string(), "--out", out.string()}).code == 0);
  CHECK(slurp(out / "diagnostics.csv") == diag);
  CHECK(slurp(out / "verdicts.txt") == verdicts);
}

TEST_CASE("run with constant data keeps every statistic") {
  TempDir dir("gradbound_cli_const");
  const auto cfg = dir.write("c.cfg", "model = psi:hydrology_full\ndim = 2\nn = 16\nt_end = 0.01\n"
                                      "output_every = 0.002\ninitial.kind = constant\ninitial.value = 0.4\n");
  CHECK(invoke({"run", "--config", cfg.string(), "--out", (dir.path / "o").string()}).code == 0);
  const auto rows = csv_rows(slurp(dir.path / "o" / "diagnostics.csv"));
  REQUIRE(rows.size() == 6);
  for (const auto& row : rows)
    for (std::size_t col = 2; col < row.size(); ++col) CHECK(row[col] == rows.front()[col]);
}

TEST_CASE("run exit codes") {
  TempDir dir("gradbound_cli_codes");
  const auto hyd = dir.write("h.cfg", "model = psi:hydrology_full\ndim = 2\nn = 32\n"
                                      "initial.kind = sine\ninitial.amplitude = 0.9\n");
  const auto box = invoke({"run", "--config", hyd.string(), "--out", (dir.path / "h").string()});
  CHECK(box.code == 3);
  CHECK(box.err.find("leaves box") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path / "h" / "diagnostics.csv"));

  const auto bad = dir.write("bad.cfg", "model = pme\nn = lots\n");
  CHECK(invoke({"run", "--config", bad.string()}).code == 2);
  CHECK(invoke({"run", "--config", (dir.path / "missing.cfg").string()}).code == 2);
  CHECK(invoke({"run"}).code == 2);

  const auto unknown = dir.write("u.cfg", "model = nosuch\n");
  CHECK(invoke({"run", "--config", unknown.string(), "--out", (dir.path / "u").string()}).code == 2);

  // G = -u is backward diffusion: roundoff grows until it overflows
  const auto back = dir.write("b.cfg", "model = gdiff:poly\nmodel.params = 0, -1\nn = 16\nt_end = 4\n"
                                       "box.u_lo = -inf\nbox.u_hi = inf\nbox.grad_sq_max = inf\n");
  CHECK(invoke({"run", "--config", back.string(), "--out", (dir.path / "b").string()}).code == 4);

  const auto ok = dir.write("ok.cfg", "model = pme\nmodel.params = 2\nn = 32\nt_end = 0.01\n");
  CHECK(invoke({"run", "--config", ok.string(), "--out", (dir.path / "ok").string()}).code == 0);
  CHECK(invoke({"run", "--config", ok.string(), "--out", (dir.path / "ok").string(), "--tol-grad", "-0.5"})
            .code == 1);
  CHECK(invoke({"run", "--config", ok.string(), "--out", (dir.path / "ok").string(), "--dim", "3"}).code == 2);
}

TEST_CASE("compare") {
  TempDir dir("gradbound_cli_compare");
  const auto consts = dir.write("c.cfg", "model = pme\nmodel.params = 2\nn = 32\nt_end = 0.01\n"
                                         "initial.kind = constant\ninitial.value = 0.3\n"
                                         "initial2.kind = constant\ninitial2.value = 0.5\n");
  const auto r = invoke({"compare", "--config", consts.string(), "--out", (dir.path / "c").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("max_gap = -0.2\n") == 0);

  const auto sines = dir.write("s.cfg", "model = pme\nmodel.params = 2\nn = 64\nt_end = 0.02\n"
                                        "initial.kind = sine\ninitial.mean = 0.4\n"
                                        "initial2.kind = sine\ninitial2.mean = 0.5\n");
  CHECK(invoke({"compare", "--config", sines.string(), "--out", (dir.path / "s").string()}).code == 0);
  CHECK(fs::exists(dir.path / "s" / "gap.csv"));

  const auto swapped = dir.write("w.cfg", "model = pme\nmodel.params = 2\nn = 32\nt_end = 0.01\n"
                                          "initial.kind = constant\ninitial.value = 0.5\n"
                                          "initial2.kind = constant\ninitial2.value = 0.3\n");
  CHECK(invoke({"compare", "--config", swapped.string(), "--out", (dir.path / "w").string()}).code == 2);

  const auto single = dir.write("one.cfg", "model = pme\nmodel.params = 2\n");
  CHECK(invoke({"compare", "--config", single.string(), "--out", (dir.path / "o").string()}).code == 2);
}

TEST_CASE("sweep flips at the thresholds") {
  TempDir dir("gradbound_cli_sweep");
  const auto pme = invoke({"sweep", "--family", "pme", "--from", "1", "--to", "2.2", "--step", "0.05",
                           "--dims", "1", "--out", (dir.path / "p").string()});
  CHECK(pme.code == 0);
  CHECK(slurp(dir.path / "p" / "sweep.csv") == pme.out);
  const auto rows = csv_rows(pme.out);
  REQUIRE(rows.size() == 25);
  for (const auto& row : rows) CHECK(row[2] == (std::stod(row[0]) <= 2.0 ? "pass" : "fail"));
  CHECK(rows[20][0] == "2");
  CHECK(rows[21][0] == "2.05");

  const auto hyd = invoke({"sweep", "--family", "hydrology", "--from", "0.3", "--to", "0.6", "--step", "0.005",
                           "--dims", "1", "--out", (dir.path / "h").string()});
  CHECK(hyd.code == 0);
  const auto hrows = csv_rows(hyd.out);
  REQUIRE(hrows.size() == 61);
  for (const auto& row : hrows) CHECK(row[2] == (std::stod(row[0]) <= 0.5 ? "pass" : "fail"));

  const auto empty = invoke({"sweep", "--from", "2", "--to", "1", "--out", (dir.path / "e").string()});
  CHECK(empty.code == 0);
  CHECK(empty.out == "parameter,dim,certify,worst_margin\n");

  const auto run = invoke({"sweep", "--family", "pme", "--from", "1.5", "--to", "2", "--step", "0.5",
                           "--dims", "1,2", "--run", "--grid", "41", "--samples", "100", "--out",
                           (dir.path / "r").string()});
  CHECK(run.code == 0);
  const auto rrows = csv_rows(run.out);
  REQUIRE(rrows.size() == 4);
  for (const auto& row : rrows) CHECK(row.size() == 5);

  CHECK(invoke({"sweep", "--step", "0", "--out", (dir.path / "x").string()}).code == 2);
  CHECK(invoke({"sweep", "--step", "-1", "--out", (dir.path / "x").string()}).code == 2);
  CHECK(invoke({"sweep", "--family", "nosuch", "--out", (dir.path / "x").string()}).code == 2);
}

TEST_CASE("sweep grid values") {
  CHECK(cli::sweep_values(1.0, 2.2, 0.05).size() == 25);
  CHECK(cli::sweep_values(1.0, 2.2, 0.05)[20] == 2.0);
  CHECK(cli::sweep_values(0.3, 0.6, 0.005)[40] == 0.5);
  CHECK(cli::sweep_values(1.0, 1.0, 0.1) == std::vector<double>{1.0});
  CHECK(cli::sweep_values(2.0, 1.0, 0.1).empty());
}

TEST_CASE("default output directory follows the config hash") {
  RunConfig a;
  CHECK(cli::output_dir(a, std::nullopt) == fs::path("runs") / config_hash(a));
  CHECK(cli::output_dir(a, fs::path("x")) == fs::path("x"));
}

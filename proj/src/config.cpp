#include "gradbound/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "gradbound/errors.hpp"

namespace gradbound {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& text, const std::string& key) {
  T v{};
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && text[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last)
    throw ConfigError(key + ": cannot parse '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<double>(trim(item), key));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

const std::map<std::string, InitialKind>& kind_names() {
  static const std::map<std::string, InitialKind> names{
      {"constant", InitialKind::Constant},
      {"sine", InitialKind::Sine},
      {"bump", InitialKind::Bump},
      {"file", InitialKind::File}};
  return names;
}

std::string kind_name(InitialKind k) {
  for (const auto& [name, kind] : kind_names())
    if (kind == k) return name;
  return "?";
}

bool set_initial(InitialSpec& spec, const std::string& field, const std::string& value,
                 const std::string& key) {
  auto num = [&] { return parse_number<double>(value, key); };
  if (field == "kind") {
    const auto it = kind_names().find(value);
    if (it == kind_names().end()) throw ConfigError(key + ": unknown initial kind '" + value + "'");
    spec.kind = it->second;
  } else if (field == "value") {
    spec.value = num();
  } else if (field == "mean") {
    spec.mean = num();
  } else if (field == "amplitude") {
    spec.amplitude = num();
  } else if (field == "mode") {
    spec.mode = parse_number<int>(value, key);
  } else if (field == "center") {
    spec.center = num();
  } else if (field == "width") {
    spec.width = num();
  } else if (field == "height") {
    spec.height = num();
  } else if (field == "floor") {
    spec.floor = num();
  } else if (field == "path") {
    spec.path = value;
  } else {
    return false;
  }
  return true;
}

void write_initial(std::ostream& os, const std::string& prefix, const InitialSpec& s) {
  os << prefix << ".kind = " << kind_name(s.kind) << '\n'
     << prefix << ".value = " << fmt(s.value) << '\n'
     << prefix << ".mean = " << fmt(s.mean) << '\n'
     << prefix << ".amplitude = " << fmt(s.amplitude) << '\n'
     << prefix << ".mode = " << s.mode << '\n'
     << prefix << ".center = " << fmt(s.center) << '\n'
     << prefix << ".width = " << fmt(s.width) << '\n'
     << prefix << ".height = " << fmt(s.height) << '\n'
     << prefix << ".floor = " << fmt(s.floor) << '\n'
     << prefix << ".path = " << s.path << '\n';
}

void apply_key(RunConfig& c, const std::string& key, const std::string& value) {
  auto num = [&] { return parse_number<double>(value, key); };
  if (key == "model") {
    if (value.empty()) throw ConfigError("model: empty name");
    c.model = value;
  } else if (key == "model.params") {
    c.params = parse_list(value, key);
  } else if (key == "dim") {
    c.dim = parse_number<int>(value, key);
  } else if (key == "n") {
    c.n = parse_number<int>(value, key);
  } else if (key == "t_end") {
    c.t_end = num();
  } else if (key == "cfl_safety") {
    c.cfl_safety = num();
  } else if (key == "output_every") {
    c.output_every = num();
  } else if (key == "snapshot_times") {
    c.snapshot_times = parse_list(value, key);
  } else if (key == "box.u_lo") {
    c.box.u_lo = num();
  } else if (key == "box.u_hi") {
    c.box.u_hi = num();
  } else if (key == "box.grad_sq_max") {
    c.box.grad_sq_max = num();
  } else if (key == "tol.grad") {
    c.tol_grad = num();
  } else if (key == "tol.cert") {
    c.tol_cert = num();
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(value, key);
  } else if (key.rfind("initial.", 0) == 0) {
    if (!set_initial(c.initial, key.substr(8), value, key)) throw ConfigError("unknown key '" + key + "'");
  } else if (key.rfind("initial2.", 0) == 0) {
    if (!c.initial2) c.initial2 = InitialSpec{};
    if (!set_initial(*c.initial2, key.substr(9), value, key)) throw ConfigError("unknown key '" + key + "'");
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

// Shortest distance on the unit circle.
double torus_delta(double a, double b) {
  double d = std::fmod(std::abs(a - b), 1.0);
  return std::min(d, 1.0 - d);
}

}  // namespace

SolverConfig RunConfig::solver_config() const {
  SolverConfig s;
  s.n = n;
  s.dim = dim;
  s.t_end = t_end;
  s.cfl_safety = cfl_safety;
  s.output_every = output_every;
  s.snapshot_times = snapshot_times;
  return s;
}

ModelSpec RunConfig::build_model() const { return builtin_model(model, params, dim, box); }

RunConfig parse_config(std::istream& is) {
  RunConfig c;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!seen.insert(key).second)
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    try {
      apply_key(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config '" + path.string() + "'");
  auto c = parse_config(is);
  // file initial data is looked up next to the config
  auto resolve = [&](InitialSpec& s) {
    if (s.kind == InitialKind::File && !s.path.empty() && std::filesystem::path(s.path).is_relative())
      s.path = (path.parent_path() / s.path).string();
  };
  resolve(c.initial);
  if (c.initial2) resolve(*c.initial2);
  return c;
}

void write_config(std::ostream& os, const RunConfig& c) {
  os << "model = " << c.model << '\n'
     << "model.params = " << fmt_list(c.params) << '\n'
     << "dim = " << c.dim << '\n'
     << "n = " << c.n << '\n'
     << "t_end = " << fmt(c.t_end) << '\n'
     << "cfl_safety = " << fmt(c.cfl_safety) << '\n'
     << "output_every = " << fmt(c.output_every) << '\n'
     << "snapshot_times = " << fmt_list(c.snapshot_times) << '\n';
  write_initial(os, "initial", c.initial);
  if (c.initial2) write_initial(os, "initial2", *c.initial2);
  if (c.box.u_lo) os << "box.u_lo = " << fmt(*c.box.u_lo) << '\n';
  if (c.box.u_hi) os << "box.u_hi = " << fmt(*c.box.u_hi) << '\n';
  if (c.box.grad_sq_max) os << "box.grad_sq_max = " << fmt(*c.box.grad_sq_max) << '\n';
  os << "tol.grad = " << fmt(c.tol_grad) << '\n'
     << "tol.cert = " << fmt(c.tol_cert) << '\n'
     << "seed = " << c.seed << '\n';
}

std::string config_hash(const RunConfig& config) {
  std::ostringstream os;
  write_config(os, config);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : os.str()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ScalarField build_initial(const InitialSpec& spec, const PeriodicGrid& grid) {
  using std::numbers::pi;
  ScalarField f(grid);
  switch (spec.kind) {
    case InitialKind::Constant:
      f.values.assign(grid.size(), spec.value);
      break;
    case InitialKind::Sine:
      for (std::size_t i = 0; i < grid.size(); ++i) {
        double v = std::sin(2 * pi * spec.mode * grid.position(i, 0));
        if (grid.dim() == 2) v = 0.5 * (v + std::sin(2 * pi * spec.mode * grid.position(i, 1)));
        f[i] = spec.mean + spec.amplitude * v;
      }
      break;
    case InitialKind::Bump: {
      if (!(spec.width > 0.0)) throw ConfigError("bump: width must be > 0");
      if (spec.floor < 0.0) throw ConfigError("bump: floor must be >= 0");
      const double radius = 0.5 * spec.width;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        double r2 = 0.0;
        for (int a = 0; a < grid.dim(); ++a) {
          const double d = torus_delta(grid.position(i, a), spec.center);
          r2 += d * d;
        }
        const double r = std::sqrt(r2);
        f[i] = spec.floor + (r < radius ? spec.height * 0.5 * (1.0 + std::cos(pi * r / radius)) : 0.0);
      }
      break;
    }
    case InitialKind::File: {
      auto snap = read_snapshot(spec.path);
      if (!(snap.field.grid == grid))
        throw ConfigError("initial file '" + spec.path + "' does not match the configured grid");
      f = std::move(snap.field);
      break;
    }
  }
  return f;
}

}  // namespace gradbound

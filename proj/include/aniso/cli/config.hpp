#pragma once

// Run configuration: sectioned INI text with strict key checking.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "aniso/errors.hpp"

namespace aniso::cli {

enum class Task { certify, solve, profile, pbound, rigidity, wulff, characterize, wave };

inline const std::map<std::string, Task>& task_names() {
  static const std::map<std::string, Task> names{
      {"certify", Task::certify}, {"solve", Task::solve},       {"profile", Task::profile},
      {"pbound", Task::pbound},   {"rigidity", Task::rigidity}, {"wulff", Task::wulff},
      {"characterize", Task::characterize}, {"wave", Task::wave}};
  return names;
}

inline std::string task_name(Task t) {
  for (const auto& [k, v] : task_names())
    if (v == t) return k;
  return "?";
}

struct AnisotropySpec {
  /// euclidean, matrix, ellipse, cosine-bump, l4, constant-theta
  std::string family = "euclidean";
  std::vector<double> matrix;
  std::vector<double> weights;
  double amplitude = 0.3;
};

struct BSpec {
  /// power, regularized-power, minimal-surface
  std::string family = "power";
  double p = 2.0;
  double kappa = 0.0;
};

struct PotentialSpec {
  /// allen-cahn, zero, custom-poly
  std::string name = "allen-cahn";
  std::vector<double> coeffs;
  double offset = 0.0;
};

struct GridConfig {
  std::vector<int> points;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> boundary;
};

struct SolveSpec {
  double tol = 1e-8;
  int max_iter = 20000;
  /// profile (exact 1D heteroclinic trace), affine, zero
  std::string boundary_data = "profile";
  std::vector<double> slope;
  /// zero, data, random
  std::string initial = "zero";
  std::vector<double> continuation;
  double kappa_reg = 0.0;
};

struct ProfileSpec {
  std::vector<double> omega;
  double u_minus = -1.0;
  double u_plus = 1.0;
  int points = 2001;
  /// 0 picks a span covering the grid.
  double half_span = 0.0;
};

struct CheckSpec {
  std::size_t samples = 1000;
  double K = 1.0;
  double m_cap = 10.0;
  int collar = 4;
  std::optional<double> tol_P;
  /// 0 picks 1e-6 max |grad u|.
  double theta = 0.0;
  int order = 2;
  double flatness_tol = 1e-10;
  std::size_t wulff_samples = 256;
  double matrix_tol = 1e-9;
  /// matrix or none; empty means report only.
  std::string expect;
};

struct WaveSpec {
  double speed_factor = 1.0;
  /// 0 means dt = h.
  double dt = 0.0;
  double tol = 1e-3;
};

struct RunConfig {
  Task task = Task::certify;
  int dimension = 2;
  std::uint64_t seed = 0;
  AnisotropySpec anisotropy;
  BSpec b;
  PotentialSpec potential;
  std::optional<GridConfig> grid;
  SolveSpec solve;
  ProfileSpec profile;
  CheckSpec checks;
  WaveSpec wave;
  std::set<std::string> sections;
};

namespace detail {

using boost::property_tree::ptree;

inline const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"task", {"name", "dimension", "seed"}},
      {"anisotropy", {"family", "matrix", "weights", "amplitude"}},
      {"b", {"family", "p", "kappa"}},
      {"potential", {"name", "coeffs", "offset"}},
      {"grid", {"points", "lower", "upper", "boundary"}},
      {"solve", {"tol", "max_iter", "boundary_data", "slope", "initial", "continuation", "kappa_reg"}},
      {"profile", {"omega", "u_minus", "u_plus", "points", "half_span"}},
      {"checks",
       {"samples", "K", "m_cap", "collar", "tol_P", "theta", "order", "flatness_tol", "wulff_samples", "matrix_tol",
        "expect"}},
      {"wave", {"speed_factor", "dt", "tol"}}};
  return keys;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream is(t);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

inline double parse_double(const std::string& text, const std::string& key) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc{} || res.ptr != e) throw UsageError("key " + key + ": expected a number, got '" + text + "'");
  return v;
}

template <class Int>
Int parse_int(const std::string& text, const std::string& key) {
  Int v = 0;
  const char* b = text.data();
  const char* e = b + text.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc{} || res.ptr != e) throw UsageError("key " + key + ": expected an integer, got '" + text + "'");
  return v;
}

class Reader {
 public:
  explicit Reader(const ptree& root) : root_(root) {}

  bool has(const std::string& section, const std::string& key) const {
    const auto s = root_.get_child_optional(section);
    return s && s->get_child_optional(key);
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto s = root_.get_child_optional(section);
    if (!s) return std::nullopt;
    const auto v = s->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    std::string t = *v;
    t.erase(0, t.find_first_not_of(" \t"));
    t.erase(t.find_last_not_of(" \t") + 1);
    return t;
  }

  std::string require(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) throw UsageError("missing required key " + section + "." + key);
    return *v;
  }

  void get(const std::string& section, const std::string& key, std::string& out) const {
    if (auto v = raw(section, key)) out = *v;
  }
  void get(const std::string& section, const std::string& key, double& out) const {
    if (auto v = raw(section, key)) out = parse_double(*v, section + "." + key);
  }
  void get(const std::string& section, const std::string& key, std::optional<double>& out) const {
    if (auto v = raw(section, key)) out = parse_double(*v, section + "." + key);
  }
  void get(const std::string& section, const std::string& key, int& out) const {
    if (auto v = raw(section, key)) out = parse_int<int>(*v, section + "." + key);
  }
  template <class U>
    requires std::is_unsigned_v<U>
  void get(const std::string& section, const std::string& key, U& out) const {
    if (auto v = raw(section, key)) out = parse_int<U>(*v, section + "." + key);
  }
  void get(const std::string& section, const std::string& key, std::vector<double>& out) const {
    if (auto v = raw(section, key)) {
      out.clear();
      for (const auto& w : split_list(*v)) out.push_back(parse_double(w, section + "." + key));
    }
  }
  void get(const std::string& section, const std::string& key, std::vector<int>& out) const {
    if (auto v = raw(section, key)) {
      out.clear();
      for (const auto& w : split_list(*v)) out.push_back(parse_int<int>(w, section + "." + key));
    }
  }
  void get(const std::string& section, const std::string& key, std::vector<std::string>& out) const {
    if (auto v = raw(section, key)) out = split_list(*v);
  }

 private:
  const ptree& root_;
};

inline void require_section(const RunConfig& c, const std::string& section) {
  if (!c.sections.contains(section)) throw UsageError("missing required key path " + section + " (section [" + section + "])");
}

}  // namespace detail

/// Sections each task needs beyond [task].
inline std::vector<std::string> required_sections(Task t) {
  switch (t) {
    case Task::certify: return {"anisotropy", "b"};
    case Task::solve: return {"anisotropy", "b", "potential", "grid"};
    case Task::profile: return {"anisotropy", "b", "potential", "profile"};
    case Task::pbound: return {"anisotropy", "b", "potential", "grid"};
    case Task::rigidity: return {"anisotropy", "b", "potential", "grid"};
    case Task::wulff: return {"anisotropy"};
    case Task::characterize: return {"anisotropy", "b"};
    case Task::wave: return {"anisotropy", "grid"};
  }
  return {};
}

inline RunConfig parse_config(std::istream& is) {
  detail::ptree root;
  try {
    boost::property_tree::ini_parser::read_ini(is, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError(std::string("malformed config: ") + e.message() + " at line " + std::to_string(e.line()));
  }
  RunConfig c;
  for (const auto& [section, body] : root) {
    const auto it = detail::allowed_keys().find(section);
    if (it == detail::allowed_keys().end()) {
      if (body.empty()) throw UsageError("key " + section + " outside any section");
      throw UsageError("unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body)
      if (!it->second.contains(key)) throw UsageError("unknown key " + section + "." + key);
    c.sections.insert(section);
  }
  const detail::Reader r(root);
  const std::string name = r.require("task", "name");
  const auto t = task_names().find(name);
  if (t == task_names().end()) throw UsageError("key task.name: unknown task '" + name + "'");
  c.task = t->second;
  r.get("task", "dimension", c.dimension);
  if (c.dimension < 1 || c.dimension > 3) throw UsageError("key task.dimension: must be 1, 2 or 3");
  r.get("task", "seed", c.seed);

  r.get("anisotropy", "family", c.anisotropy.family);
  r.get("anisotropy", "matrix", c.anisotropy.matrix);
  r.get("anisotropy", "weights", c.anisotropy.weights);
  r.get("anisotropy", "amplitude", c.anisotropy.amplitude);

  r.get("b", "family", c.b.family);
  r.get("b", "p", c.b.p);
  r.get("b", "kappa", c.b.kappa);

  r.get("potential", "name", c.potential.name);
  r.get("potential", "coeffs", c.potential.coeffs);
  r.get("potential", "offset", c.potential.offset);

  if (c.sections.contains("grid")) {
    GridConfig g;
    r.require("grid", "points");
    r.get("grid", "points", g.points);
    g.lower = {-1.0};
    g.upper = {1.0};
    g.boundary = {"dirichlet"};
    r.get("grid", "lower", g.lower);
    r.get("grid", "upper", g.upper);
    r.get("grid", "boundary", g.boundary);
    c.grid = g;
  }

  r.get("solve", "tol", c.solve.tol);
  r.get("solve", "max_iter", c.solve.max_iter);
  r.get("solve", "boundary_data", c.solve.boundary_data);
  r.get("solve", "slope", c.solve.slope);
  r.get("solve", "initial", c.solve.initial);
  r.get("solve", "continuation", c.solve.continuation);
  r.get("solve", "kappa_reg", c.solve.kappa_reg);

  r.get("profile", "omega", c.profile.omega);
  r.get("profile", "u_minus", c.profile.u_minus);
  r.get("profile", "u_plus", c.profile.u_plus);
  r.get("profile", "points", c.profile.points);
  r.get("profile", "half_span", c.profile.half_span);

  r.get("checks", "samples", c.checks.samples);
  r.get("checks", "K", c.checks.K);
  r.get("checks", "m_cap", c.checks.m_cap);
  r.get("checks", "collar", c.checks.collar);
  r.get("checks", "tol_P", c.checks.tol_P);
  r.get("checks", "theta", c.checks.theta);
  r.get("checks", "order", c.checks.order);
  r.get("checks", "flatness_tol", c.checks.flatness_tol);
  r.get("checks", "wulff_samples", c.checks.wulff_samples);
  r.get("checks", "matrix_tol", c.checks.matrix_tol);
  r.get("checks", "expect", c.checks.expect);

  r.get("wave", "speed_factor", c.wave.speed_factor);
  r.get("wave", "dt", c.wave.dt);
  r.get("wave", "tol", c.wave.tol);

  for (const auto& s : required_sections(c.task)) detail::require_section(c, s);
  return c;
}

}  // namespace aniso::cli

#pragma once

// Batch runner: builds the objects named in a RunConfig, executes the task
// and writes report.json (JSON lines), summary.txt and CSV/binary artifacts.
//
// Exit codes: 0 all checks passed, 2 a check failed, 1 usage or config error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "aniso/anisotropy.hpp"
#include "aniso/bprofile.hpp"
#include "aniso/certify.hpp"
#include "aniso/cli/config.hpp"
#include "aniso/errors.hpp"
#include "aniso/grid.hpp"
#include "aniso/io.hpp"
#include "aniso/parallel.hpp"
#include "aniso/pfunction.hpp"
#include "aniso/potential.hpp"
#include "aniso/profile1d.hpp"
#include "aniso/solver.hpp"
#include "aniso/wulff.hpp"

namespace aniso::cli {

using json = nlohmann::ordered_json;

struct RunOptions {
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> seed;
  int refine = 0;
  int threads = 1;
};

enum ExitCode : int { kPassed = 0, kUsage = 1, kCheckFailed = 2 };

/// Collects report records and named pass/fail checks.
class Recorder {
 public:
  void add(json record) { records_.push_back(std::move(record)); }

  /// Records `value relation threshold` with its verdict.
  bool check(const std::string& name, double value, const std::string& relation, double threshold) {
    bool ok = false;
    if (relation == "<=") ok = value <= threshold;
    else if (relation == ">=") ok = value >= threshold;
    else if (relation == "==") ok = value == threshold;
    else throw Error("unknown check relation " + relation);
    checks_.push_back({name, value, relation, threshold, ok});
    add(json{{"record", "check"}, {"name", name}, {"value", value}, {"relation", relation}, {"threshold", threshold},
             {"passed", ok}});
    return ok;
  }

  bool all_passed() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.passed; });
  }

  std::optional<std::string> first_failure() const {
    for (const auto& c : checks_)
      if (!c.passed) return c.name;
    return std::nullopt;
  }

  void write_report(std::ostream& os) const {
    for (const auto& r : records_) os << r.dump() << '\n';
  }

  /// Numbers are printed with the JSON serializer so every token also
  /// appears verbatim in the report.
  void write_summary(std::ostream& os, const std::string& task) const {
    os << "task " << task << '\n';
    for (const auto& c : checks_)
      os << c.name << ' ' << json(c.value).dump() << ' ' << c.relation << ' ' << json(c.threshold).dump() << ' '
         << (c.passed ? "PASS" : "FAIL") << '\n';
    if (const auto f = first_failure()) os << "result FAIL " << *f << '\n';
    else os << "result PASS\n";
  }

 private:
  struct Check {
    std::string name;
    double value;
    std::string relation;
    double threshold;
    bool passed;
  };
  std::vector<json> records_;
  std::vector<Check> checks_;
};

namespace detail {

template <int N>
json vec_json(const Vec<N>& v) {
  json a = json::array();
  for (int i = 0; i < N; ++i) a.push_back(v(i));
  return a;
}

template <int N>
json mat_json(const Mat<N>& m) {
  json a = json::array();
  for (int i = 0; i < N; ++i) {
    json row = json::array();
    for (int j = 0; j < N; ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

inline json estimate_json(const LimitEstimate& e) { return json{{"limit", e.limit}, {"error", e.error}}; }

template <int N>
Anisotropy<N> make_anisotropy(const AnisotropySpec& s) {
  if (s.family == "euclidean") return Anisotropy<N>::euclidean();
  if (s.family == "matrix") {
    if (s.matrix.size() != static_cast<std::size_t>(N * N))
      throw UsageError("key anisotropy.matrix: expected " + std::to_string(N * N) + " entries");
    Mat<N> m;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) m(i, j) = s.matrix[static_cast<std::size_t>(i * N + j)];
    return Anisotropy<N>::matrix(m);
  }
  if (s.family == "ellipse") {
    if (s.weights.size() != static_cast<std::size_t>(N))
      throw UsageError("key anisotropy.weights: expected " + std::to_string(N) + " entries");
    Vec<N> w;
    for (int i = 0; i < N; ++i) w(i) = s.weights[static_cast<std::size_t>(i)];
    return Anisotropy<N>::sphere_graph(theta_ellipse<N>(w));
  }
  if (s.family == "cosine-bump") return Anisotropy<N>::sphere_graph(theta_cosine_bump<N>(s.amplitude));
  if (s.family == "l4") return Anisotropy<N>::sphere_graph(theta_l4<N>());
  if (s.family == "constant-theta") return Anisotropy<N>::sphere_graph(theta_constant<N>());
  throw UsageError("key anisotropy.family: unknown family '" + s.family + "'");
}

inline BProfile make_b(const BSpec& s) {
  if (s.family == "power") return BProfile::power(s.p);
  if (s.family == "regularized-power") return BProfile::regularized_power(s.p, s.kappa);
  if (s.family == "minimal-surface") return BProfile::minimal_surface();
  throw UsageError("key b.family: unknown family '" + s.family + "'");
}

inline Potential make_potential(const PotentialSpec& s) {
  Potential f = Potential::zero();
  if (s.name == "allen-cahn") f = Potential::allen_cahn();
  else if (s.name == "zero") f = Potential::zero();
  else if (s.name == "custom-poly") {
    if (s.coeffs.empty()) throw UsageError("key potential.coeffs: required for custom-poly");
    f = Potential::polynomial(s.coeffs);
  } else throw UsageError("key potential.name: unknown potential '" + s.name + "'");
  return s.offset != 0.0 ? f.shifted(s.offset) : f;
}

template <class T>
T axis_value(const std::vector<T>& v, int axis, const std::string& key) {
  if (v.size() == 1) return v.front();
  if (axis < static_cast<int>(v.size())) return v[static_cast<std::size_t>(axis)];
  throw UsageError("key " + key + ": expected 1 or dimension-many entries");
}

template <int N>
GridSpec<N> make_grid(const std::optional<GridConfig>& c) {
  if (!c) throw UsageError("missing required key grid.points");
  GridSpec<N> g;
  for (int a = 0; a < N; ++a) {
    const auto i = static_cast<std::size_t>(a);
    if (c->points.size() > 1 && c->points.size() != static_cast<std::size_t>(N))
      throw UsageError("key grid.points: expected 1 or dimension-many entries");
    g.points[i] = axis_value(c->points, a, "grid.points");
    g.lower[i] = axis_value(c->lower, a, "grid.lower");
    g.upper[i] = axis_value(c->upper, a, "grid.upper");
    const std::string bc = axis_value(c->boundary, a, "grid.boundary");
    if (bc == "dirichlet") g.boundary[i] = Boundary::dirichlet;
    else if (bc == "periodic") g.boundary[i] = Boundary::periodic;
    else throw UsageError("key grid.boundary: unknown boundary '" + bc + "'");
  }
  try {
    g.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("key grid: ") + e.what());
  }
  return g;
}

template <int N>
Vec<N> make_omega(const ProfileSpec& s) {
  if (s.omega.empty()) return Vec<N>::Unit(0);
  if (s.omega.size() != static_cast<std::size_t>(N))
    throw UsageError("key profile.omega: expected " + std::to_string(N) + " entries");
  Vec<N> w;
  for (int i = 0; i < N; ++i) w(i) = s.omega[static_cast<std::size_t>(i)];
  if (!(w.norm() > 0.0)) throw UsageError("key profile.omega: must be non-zero");
  return w.normalized();
}

template <int N>
double projected_extent(const GridSpec<N>& g, const Vec<N>& omega) {
  double m = 0.0;
  for (unsigned c = 0; c < (1u << N); ++c) {
    double s = 0.0;
    for (int a = 0; a < N; ++a)
      s += omega(a) * (((c >> a) & 1u) ? g.upper[static_cast<std::size_t>(a)] : g.lower[static_cast<std::size_t>(a)]);
    m = std::max(m, std::abs(s));
  }
  return m;
}

// Everything a task needs, built once from the config.
template <int N>
struct Setup {
  const RunConfig& cfg;
  std::uint64_t seed;
  int refine;
  Anisotropy<N> a;
  BProfile b;
  Potential f;
  Vec<N> omega;
};

template <int N>
ProfileSolution<N> heteroclinic(const Setup<N>& s, const Anisotropy<N>& a, const BProfile& b, double extent) {
  const double span = s.cfg.profile.half_span > 0.0 ? s.cfg.profile.half_span : std::max(8.0, extent + 1.0);
  return profile_by_quadrature<N>(a, b, s.f, s.omega, s.cfg.profile.u_minus, s.cfg.profile.u_plus,
                                  s.cfg.profile.points, span);
}

inline double unit_uniform(std::uint64_t& state) {
  // splitmix64
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

template <int N>
struct BoxSolve {
  GridField<N> field;
  std::optional<GridField<N>> reference;
  SolveReport report;
};

template <int N>
BoxSolve<N> solve_box(const Setup<N>& s, const GridSpec<N>& g) {
  const auto& sc = s.cfg.solve;
  BoxSolve<N> out;
  GridField<N> data(g);
  if (sc.boundary_data == "profile") {
    const auto prof = heteroclinic(s, s.a, s.b, projected_extent(g, s.omega));
    data = embed_1d(prof, g);
    out.reference = data;
  } else if (sc.boundary_data == "affine") {
    if (sc.slope.size() != static_cast<std::size_t>(N))
      throw UsageError("key solve.slope: expected " + std::to_string(N) + " entries");
    Vec<N> slope;
    for (int i = 0; i < N; ++i) slope(i) = sc.slope[static_cast<std::size_t>(i)];
    data = GridField<N>::sample(g, [&](const Vec<N>& x) { return slope.dot(x); });
    out.reference = data;
  } else if (sc.boundary_data != "zero") {
    throw UsageError("key solve.boundary_data: unknown option '" + sc.boundary_data + "'");
  }
  GridField<N> start = data;
  std::uint64_t state = s.seed;
  for (std::size_t i = 0; i < start.size(); ++i) {
    if (g.on_dirichlet_boundary(g.unflatten(i))) continue;
    if (sc.initial == "zero") start[i] = 0.0;
    else if (sc.initial == "random") start[i] = 2.0 * unit_uniform(state) - 1.0;
    else if (sc.initial != "data") throw UsageError("key solve.initial: unknown option '" + sc.initial + "'");
  }
  EnergyProblem<N> problem{g, s.a, s.b, s.f, sc.kappa_reg, sc.continuation, 0.0};
  auto [field, report] = minimize(problem, start, sc.tol, sc.max_iter);
  out.field = std::move(field);
  out.report = std::move(report);
  return out;
}

template <int N>
json solve_json(const SolveReport& r) {
  json stages = json::array();
  for (const auto& st : r.continuation)
    stages.push_back(json{{"kappa", st.kappa},
                          {"iterations", st.iterations},
                          {"energy", st.energy},
                          {"gradient_norm", st.gradient_norm},
                          {"converged", st.converged}});
  double max_increase = 0.0;
  for (double d : r.accepted_decrease) max_increase = std::max(max_increase, d);
  return json{{"iterations", r.iterations},     {"final_energy", r.final_energy},
              {"gradient_norm", r.gradient_norm}, {"pde_residual", r.pde_residual},
              {"converged", r.converged},       {"integrated_steps", r.integrated_steps},
              {"max_energy_change", max_increase}, {"continuation", stages}};
}

template <int N>
double sup_difference(const GridField<N>& a, const GridField<N>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <int N>
void write_field_artifacts(const std::filesystem::path& out, const GridField<N>& field) {
  std::ofstream csv(out / "field.csv");
  write_field_csv(csv, field);
  std::ofstream bin(out / "field.bin", std::ios::binary);
  write_field_binary(bin, field);
}

template <int N>
GridSpec<N> refined_grid(GridSpec<N> g, int level) {
  for (int k = 0; k < level; ++k) g = g.refined();
  return g;
}

template <int N>
double p_star_of(const Setup<N>& s) {
  return certify_assumptions(s.a, s.b, s.cfg.checks.K, 256, s.seed).p_star;
}

// ---------------------------------------------------------------------------
// Tasks

template <int N>
void task_certify(const Setup<N>& s, Recorder& rec) {
  const auto& c = s.cfg.checks;
  const auto euler = check_euler_identities(s.a, c.samples, s.seed);
  rec.add(json{{"record", "euler_identities"},
               {"samples", euler.samples},
               {"first", euler.first},
               {"second", euler.second},
               {"third", euler.third},
               {"worst_third", vec_json<N>(euler.worst_third)}});
  rec.check("euler_first", euler.first, "<=", 1e-9);
  rec.check("euler_second", euler.second, "<=", 1e-9);
  rec.check("euler_third", euler.third, "<=", 1e-8);

  const auto wx = check_wxgen_equivalence(s.a, s.b, c.samples, s.seed);
  rec.add(json{{"record", "positivity_equivalence"},
               {"samples", wx.samples},
               {"mismatches", wx.mismatches},
               {"min_full", wx.min_full},
               {"min_restricted", wx.min_restricted}});
  rec.check("positivity_equivalence_mismatches", static_cast<double>(wx.mismatches), "==", 0.0);

  const auto ar = certify_assumptions(s.a, s.b, c.K, c.samples, s.seed);
  rec.add(json{{"record", "assumptions"},
               {"holds_A", ar.holds_A},
               {"holds_B", ar.holds_B},
               {"p", ar.p},
               {"kappa", ar.kappa},
               {"gamma_est", ar.gamma_est},
               {"Gamma_est", ar.Gamma_est},
               {"p_star", ar.p_star},
               {"K", ar.K},
               {"gamma_B", ar.gamma_B},
               {"third_bound", ar.third_bound},
               {"quadratic_defect", ar.quadratic_defect},
               {"b2_zero", estimate_json(ar.origin.b2_zero)},
               {"parity_defect", ar.origin.parity_defect},
               {"hessian_limit_defect", ar.origin.hessian_limit_defect},
               {"witness_gamma", vec_json<N>(ar.witness_gamma)},
               {"witness_gamma_B", vec_json<N>(ar.witness_gamma_B)}});
  rec.check("assumption_A_or_B", (ar.holds_A || ar.holds_B) ? 1.0 : 0.0, "==", 1.0);

  const auto eps = estimate_epsilon(s.b, s.a, c.m_cap, 256, s.seed);
  rec.add(json{{"record", "gauge_epsilon"}, {"epsilon", eps.epsilon}, {"p_star", eps.p_star}, {"witness", eps.witness}});
}

template <int N>
void task_profile(const Setup<N>& s, Recorder& rec, const std::filesystem::path& out) {
  const auto prof = heteroclinic(s, s.a, s.b, 0.0);
  std::ofstream csv(out / "profile.csv");
  write_profile_csv(csv, prof);
  rec.add(json{{"record", "profile"},
               {"samples", prof.s.size()},
               {"s_min", prof.s.front()},
               {"s_max", prof.s.back()},
               {"H_omega", prof.H_omega},
               {"c_u0", prof.c_u0},
               {"max_conservation_residual", prof.max_conservation_residual()}});
  rec.check("conservation_residual", prof.max_conservation_residual(), "<=", 1e-9);

  const auto ep = cu_endpoint_check(prof.u0, s.f);
  rec.add(json{{"record", "cu_endpoint"},
               {"c_u", ep.c_u},
               {"endpoint_max", ep.endpoint_max},
               {"difference", ep.difference},
               {"interior_attained", ep.interior_attained}});
  rec.check("cu_endpoint_difference", ep.difference, "<=", ep.tolerance);

  const auto ls = liouville_scan(prof.u0, s.f, p_star_of(s), 1e-2,
                                 std::pair{s.cfg.profile.u_minus, s.cfg.profile.u_plus});
  json tps = json::array();
  for (const auto& t : ls.touch_points)
    tps.push_back(json{{"r", t.r}, {"dF", t.dF}, {"growth_exponent", t.growth_exponent},
                       {"growth_holds", t.growth_holds}, {"attained", t.attained}});
  rec.add(json{{"record", "liouville"}, {"c_u", ls.c_u}, {"constant", ls.constant}, {"touch_points", tps},
               {"violation", ls.violation}, {"inapplicable", ls.inapplicable}});
  rec.check("liouville_violation", ls.violation ? 1.0 : 0.0, "==", 0.0);
}

template <int N>
void task_solve(const Setup<N>& s, Recorder& rec, const std::filesystem::path& out, bool pbound) {
  const GridSpec<N> base = make_grid<N>(s.cfg.grid);
  std::vector<double> errors, max_p;
  GridField<N> last;
  const auto& c = s.cfg.checks;
  // With heteroclinic boundary data the box field stands in for the entire
  // profile, whose range is [u_minus, u_plus].
  std::optional<std::pair<double, double>> range;
  if (s.cfg.solve.boundary_data == "profile") range = std::pair{s.cfg.profile.u_minus, s.cfg.profile.u_plus};
  for (int level = 0; level <= s.refine; ++level) {
    const GridSpec<N> g = refined_grid(base, level);
    const auto r = solve_box(s, g);
    json row{{"record", "refinement"}, {"level", level}, {"h", g.spacing(0)}, {"solve", solve_json<N>(r.report)}};
    if (r.reference) {
      errors.push_back(sup_difference(r.field, *r.reference));
      row["error_vs_data"] = errors.back();
    }
    if (pbound) {
      const int collar = c.collar << level;
      const auto pr = gradient_bound_check(r.field, s.a, s.b, s.f, collar, c.tol_P, StencilSpec{c.order, 1.0}, range);
      max_p.push_back(pr.max_P);
      row["pbound"] = json{{"collar", collar},    {"c_u", pr.c_u},           {"tol_P", pr.tol_P},
                           {"max_P", pr.max_P},   {"evaluated", pr.evaluated}, {"violations", pr.violations.size()}};
    }
    rec.add(row);
    rec.check("converged_level_" + std::to_string(level), r.report.converged ? 1.0 : 0.0, "==", 1.0);
    if (level == s.refine) {
      last = r.field;
      if (pbound) {
        const auto pr =
            gradient_bound_check(r.field, s.a, s.b, s.f, c.collar << level, c.tol_P, StencilSpec{c.order, 1.0}, range);
        rec.check("max_P", pr.max_P, "<=", pr.tol_P);
        const auto ep = cu_endpoint_check(r.field.values, s.f);
        rec.add(json{{"record", "cu_endpoint"}, {"c_u", ep.c_u}, {"endpoint_max", ep.endpoint_max},
                     {"difference", ep.difference}, {"interior_attained", ep.interior_attained}});
        rec.check("cu_endpoint_difference", ep.difference, "<=", ep.tolerance);
      }
    }
  }
  for (std::size_t k = 1; k < errors.size(); ++k)
    rec.check("error_decreases_level_" + std::to_string(k), errors[k] - errors[k - 1], "<=", 0.0);
  // The bound is sharp (P = 0 on 1D solutions), so max_P tends to 0: its
  // positive part must not grow and its distance from 0 must shrink.
  for (std::size_t k = 1; k < max_p.size(); ++k) {
    const std::string level = std::to_string(k);
    rec.check("max_P_excess_nonincreasing_level_" + level,
              std::max(max_p[k], 0.0) - std::max(max_p[k - 1], 0.0), "<=", 0.0);
    rec.check("max_P_deviation_decreases_level_" + level, std::abs(max_p[k]) - std::abs(max_p[k - 1]), "<=", 0.0);
  }
  write_field_artifacts(out, last);
}

template <int N>
void task_rigidity(const Setup<N>& s, Recorder& rec, const std::filesystem::path& out) {
  const GridSpec<N> base = make_grid<N>(s.cfg.grid);
  const auto& c = s.cfg.checks;
  std::vector<double> residuals;
  GridField<N> last;
  for (int level = 0; level <= s.refine; ++level) {
    const GridSpec<N> g = refined_grid(base, level);
    const auto prof = heteroclinic(s, s.a, s.b, projected_extent(g, s.omega));
    const GridField<N> field = embed_1d(prof, g);
    const StencilSpec spec{c.order, 1.0};
    const auto der = fd_derivatives(field, spec);
    const double theta = c.theta > 0.0 ? c.theta : default_theta<N>(der.gradient);
    const auto pr = pine_residual(field, s.a, s.b, s.f, theta, spec);
    const auto fl = rigidity_flatness(field, s.a, s.b, s.f, theta, spec);
    residuals.push_back(pr.max_abs_residual);
    rec.add(json{{"record", "refinement"},
                 {"level", level},
                 {"h", g.spacing(0)},
                 {"theta", theta},
                 {"max_abs_residual", pr.max_abs_residual},
                 {"min_R", pr.min_R},
                 {"max_P", pr.max_P},
                 {"evaluated", pr.evaluated},
                 {"max_block_norm", fl.max_block_norm},
                 {"max_abs_P", fl.max_abs_P},
                 {"max_block_where_P_vanishes", fl.max_block_where_P_vanishes}});
    if (level == s.refine) {
      last = field;
      rec.check("min_R", pr.min_R, ">=", -1e-12);
      rec.check("flatness_where_P_vanishes", fl.max_block_where_P_vanishes, "<=", c.flatness_tol);
    }
  }
  for (std::size_t k = 1; k < residuals.size(); ++k) {
    const double ratio = residuals[k - 1] / residuals[k];
    rec.add(json{{"record", "order"}, {"level", k}, {"ratio", ratio}});
    rec.check("residual_ratio_min_level_" + std::to_string(k), ratio, ">=", 3.5);
    rec.check("residual_ratio_max_level_" + std::to_string(k), ratio, "<=", 4.5);
  }
  write_field_artifacts(out, last);
}

template <int N>
void task_wulff(const Setup<N>& s, Recorder& rec, const std::filesystem::path& out) {
  const auto shape = wulff_boundary(s.a, s.cfg.checks.wulff_samples);
  std::ofstream csv(out / "wulff.csv");
  write_wulff_csv(csv, shape);
  double level = 0.0, homogeneity = 0.0;
  for (const auto& x : shape.boundary) {
    const double d = dual_value(s.a, x).value;
    level = std::max(level, std::abs(d - 1.0));
    homogeneity = std::max(homogeneity, std::abs(dual_value(s.a, Vec<N>(2.5 * x)).value - 2.5 * d));
  }
  json r{{"record", "wulff"}, {"samples", shape.boundary.size()}, {"max_level_defect", level},
         {"max_homogeneity_defect", homogeneity}};
  rec.check("wulff_level_defect", level, "<=", 1e-8);
  rec.check("dual_homogeneity", homogeneity, "<=", 1e-9);
  if (s.a.family() == AnisotropyFamily::matrix) {
    const Mat<N> inv = s.a.matrix_form().inverse();
    double closed = 0.0;
    for (const auto& x : shape.boundary) closed = std::max(closed, std::abs(std::sqrt(x.dot(inv * x)) - 1.0));
    r["closed_form_defect"] = closed;
    rec.check("dual_closed_form", closed, "<=", 1e-8);
  }
  rec.add(r);
}

template <int N>
void task_characterize(const Setup<N>& s, Recorder& rec) {
  const auto m = characterize_matrix_form(s.a, s.b, s.cfg.checks.matrix_tol);
  json r{{"record", "characterize"},
         {"is_matrix", m.matrix.has_value()},
         {"candidate", mat_json<N>(m.candidate)},
         {"defect", m.defect},
         {"witness", vec_json<N>(m.witness)},
         {"hessian_consistency", m.hessian_consistency}};
  rec.add(r);
  const std::string& expect = s.cfg.checks.expect;
  if (expect == "matrix") rec.check("is_matrix", m.matrix ? 1.0 : 0.0, "==", 1.0);
  else if (expect == "none") rec.check("is_matrix", m.matrix ? 1.0 : 0.0, "==", 0.0);
  else if (!expect.empty()) throw UsageError("key checks.expect: expected 'matrix' or 'none'");
}

template <int N>
void task_wave(const Setup<N>& s, Recorder& rec) {
  const GridSpec<N> base = make_grid<N>(s.cfg.grid);
  const auto& w = s.cfg.wave;
  const double speed = w.speed_factor * s.a.value(s.omega);
  // u0 is the isotropic Allen-Cahn-type heteroclinic of the configured F.
  const GridSpec<N> finest = refined_grid(base, s.refine);
  const double dt0 = w.dt > 0.0 ? w.dt : base.spacing(0);
  const auto prof = heteroclinic(s, Anisotropy<N>::euclidean(), BProfile::power(2.0),
                                 projected_extent(finest, s.omega) + std::abs(speed) * dt0 + 1.0);
  std::vector<double> residuals;
  for (int level = 0; level <= s.refine; ++level) {
    const GridSpec<N> g = refined_grid(base, level);
    const double dt = dt0 / static_cast<double>(1 << level);
    residuals.push_back(traveling_wave_residual<N>(s.a, s.omega, speed, prof, g, dt));
    rec.add(json{{"record", "refinement"}, {"level", level}, {"h", g.spacing(0)}, {"dt", dt}, {"speed", speed},
                 {"residual", residuals.back()}});
  }
  if (w.speed_factor == 1.0) {
    rec.check("wave_residual", residuals.back(), "<=", w.tol);
    for (std::size_t k = 1; k < residuals.size(); ++k) {
      const double ratio = residuals[k - 1] / residuals[k];
      rec.check("wave_ratio_min_level_" + std::to_string(k), ratio, ">=", 3.5);
      rec.check("wave_ratio_max_level_" + std::to_string(k), ratio, "<=", 4.5);
    }
  } else {
    rec.check("wrong_speed_residual", residuals.back(), ">=", w.tol);
  }
}

template <int N>
int run_dimension(const RunConfig& cfg, const RunOptions& opt, Recorder& rec) {
  const Setup<N> s{cfg,
                   opt.seed.value_or(cfg.seed),
                   opt.refine,
                   make_anisotropy<N>(cfg.anisotropy),
                   cfg.sections.contains("b") ? make_b(cfg.b) : BProfile::power(2.0),
                   make_potential(cfg.potential),
                   make_omega<N>(cfg.profile)};
  if (cfg.task == Task::solve || cfg.task == Task::pbound || cfg.task == Task::rigidity || cfg.task == Task::wave)
    (void)make_grid<N>(cfg.grid);
  rec.add(json{{"record", "config"},
               {"task", task_name(cfg.task)},
               {"dimension", N},
               {"seed", s.seed},
               {"refine", opt.refine},
               {"anisotropy", s.a.name()},
               {"b", s.b.name()},
               {"potential", s.f.name()},
               {"omega", vec_json<N>(s.omega)}});
  switch (cfg.task) {
    case Task::certify: task_certify(s, rec); break;
    case Task::solve: task_solve(s, rec, opt.out, false); break;
    case Task::profile: task_profile(s, rec, opt.out); break;
    case Task::pbound: task_solve(s, rec, opt.out, true); break;
    case Task::rigidity: task_rigidity(s, rec, opt.out); break;
    case Task::wulff: task_wulff(s, rec, opt.out); break;
    case Task::characterize: task_characterize(s, rec); break;
    case Task::wave: task_wave(s, rec); break;
  }
  return rec.all_passed() ? kPassed : kCheckFailed;
}

}  // namespace detail

/// Runs a parsed configuration; writes artifacts into opt.out.
inline int run(const RunConfig& cfg, const RunOptions& opt, std::ostream& err) {
  if (opt.refine < 0) {
    err << "error: --refine must be non-negative\n";
    return kUsage;
  }
  set_worker_count(opt.threads);
  std::error_code ec;
  std::filesystem::create_directories(opt.out, ec);
  if (ec) {
    err << "error: cannot create output directory " << opt.out << ": " << ec.message() << '\n';
    return kUsage;
  }
  Recorder rec;
  int code = kPassed;
  try {
    switch (cfg.dimension) {
      case 1: code = detail::run_dimension<1>(cfg, opt, rec); break;
      case 2: code = detail::run_dimension<2>(cfg, opt, rec); break;
      case 3: code = detail::run_dimension<3>(cfg, opt, rec); break;
      default: throw UsageError("key task.dimension: must be 1, 2 or 3");
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConstructionError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    // A structural failure during the run counts as a failed check.
    rec.add(json{{"record", "error"}, {"message", e.what()}});
    rec.check("completed", 0.0, "==", 1.0);
    code = kCheckFailed;
  }
  std::ofstream report(opt.out / "report.json");
  rec.write_report(report);
  std::ofstream summary(opt.out / "summary.txt");
  rec.write_summary(summary, task_name(cfg.task));
  if (code == kCheckFailed) err << "check failed: " << rec.first_failure().value_or("?") << '\n';
  return code;
}

/// Parses and runs a config file.
inline int run(const std::filesystem::path& config, const RunOptions& opt, std::ostream& err) {
  std::ifstream is(config);
  if (!is) {
    err << "error: cannot read config " << config << '\n';
    return kUsage;
  }
  RunConfig cfg;
  try {
    cfg = parse_config(is);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return run(cfg, opt, err);
}

}  // namespace aniso::cli

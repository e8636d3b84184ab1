// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and runtime
// budgets are fixed here; a criterion passes only when both hold.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aniso/aniso.hpp"
#include "aniso/cli/run.hpp"
#include "oracles.hpp"

using namespace aniso;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string sci(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << std::scientific << v;
  return os.str();
}

// Collects the samples of every solution computed in the suite for the
// endpoint diagnostic.
std::vector<std::vector<double>> g_solutions;

const Potential kAC = Potential::allen_cahn();
Mat<2> diag41() { return Vec<2>(4.0, 1.0).asDiagonal(); }

std::vector<Anisotropy<2>> families2() {
  return {Anisotropy<2>::euclidean(),
          Anisotropy<2>::matrix(diag41()),
          Anisotropy<2>::sphere_graph(theta_constant<2>()),
          Anisotropy<2>::sphere_graph(theta_ellipse<2>(Vec<2>(4.0, 1.0))),
          Anisotropy<2>::sphere_graph(theta_cosine_bump<2>(0.3)),
          Anisotropy<2>::sphere_graph(theta_l4<2>())};
}

std::vector<Anisotropy<3>> families3() {
  Mat<3> m;
  m << 3.0, 0.5, 0.2, 0.5, 2.0, -0.3, 0.2, -0.3, 1.0;
  return {Anisotropy<3>::euclidean(),
          Anisotropy<3>::matrix(m),
          Anisotropy<3>::sphere_graph(theta_constant<3>()),
          Anisotropy<3>::sphere_graph(theta_ellipse<3>(Vec<3>(1.0, 2.0, 5.0))),
          Anisotropy<3>::sphere_graph(theta_cosine_bump<3>(0.3)),
          Anisotropy<3>::sphere_graph(theta_l4<3>())};
}

bool in_band(double r) { return r >= 3.5 && r <= 4.5; }

std::string ratios_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 1; k < v.size(); ++k) s += (k > 1 ? "," : "") + sci(v[k - 1] / v[k]);
  return s;
}

bool all_ratios_in_band(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!in_band(v[k - 1] / v[k])) return false;
  return true;
}

// 1. Homogeneity identities of H and its derivatives.
Outcome euler_identities() {
  double first = 0.0, second = 0.0, third = 0.0;
  auto take = [&](const auto& r) {
    first = std::max(first, r.first);
    second = std::max(second, r.second);
    third = std::max(third, r.third);
  };
  for (const auto& a : families2()) take(check_euler_identities(a, 1000, 11));
  for (const auto& a : families3()) take(check_euler_identities(a, 1000, 11));
  return {first <= 1e-9 && second <= 1e-9 && third <= 1e-8,
          "first=" + sci(first) + " second=" + sci(second) + " third=" + sci(third)};
}

// 2. Positivity of the full Hessian of B(H) agrees with the restricted test.
Outcome hessian_positivity() {
  std::size_t mismatches = 0, runs = 0;
  auto take = [&](const auto& a) {
    for (const auto& b : {BProfile::power(2.0), BProfile::power(3.0)}) {
      mismatches += check_wxgen_equivalence(a, b, 1000, 5).mismatches;
      ++runs;
    }
  };
  take(Anisotropy<2>::matrix(diag41()));
  take(Anisotropy<2>::sphere_graph(theta_ellipse<2>(Vec<2>(4.0, 1.0))));
  take(Anisotropy<2>::sphere_graph(theta_cosine_bump<2>(0.3)));
  take(Anisotropy<3>::sphere_graph(theta_cosine_bump<3>(0.3)));
  return {mismatches == 0, "mismatches=" + std::to_string(mismatches) + " over " + std::to_string(runs) + "x1000"};
}

// 3. Quartic form positivity and the rigid construction.
template <int N>
void quartic_sweep(const Anisotropy<N>& a, std::mt19937_64& rng, int count, double& worst_form, double& worst_rigid,
                  double& worst_block) {
  std::normal_distribution<double> g;
  for (int k = 0; k < count; ++k) {
    Vec<N> xi;
    for (int i = 0; i < N; ++i) xi(i) = g(rng);
    const Mat<N> c = oracle::random_symmetric<N>(rng);
    const double hs = a.template jet<2>(xi).hess.squaredNorm();
    worst_form = std::min(worst_form, corpos_form(a, xi, c).value / std::max(1.0, c.squaredNorm() * hs));
    Vec<N> v;
    for (int i = 0; i < N; ++i) v(i) = g(rng);
    const Vec<N> u = xi.normalized();
    const Mat<N> rigid = 0.5 * (u * v.transpose() + v * u.transpose());
    const auto r = corpos_form(a, xi, rigid);
    worst_rigid = std::max(worst_rigid, std::abs(r.value) / std::max(1.0, rigid.squaredNorm() * hs));
    worst_block = std::max(worst_block, r.rigid_block_norm / std::max(1.0, rigid.norm()));
  }
}

Outcome quartic_form() {
  std::mt19937_64 rng(2024);
  double form = 0.0, rigid = 0.0, block = 0.0;
  const auto f2 = families2();
  const auto f3 = families3();
  const int per = 10000 / static_cast<int>(f2.size() + f3.size()) + 1;
  for (const auto& a : f2) quartic_sweep<2>(a, rng, per, form, rigid, block);
  for (const auto& a : f3) quartic_sweep<3>(a, rng, per, form, rigid, block);
  return {form >= -1e-12 && rigid <= 1e-12 && block <= 1e-12,
          "min_form=" + sci(form) + " rigid_form=" + sci(rigid) + " rigid_block=" + sci(block)};
}

// 4. Gauge b(t) = B'(t) t - B(t) for power profiles, and the epsilon estimate.
Outcome gauge_bounds() {
  double rel = 0.0, eps_err = 0.0;
  bool pstar_ok = true;
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const auto b = BProfile::power(p);
    for (int k = 1; k <= 10000; ++k) {
      const double t = 10.0 * k / 10000.0;
      const double exact = (1.0 - 1.0 / p) * std::pow(t, p);
      rel = std::max(rel, std::abs(gauge_b(b, t) - exact) / exact);
    }
    const auto e = estimate_epsilon(b, Anisotropy<2>::euclidean(), 10.0);
    eps_err = std::max(eps_err, std::abs(e.epsilon - (p - 1.0) / p));
    pstar_ok = pstar_ok && e.p_star == p;
  }
  return {rel <= 1e-12 && eps_err <= 1e-10 && pstar_ok,
          "gauge_rel=" + sci(rel) + " epsilon_err=" + sci(eps_err) + (pstar_ok ? " p_star=p" : " p_star!=p")};
}

// 5. Heteroclinic profile against the closed form.
Outcome profile_oracle() {
  const auto iso = profile_by_quadrature<2>(Anisotropy<2>::euclidean(), BProfile::power(2.0), kAC, Vec<2>(1.0, 0.0),
                                            -1.0, 1.0, 1601);
  const auto mat = profile_by_quadrature<2>(Anisotropy<2>::matrix(diag41()), BProfile::power(2.0), kAC,
                                            Vec<2>(1.0, 0.0), -1.0, 1.0, 1601, 16.0);
  double e_iso = 0.0, e_mat = 0.0;
  for (std::size_t i = 0; i < iso.s.size(); ++i)
    if (std::abs(iso.s[i]) <= 8.0) e_iso = std::max(e_iso, std::abs(iso.u0[i] - oracle::tanh_profile(iso.s[i])));
  // Rescaled comparison: u0 for H(omega) = 2 is tanh(s / (2 sqrt 2)).
  for (std::size_t i = 0; i < mat.s.size(); ++i)
    e_mat = std::max(e_mat, std::abs(mat.u0[i] - oracle::tanh_profile(mat.s[i], 2.0)));
  const double cons = std::max(iso.max_conservation_residual(), mat.max_conservation_residual());
  g_solutions.push_back(iso.u0);
  g_solutions.push_back(mat.u0);
  return {e_iso <= 1e-8 && cons <= 1e-10 && e_mat <= 1e-8 && mat.H_omega == 2.0,
          "sup_err=" + sci(e_iso) + " conservation=" + sci(cons) + " rescaled_err=" + sci(e_mat)};
}

// 6. The P-function identity residual on radial and embedded 1D solutions.
Outcome p_identity() {
  const auto b = BProfile::power(2.0);
  const auto a = Anisotropy<2>::euclidean();
  // v' > 0 on [1, 4.36] for this start, so no excluded critical circle.
  const auto radial = radial_profile(b, kAC, 2, {1.0, 4.3}, -0.9, 0.5, 8000);
  g_solutions.push_back(radial.v);
  const Vec<2> omega = Vec<2>(1.0, 1.0).normalized();
  std::vector<double> res_radial, res_1d;
  double min_R = std::numeric_limits<double>::infinity();
  for (int n : {65, 129, 257, 513}) {
    // Radii in [2.12, 4.11], inside the integrated span.
    const auto gr = GridSpec<2>::box(n, 1.5, 2.9);
    const auto fr = embed_radial(radial, gr, Vec<2>(Vec<2>::Zero()));
    const auto rr = pine_residual(fr, a, b, kAC, 1e-6, StencilSpec{2, gr.spacing(0)});
    res_radial.push_back(rr.max_abs_residual);
    min_R = std::min(min_R, rr.min_R);

    const auto g1 = GridSpec<2>::box(n, -2.0, 2.0);
    const auto f1 = GridField<2>::sample(g1, [&](const Vec<2>& x) { return oracle::tanh_profile(omega.dot(x)); });
    const auto r1 = pine_residual(f1, a, b, kAC, 1e-6, StencilSpec{2, g1.spacing(0)});
    res_1d.push_back(r1.max_abs_residual);
    min_R = std::min(min_R, r1.min_R);
  }
  return {all_ratios_in_band(res_radial) && all_ratios_in_band(res_1d) && min_R >= -1e-12,
          "radial_ratios=" + ratios_text(res_radial) + " profile_ratios=" + ratios_text(res_1d) + " min_R=" + sci(min_R)};
}

// 7. Gradient bound on minimized boxes, equality and flatness on profiles.
Outcome gradient_bound() {
  const auto a = Anisotropy<2>::euclidean();
  const auto b = BProfile::power(2.0);
  const Vec<2> omega(1.0, 0.0);
  const auto prof = profile_by_quadrature<2>(a, b, kAC, omega, -1.0, 1.0, 4001, 4.0);
  std::vector<double> max_p;
  double at_128 = 0.0;
  bool converged = true;
  for (int level = 0; level < 3; ++level) {
    const int n = 64 * (1 << level) + 1;
    const auto g = GridSpec<2>::box(n, -1.0, 1.0);
    const auto data = embed_1d(prof, g);
    GridField<2> start = data;
    for (std::size_t i = 0; i < start.size(); ++i)
      if (!g.on_dirichlet_boundary(g.unflatten(i))) start[i] = 0.0;
    const EnergyProblem<2> problem{g, a, b, kAC};
    const auto [u, rep] = minimize(problem, start, 1e-9, 40000);
    converged = converged && rep.converged;
    g_solutions.push_back(u.values);
    const auto pr = gradient_bound_check(u, a, b, kAC, 4 << level, 1e-4, StencilSpec{2, g.spacing(0)},
                                         std::pair{-1.0, 1.0});
    max_p.push_back(pr.max_P);
    if (n == 129) at_128 = pr.max_P;
  }
  // The bound is sharp, so max_P tends to 0 from either side: its positive
  // part must not grow and its distance from 0 must shrink.
  bool decreasing = true;
  for (std::size_t k = 1; k < max_p.size(); ++k)
    decreasing = decreasing && std::max(max_p[k], 0.0) <= std::max(max_p[k - 1], 0.0) &&
                 std::abs(max_p[k]) < std::abs(max_p[k - 1]);

  const auto ge = GridSpec<2>::box(129, -1.0, 1.0);
  const Vec<2> tilted = Vec<2>(2.0, 1.0).normalized();
  const auto fe = GridField<2>::sample(ge, [&](const Vec<2>& x) { return oracle::tanh_profile(tilted.dot(x)); });
  const auto eq = gradient_bound_check(fe, a, b, kAC, 4, std::nullopt, StencilSpec{4, ge.spacing(0)}, std::pair{-1.0, 1.0});
  double p_dev = 0.0;
  for (std::size_t i = 0; i < fe.size(); ++i)
    if (!eq.excluded[i]) p_dev = std::max(p_dev, std::abs(eq.P[i]));
  const auto flat_field = embed_1d(prof, ge);
  const auto flat = rigidity_flatness(flat_field, a, b, kAC, 1e-6, StencilSpec{2, ge.spacing(0)});
  g_solutions.push_back(fe.values);

  std::string seq;
  for (double m : max_p) seq += (seq.empty() ? "" : ",") + sci(m);
  return {converged && at_128 <= 1e-4 && decreasing && p_dev <= 1e-8 && flat.max_block_norm <= 1e-10,
          "max_P=[" + seq + "] equality_dev=" + sci(p_dev) + " flatness=" + sci(flat.max_block_norm) +
              (converged ? "" : " not_converged")};
}

// 8. The gauge is attained at an endpoint of the range.
Outcome endpoint_gauge() {
  double worst = 0.0;
  for (const auto& v : g_solutions) worst = std::max(worst, cu_endpoint_check(v, kAC).difference);
  return {!g_solutions.empty() && worst <= 1e-10,
          "solutions=" + std::to_string(g_solutions.size()) + " max_difference=" + sci(worst)};
}

// 9. Dual function and Wulff boundary of a matrix anisotropy.
Outcome wulff_geometry() {
  const auto a = Anisotropy<2>::matrix(diag41());
  const Mat<2> minv = diag41().inverse();
  double dual_err = 0.0;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const Vec<2> x(u(rng), u(rng));
    dual_err = std::max(dual_err, std::abs(dual_value(a, x).value - std::sqrt(x.dot(minv * x))));
  }
  double hd = 0.0;
  for (const auto& x : wulff_boundary(a, 256).boundary)
    hd = std::max(hd, oracle::distance_to_ellipse(2.0, 1.0, x(0), x(1)));
  return {dual_err <= 1e-8 && hd <= 1e-6, "dual_err=" + sci(dual_err) + " hausdorff=" + sci(hd)};
}

// 10. Travelling wave at the speed H(omega).
Outcome travelling_wave() {
  const auto a = Anisotropy<2>::matrix(diag41());
  const Vec<2> omega(1.0, 0.0);
  const auto prof = profile_by_quadrature<2>(a, BProfile::power(2.0), kAC, omega, -1.0, 1.0, 8001, 8.0);
  std::vector<double> right;
  double wrong = 0.0;
  for (int n : {33, 65, 129}) {
    const auto g = GridSpec<2>::box(n, -1.0, 1.0);
    const double h = g.spacing(0);
    right.push_back(traveling_wave_residual<2>(a, omega, a.value(omega), prof, g, h));
    if (n == 129) wrong = traveling_wave_residual<2>(a, omega, 1.1 * a.value(omega), prof, g, h);
  }
  const double ratio = wrong / right.back();
  return {all_ratios_in_band(right) && ratio >= 100.0,
          "ratios=" + ratios_text(right) + " residual=" + sci(right.back()) + " wrong_over_right=" + sci(ratio)};
}

// 11. Reports do not depend on the worker count or on repetition.
Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "aniso_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> configs{
      {"solve", "[task]\nname = solve\ndimension = 2\nseed = 7\n[anisotropy]\nfamily = matrix\nmatrix = 4 0 0 1\n"
                "[b]\nfamily = power\np = 2\n[potential]\nname = allen-cahn\n[grid]\npoints = 33\nlower = -1\n"
                "upper = 1\n[solve]\ntol = 1e-9\ninitial = random\n[profile]\nomega = 1 0\n"},
      {"certify", "[task]\nname = certify\ndimension = 3\nseed = 3\n[anisotropy]\nfamily = cosine-bump\n"
                  "amplitude = 0.3\n[b]\nfamily = power\np = 3\n[checks]\nsamples = 500\n"}};
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
  };
  bool same = true;
  std::ostringstream err;
  for (const auto& [name, text] : configs) {
    std::ofstream(dir / (name + ".ini")) << text;
    std::vector<std::string> reports;
    for (int threads : {1, 8, 1}) {
      cli::RunOptions opt;
      opt.out = dir / (name + "_" + std::to_string(reports.size()));
      opt.threads = threads;
      cli::run(dir / (name + ".ini"), opt, err);
      reports.push_back(slurp(opt.out / "report.json"));
    }
    same = same && !reports[0].empty() && reports[0] == reports[1] && reports[0] == reports[2];
  }
  fs::remove_all(dir);
  return {same, same ? "byte-identical across 1/8/1 workers" : "reports differ " + err.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"euler_identities", 1.0, euler_identities},
      {"hessian_positivity_equivalence", 2.0, hessian_positivity},
      {"quartic_form", 2.0, quartic_form},
      {"gauge_bounds", 1.0, gauge_bounds},
      {"profile_oracle", 2.0, profile_oracle},
      {"p_function_identity", 60.0, p_identity},
      {"gradient_bound", 300.0, gradient_bound},
      {"endpoint_gauge", 1.0, endpoint_gauge},
      {"wulff_geometry", 5.0, wulff_geometry},
      {"travelling_wave", 30.0, travelling_wave},
      {"determinism", 30.0, determinism},
  };
  int failed = 0;
  int id = 0;
  for (const auto& c : criteria) {
    ++id;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = o.passed && secs <= c.budget_s;
    failed += ok ? 0 : 1;
    std::cout << (ok ? "PASS" : "FAIL") << ' ' << std::setw(2) << id << ' ' << c.name << ": " << o.detail << " ["
              << std::fixed << std::setprecision(2) << secs << " s / " << c.budget_s << " s]" << std::defaultfloat
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}

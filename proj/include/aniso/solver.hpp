#pragma once

// Discrete Wulff energy on a node grid and its minimization.
//
// Every grid cell carries 2^N corner gradients: at corner c the component
// along axis a is the difference of u across the cell edge through c parallel
// to a, divided by h_a. The cell energy is the corner average of B(H(g_c))
// times the cell volume; F is integrated by the nodal trapezoid rule. The
// energy gradient is assembled exactly from this functional, so the discrete
// Euler-Lagrange operator is a conservative flux difference.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "aniso/anisotropy.hpp"
#include "aniso/bprofile.hpp"
#include "aniso/errors.hpp"
#include "aniso/grid.hpp"
#include "aniso/parallel.hpp"
#include "aniso/potential.hpp"

namespace aniso {

template <int N>
struct EnergyProblem {
  GridSpec<N> grid;
  Anisotropy<N> anisotropy;
  BProfile profile;
  Potential potential;
  /// Final regularization; 0 solves with `profile` itself.
  double kappa_reg = 0.0;
  /// Decreasing kappa values solved first, each warm-starting the next.
  std::vector<double> continuation;
  /// Corner gradients with |g| <= theta get zero flux.
  double theta = 0.0;

  /// The profile used at regularization level kappa.
  BProfile profile_at(double kappa) const {
    if (kappa <= 0.0) return profile;
    if (!profile.has_growth_parameters())
      throw UsageError("regularization needs a profile with growth parameters");
    return BProfile::regularized_power(profile.p(), kappa);
  }

  void validate() const {
    grid.validate();
    if (kappa_reg < 0.0 || theta < 0.0) throw UsageError("kappa_reg and theta must be non-negative");
    double prev = std::numeric_limits<double>::infinity();
    for (double k : continuation) {
      if (!(k > 0.0) || !(k < prev)) throw UsageError("continuation schedule must be positive and decreasing");
      prev = k;
    }
    if (!continuation.empty() && !(continuation.back() > kappa_reg))
      throw UsageError("continuation schedule must stay above kappa_reg");
  }
};

struct ContinuationStage {
  double kappa = 0.0;
  int iterations = 0;
  double energy = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
};

struct SolveReport {
  int iterations = 0;
  double final_energy = 0.0;
  /// Sup norm of the energy gradient over free nodes.
  double gradient_norm = 0.0;
  double pde_residual = 0.0;
  bool converged = false;
  std::vector<ContinuationStage> continuation;
  /// Energy change of every accepted step (all <= 0).
  std::vector<double> accepted_decrease;
  /// Steps whose energy change was below roundoff of the total and was
  /// integrated along the segment instead.
  int integrated_steps = 0;
};

namespace detail {

template <int N>
struct CellLayout {
  std::array<int, N> cells{};
  std::array<int, N> points{};
  std::array<bool, N> periodic{};
  std::array<double, N> h{};
  std::size_t count = 1;

  explicit CellLayout(const GridSpec<N>& g) {
    for (int a = 0; a < N; ++a) {
      const auto i = static_cast<std::size_t>(a);
      periodic[i] = g.periodic(a);
      points[i] = g.points[i];
      cells[i] = periodic[i] ? points[i] : points[i] - 1;
      h[i] = g.spacing(a);
      count *= static_cast<std::size_t>(cells[i]);
    }
  }

  std::array<int, N> cell_index(std::size_t flat) const {
    std::array<int, N> idx{};
    for (int a = N - 1; a >= 0; --a) {
      const auto c = static_cast<std::size_t>(cells[static_cast<std::size_t>(a)]);
      idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % c);
      flat /= c;
    }
    return idx;
  }

  std::size_t cell_flat(const std::array<int, N>& idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < N; ++a)
      flat = flat * static_cast<std::size_t>(cells[static_cast<std::size_t>(a)]) +
             static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
    return flat;
  }

  // Node at corner `corner` (bit a = +1 along axis a) of a cell.
  std::size_t corner_node(const std::array<int, N>& cell, unsigned corner) const {
    std::size_t flat = 0;
    for (int a = 0; a < N; ++a) {
      const auto i = static_cast<std::size_t>(a);
      int k = cell[i] + static_cast<int>((corner >> a) & 1u);
      if (k == points[i]) k = 0;
      flat = flat * static_cast<std::size_t>(points[i]) + static_cast<std::size_t>(k);
    }
    return flat;
  }

  // Cell that has node `node` at corner `corner`, if any.
  std::optional<std::size_t> cell_of(const std::array<int, N>& node, unsigned corner) const {
    std::array<int, N> c{};
    for (int a = 0; a < N; ++a) {
      const auto i = static_cast<std::size_t>(a);
      int k = node[i] - static_cast<int>((corner >> a) & 1u);
      if (k < 0) {
        if (!periodic[i]) return std::nullopt;
        k += cells[i];
      }
      if (k >= cells[i]) return std::nullopt;
      c[i] = k;
    }
    return cell_flat(c);
  }
};

inline constexpr unsigned corner_count(int n) { return 1u << n; }

// Corner gradients of one cell.
template <int N>
void corner_gradients(const CellLayout<N>& L, const std::vector<double>& u, const std::array<int, N>& cell,
                      std::array<Vec<N>, (1u << N)>& g) {
  std::array<double, (1u << N)> uc{};
  for (unsigned c = 0; c < corner_count(N); ++c) uc[c] = u[L.corner_node(cell, c)];
  for (unsigned c = 0; c < corner_count(N); ++c)
    for (int a = 0; a < N; ++a) {
      const unsigned bit = 1u << a;
      g[c](a) = (uc[c | bit] - uc[c & ~bit]) / L.h[static_cast<std::size_t>(a)];
    }
}

template <int N>
double trapezoid_weight(const GridSpec<N>& g, const std::array<int, N>& idx) {
  double w = 1.0;
  for (int a = 0; a < N; ++a) {
    if (g.periodic(a)) continue;
    const int i = idx[static_cast<std::size_t>(a)];
    if (i == 0 || i == g.points[static_cast<std::size_t>(a)] - 1) w *= 0.5;
  }
  return w;
}

template <int N>
void check_field(const GridSpec<N>& g, const std::vector<double>& u) {
  if (u.size() != g.size()) throw UsageError("field size does not match the grid");
}

struct EnergyParts {
  long double gradient = 0.0L;
  long double potential = 0.0L;  // integral of F without its constant offset
};

template <int N>
EnergyParts energy_parts(const EnergyProblem<N>& P, const BProfile& b, const std::vector<double>& u) {
  const auto& g = P.grid;
  check_field(g, u);
  const CellLayout<N> L(g);
  const double vol = g.cell_volume();
  std::vector<double> cell(L.count);
  parallel_for(L.count, [&](std::size_t k) {
    std::array<Vec<N>, (1u << N)> gr;
    corner_gradients<N>(L, u, L.cell_index(k), gr);
    double s = 0.0;
    for (const auto& gc : gr) {
      const double t = P.anisotropy.value(gc);
      s += b.value(t);
    }
    cell[k] = s * vol / corner_count(N);
  });
  std::vector<double> node(u.size());
  parallel_for(u.size(), [&](std::size_t i) {
    node[i] = trapezoid_weight<N>(g, g.unflatten(i)) * vol * P.potential.shape_value(u[i]);
  });
  return {pairwise_sum_extended(cell), pairwise_sum_extended(node)};
}

// Flux B'(H(g)) grad H(g) with the continuous limit 0 for |g| <= theta.
template <int N>
Vec<N> corner_flux(const Anisotropy<N>& a, const BProfile& b, const Vec<N>& g, double theta) {
  const double n = g.norm();
  if (n <= theta || n == 0.0) return Vec<N>::Zero();
  const auto [h, dh] = a.value_gradient(g);
  const BValues bv = b.eval(h);
  if (!(bv.b2 > 0.0)) throw AssumptionViolation("B'' <= 0 at a gradient outside the excluded set");
  return bv.b1 * dh;
}

// dE/du divided by the cell volume, zero on Dirichlet nodes. Optionally
// flags nodes touching an excluded corner.
template <int N>
std::vector<double> energy_gradient_impl(const EnergyProblem<N>& P, const BProfile& b, const std::vector<double>& u,
                                         std::vector<std::uint8_t>* excluded = nullptr) {
  const auto& g = P.grid;
  check_field(g, u);
  const CellLayout<N> L(g);
  constexpr unsigned C = 1u << N;
  // Pass 1: per-cell edge sums q_{c,a} + q_{c^a,a} stored at the corner with bit a clear.
  std::vector<std::array<Vec<N>, C>> flux(L.count);
  std::vector<std::uint8_t> cell_excluded(excluded ? L.count : 0, 0);
  parallel_for(L.count, [&](std::size_t k) {
    std::array<Vec<N>, C> gr;
    corner_gradients<N>(L, u, L.cell_index(k), gr);
    std::array<Vec<N>, C> q;
    for (unsigned c = 0; c < C; ++c) {
      q[c] = corner_flux(P.anisotropy, b, gr[c], P.theta);
      if (excluded && P.theta > 0.0 && gr[c].norm() <= P.theta) cell_excluded[k] = 1;
    }
    for (unsigned c = 0; c < C; ++c)
      for (int a = 0; a < N; ++a) flux[k][c](a) = q[c](a) + q[c ^ (1u << a)](a);
  });
  // Pass 2: gather at nodes in a fixed corner order.
  std::vector<double> out(u.size(), 0.0);
  if (excluded) excluded->assign(u.size(), 0);
  parallel_for(u.size(), [&](std::size_t i) {
    const auto idx = g.unflatten(i);
    if (g.on_dirichlet_boundary(idx)) return;
    double s = 0.0;
    for (unsigned m = 0; m < C; ++m) {
      const auto cell = L.cell_of(idx, m);
      if (!cell) continue;
      if (excluded && !cell_excluded.empty() && cell_excluded[*cell]) (*excluded)[i] = 1;
      for (int a = 0; a < N; ++a) {
        const double sign = ((m >> a) & 1u) ? 1.0 : -1.0;
        s += sign * flux[*cell][m](a) / L.h[static_cast<std::size_t>(a)];
      }
    }
    out[i] = s / C - P.potential.derivative(u[i]);
  });
  return out;
}

inline double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double dot_extended(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> p(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) p[i] = a[i] * b[i];
  return pairwise_sum(p);
}

}  // namespace detail

/// Discrete energy including the constant offset of F.
template <int N>
double energy(const EnergyProblem<N>& P, const GridField<N>& field) {
  if (!(field.grid == P.grid)) throw UsageError("field grid does not match the problem grid");
  const auto parts = detail::energy_parts(P, P.profile_at(P.kappa_reg), field.values);
  double volume = 1.0;
  for (int a = 0; a < N; ++a) volume *= P.grid.upper[static_cast<std::size_t>(a)] - P.grid.lower[static_cast<std::size_t>(a)];
  return static_cast<double>(parts.gradient - parts.potential) - P.potential.offset() * volume;
}

/// dE/du per unit cell volume: the negative discrete Euler-Lagrange
/// residual -(div flux + F'(u)). Zero on Dirichlet nodes.
template <int N>
GridField<N> energy_gradient(const EnergyProblem<N>& P, const GridField<N>& field) {
  if (!(field.grid == P.grid)) throw UsageError("field grid does not match the problem grid");
  GridField<N> out(P.grid);
  out.values = detail::energy_gradient_impl(P, P.profile_at(P.kappa_reg), field.values);
  return out;
}

/// Sup norm of the discrete Euler-Lagrange residual over free nodes whose
/// cells avoid the excluded set.
template <int N>
double pde_residual(const EnergyProblem<N>& P, const GridField<N>& field) {
  if (!(field.grid == P.grid)) throw UsageError("field grid does not match the problem grid");
  std::vector<std::uint8_t> excluded;
  const auto r = detail::energy_gradient_impl(P, P.profile_at(P.kappa_reg), field.values, &excluded);
  double m = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (!excluded[i]) m = std::max(m, std::abs(r[i]));
  return m;
}

namespace detail {

struct StageResult {
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

// Integral over [0, A] of the quadratic through (x_k, y_k); falls back to
// the trapezoid on (x0, y0), (x2, y2) when the nodes are too close.
inline long double integrate_slope(double x0, double y0, double x1, double y1, double x2, double y2, double A) {
  const double span = std::max({std::abs(x1 - x0), std::abs(x2 - x0), std::abs(x2 - x1)});
  if (std::min({std::abs(x1 - x0), std::abs(x2 - x0), std::abs(x2 - x1)}) <= 1e-3 * span)
    return 0.5L * A * (static_cast<long double>(y0) + y2);
  // Lagrange basis integrals of (t - a)(t - b) over [0, A].
  auto basis = [&](double a, double b, double xk) {
    const long double I = A * A * A / 3.0L - (a + b) * A * A / 2.0L + static_cast<long double>(a) * b * A;
    return I / ((xk - a) * (xk - b));
  };
  return y0 * basis(x1, x2, x0) + y1 * basis(x0, x2, x1) + y2 * basis(x0, x1, x2);
}

// Polak-Ribiere+ conjugate gradient at fixed B. Each line search takes a
// secant step on the directional derivative (exact for quadratic energies)
// and enforces the Armijo condition on the energy, halving on failure.
template <int N>
StageResult cg_stage(const EnergyProblem<N>& P, const BProfile& b, std::vector<double>& u, double tol, int max_iter,
                     SolveReport& report) {
  constexpr double armijo = 1e-4;
  constexpr int max_backtracks = 60;
  const double vol = P.grid.cell_volume();
  double hmin = std::numeric_limits<double>::infinity();
  for (int a = 0; a < N; ++a) hmin = std::min(hmin, P.grid.spacing(a));

  struct Energy {
    long double value;
    long double scale;
  };
  auto total = [&](const std::vector<double>& v) {
    const auto parts = energy_parts(P, b, v);
    return Energy{parts.gradient - parts.potential, std::abs(parts.gradient) + std::abs(parts.potential)};
  };
  auto slope = [&](const std::vector<double>& grad, const std::vector<double>& d) {
    return vol * dot_extended(grad, d);
  };
  const std::size_t n = u.size();
  auto step_to = [&](std::vector<double>& out, double alpha, const std::vector<double>& d) {
    for (std::size_t i = 0; i < n; ++i) out[i] = u[i] + alpha * d[i];
  };

  std::vector<double> grad = energy_gradient_impl(P, b, u);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = -grad[i];
  Energy e = total(u);
  double alpha_prev = 0.0, slope_prev = 0.0;
  StageResult res;
  std::vector<double> trial(n);
  for (int it = 0;; ++it) {
    res.gradient_norm = sup_norm(grad);
    if (res.gradient_norm <= tol) {
      res.converged = true;
      return res;
    }
    if (it >= max_iter) return res;
    double phi0 = slope(grad, d);
    if (!(phi0 < 0.0)) {
      for (std::size_t i = 0; i < n; ++i) d[i] = -grad[i];
      phi0 = slope(grad, d);
    }
    double probe = alpha_prev > 0.0 ? alpha_prev * slope_prev / phi0 : hmin * hmin / (4.0 * N);
    if (!(probe > 0.0) || !std::isfinite(probe)) probe = hmin * hmin / (4.0 * N);

    // Probe the directional derivative, then jump to the secant root.
    step_to(trial, probe, d);
    double phi_probe = slope(energy_gradient_impl(P, b, trial), d);
    double alpha;
    if (std::isfinite(phi_probe) && phi_probe > phi0) alpha = std::min(probe * phi0 / (phi0 - phi_probe), 10.0 * probe);
    else alpha = phi_probe < 0.0 ? 4.0 * probe : 0.5 * probe;

    bool accepted = false;
    Energy e_new{};
    std::vector<double> grad_new;
    double decrease = 0.0;
    for (int k = 0; k <= max_backtracks; ++k) {
      step_to(trial, alpha, d);
      e_new = total(trial);
      grad_new = energy_gradient_impl(P, b, trial);
      const double phi_alpha = slope(grad_new, d);
      long double delta = e_new.value - e.value;
      const long double noise = 64.0L * std::numeric_limits<double>::epsilon() * std::max(e.scale, e_new.scale);
      bool integrated = false;
      if (std::abs(delta) <= noise && std::isfinite(phi_alpha)) {
        // Below roundoff of the total: integrate the directional derivative.
        delta = integrate_slope(0.0, phi0, probe, phi_probe, alpha, phi_alpha, alpha);
        integrated = true;
      }
      if (std::isfinite(static_cast<double>(delta)) && delta <= armijo * alpha * phi0) {
        accepted = true;
        decrease = static_cast<double>(delta);
        if (integrated) ++report.integrated_steps;
        break;
      }
      probe = alpha;
      phi_probe = phi_alpha;
      alpha *= 0.5;
    }
    if (!accepted)
      throw StagnationError("line search failed after 60 backtracks (gradient sup norm " +
                            std::to_string(res.gradient_norm) + ")");
    u.swap(trial);
    e = e_new;
    report.accepted_decrease.push_back(decrease);
    // Polak-Ribiere+; a negative beta restarts with steepest descent.
    long double num = 0.0L, den = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      num += static_cast<long double>(grad_new[i]) * (grad_new[i] - grad[i]);
      den += static_cast<long double>(grad[i]) * grad[i];
    }
    const double beta = den > 0.0L ? std::max(0.0, static_cast<double>(num / den)) : 0.0;
    for (std::size_t i = 0; i < n; ++i) d[i] = -grad_new[i] + beta * d[i];
    alpha_prev = alpha;
    slope_prev = phi0;
    grad.swap(grad_new);
    ++res.iterations;
  }
}

}  // namespace detail

/// Minimizes the discrete energy from field0 (Dirichlet values are kept).
/// Stops when the gradient sup norm is <= tol or after max_iter iterations
/// per continuation stage.
template <int N>
std::pair<GridField<N>, SolveReport> minimize(const EnergyProblem<N>& P, const GridField<N>& field0, double tol,
                                              int max_iter) {
  P.validate();
  if (!(field0.grid == P.grid)) throw UsageError("field grid does not match the problem grid");
  if (!(tol > 0.0) || max_iter < 0) throw UsageError("minimize needs tol > 0 and max_iter >= 0");
  std::vector<double> u = field0.values;
  SolveReport report;
  std::vector<double> stages = P.continuation;
  stages.push_back(P.kappa_reg);
  for (double kappa : stages) {
    const BProfile b = P.profile_at(kappa);
    const auto r = detail::cg_stage(P, b, u, tol, max_iter, report);
    report.iterations += r.iterations;
    const auto parts = detail::energy_parts(P, b, u);
    report.continuation.push_back({kappa, r.iterations, static_cast<double>(parts.gradient - parts.potential),
                                   r.gradient_norm, r.converged});
    report.converged = r.converged;
    report.gradient_norm = r.gradient_norm;
  }
  GridField<N> out(P.grid);
  out.values = std::move(u);
  report.final_energy = energy(P, out);
  report.pde_residual = pde_residual(P, out);
  return {std::move(out), std::move(report)};
}

}  // namespace aniso

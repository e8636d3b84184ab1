#pragma once

// The P-function P = b(H(grad u)) - c_u + F(u), the coefficient fields of
// its elliptic identity, and diagnostics built on them.
//
// With G = c_u - F, the identity reads
//   (d_ij P_i)_j - b_k P_k = R  on {grad u != 0},
// where a_ij = B'' H_i H_j + B' H_ij, d_ij = a_ij / H,
//   b_k = (B'''/B'') H^-2 (H_l P_l) H_k + [B'''/B'' + B''/B'] G' H^-1 H_k
//         + [B' B''' / B''^2 + 1] H^-2 H_kl P_l,
//   R   = B' B'' H_ij H_kl u_ik u_jl,
// and P_l = B'' H H_k u_kl - G' u_l. Everything is evaluated at grad u.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "aniso/anisotropy.hpp"
#include "aniso/bprofile.hpp"
#include "aniso/errors.hpp"
#include "aniso/grid.hpp"
#include "aniso/parallel.hpp"
#include "aniso/potential.hpp"
#include "aniso/stencil.hpp"

namespace aniso {

template <int N>
struct PointState {
  Vec<N> x = Vec<N>::Zero();
  double u = 0.0;
  Vec<N> grad_u = Vec<N>::Zero();
  Mat<N> hess_u = Mat<N>::Zero();
};

/// P at one point; c_u is the gauge level of the whole solution.
template <int N>
double p_value(const PointState<N>& s, const Anisotropy<N>& a, const BProfile& b, const Potential& f, double c_u) {
  return b.gauge(a.value(s.grad_u)) - c_u + f.value(s.u);
}

template <int N>
struct Coefficients {
  Mat<N> a = Mat<N>::Zero();
  Mat<N> d = Mat<N>::Zero();
  Vec<N> b = Vec<N>::Zero();
  double R = 0.0;
  double P = 0.0;
  /// Pointwise gradient of P from its closed form.
  Vec<N> grad_P = Vec<N>::Zero();
  /// a_ij u_ij + F'(u): residual of the Euler-Lagrange equation.
  double pde_residual = 0.0;
};

template <int N>
Coefficients<N> coefficients(const PointState<N>& s, const Anisotropy<N>& a, const BProfile& b, const Potential& f,
                             double c_u, double theta) {
  if (!(s.grad_u.norm() > theta)) throw ExcludedPointError("gradient below the degeneracy cutoff");
  const auto h = a.template jet<2>(s.grad_u);
  const BValues bv = b.eval(h.value);
  if (!(bv.b2 > 0.0)) throw AssumptionViolation("B'' must be positive off the degenerate set");
  const FValues fv = f.eval(s.u);
  const double g1 = -fv.df;  // G' = -F'
  const double H = h.value;

  Coefficients<N> c;
  c.a = bv.b2 * h.grad * h.grad.transpose() + bv.b1 * h.hess;
  c.d = c.a / H;
  c.grad_P = bv.b2 * H * (s.hess_u * h.grad) - g1 * s.grad_u;
  c.P = b.gauge(H) - c_u + fv.f;
  const double r32 = bv.b3 / bv.b2;
  c.b = (r32 / (H * H) * h.grad.dot(c.grad_P)) * h.grad + ((r32 + bv.b2 / bv.b1) * g1 / H) * h.grad +
        ((bv.b1 * bv.b3 / (bv.b2 * bv.b2) + 1.0) / (H * H)) * (h.hess * c.grad_P);
  c.R = bv.b1 * bv.b2 * (h.hess * s.hess_u * h.hess).cwiseProduct(s.hess_u).sum();
  c.pde_residual = c.a.cwiseProduct(s.hess_u).sum() + fv.df;
  return c;
}

struct PViolation {
  std::size_t index = 0;
  std::vector<double> x;
  double P = 0.0;
};

template <int N>
struct PReport {
  GridSpec<N> grid;
  std::vector<double> P;
  std::vector<double> R;
  /// (d_ij P_i)_j - b_k P_k - R; zero where excluded.
  std::vector<double> residual;
  /// 1 where |grad u| <= theta, the stencil touches such a point, or the
  /// point lies in the boundary collar.
  std::vector<std::uint8_t> excluded;
  double c_u = 0.0;
  double theta = 0.0;
  double tol_P = 0.0;
  double max_P = -std::numeric_limits<double>::infinity();
  double max_abs_residual = 0.0;
  double min_R = std::numeric_limits<double>::infinity();
  /// max |a_ij u_ij + F'(u)| over evaluated points.
  double max_pde_residual = 0.0;
  bool non_solution = false;
  std::size_t evaluated = 0;
  std::vector<PViolation> violations;
};

/// Default degeneracy cutoff: 1e-6 max |grad u|.
template <int N>
double default_theta(const std::vector<Vec<N>>& gradient) {
  double m = 0.0;
  for (const auto& g : gradient) m = std::max(m, g.norm());
  return 1e-6 * m;
}

namespace detail {

template <int N>
PointState<N> state_at(const GridField<N>& field, const FieldDerivatives<N>& der, std::size_t i) {
  return {field.grid.coordinate(i), field.values[i], der.gradient[i], der.hessian[i]};
}

template <int N>
std::pair<double, double> field_range(const GridField<N>& field) {
  const auto [lo, hi] = std::minmax_element(field.values.begin(), field.values.end());
  return {*lo, *hi};
}

/// Lowest value of F on [lo, hi] by dense scan.
inline double min_on_range(const Potential& f, double lo, double hi, int n = 4097) {
  double m = f.value(lo);
  for (int i = 1; i < n; ++i) m = std::min(m, f.value(lo + (hi - lo) * i / (n - 1)));
  return m;
}

// Marks points whose axis stencils reach a degenerate point.
template <int N>
std::vector<std::uint8_t> dilate_along_axes(const GridSpec<N>& g, const std::vector<std::uint8_t>& mask, int radius) {
  std::vector<std::uint8_t> out = mask;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const auto idx = g.unflatten(i);
    for (int a = 0; a < N; ++a) {
      const int n = g.points[static_cast<std::size_t>(a)];
      for (int k = -radius; k <= radius; ++k) {
        auto j = idx;
        int v = j[static_cast<std::size_t>(a)] + k;
        if (g.periodic(a)) v = ((v % n) + n) % n;
        else if (v < 0 || v >= n) continue;
        j[static_cast<std::size_t>(a)] = v;
        out[g.flatten(j)] = 1;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Residual of the P-function identity on a sampled solution.
///
/// The flux d_ij P_i is assembled pointwise and differentiated with the
/// stencil of `spec`; b_k uses the closed-form gradient of P. Points are
/// excluded when |grad u| <= theta, when a difference stencil reaches such a
/// point, or when they lie within 2 * order cells of a non-periodic face.
template <int N>
PReport<N> pine_residual(const GridField<N>& field, const Anisotropy<N>& a, const BProfile& b, const Potential& f,
                         double theta, const StencilSpec& spec) {
  if (!(theta > 0.0)) throw UsageError("pine_residual needs theta > 0");
  const auto& g = field.grid;
  const auto der = fd_derivatives(field, spec);
  const std::size_t n = field.size();
  const auto [lo, hi] = detail::field_range(field);

  PReport<N> rep;
  rep.grid = g;
  rep.c_u = f.gauge(lo, hi).c_u;
  rep.theta = theta;
  rep.P.assign(n, 0.0);
  rep.R.assign(n, 0.0);
  rep.residual.assign(n, 0.0);

  std::vector<std::uint8_t> degenerate(n, 0);
  std::array<std::vector<double>, N> flux;
  for (auto& q : flux) q.assign(n, 0.0);
  std::vector<double> bP(n, 0.0), pde(n, 0.0);

  parallel_for(n, [&](std::size_t i) {
    const auto s = detail::state_at(field, der, i);
    rep.P[i] = p_value(s, a, b, f, rep.c_u);
    if (!(s.grad_u.norm() > theta)) {
      degenerate[i] = 1;
      return;
    }
    const auto c = coefficients(s, a, b, f, rep.c_u, theta);
    const Vec<N> q = c.d.transpose() * c.grad_P;
    for (int j = 0; j < N; ++j) flux[static_cast<std::size_t>(j)][i] = q(j);
    bP[i] = c.b.dot(c.grad_P);
    rep.R[i] = c.R;
    pde[i] = c.pde_residual;
  });

  std::vector<double> div(n, 0.0);
  for (int j = 0; j < N; ++j) {
    const auto dj = fd_axis_derivative(g, flux[static_cast<std::size_t>(j)], j, spec.order);
    for (std::size_t i = 0; i < n; ++i) div[i] += dj[i];
  }

  // Stencils for first derivatives reach order/2 points in the interior.
  rep.excluded = detail::dilate_along_axes(g, degenerate, spec.order / 2);
  const int collar = 2 * spec.order;
  for (std::size_t i = 0; i < n; ++i) {
    if (g.cells_from_boundary(g.unflatten(i)) < collar) rep.excluded[i] = 1;
    if (degenerate[i] || rep.excluded[i]) continue;
    rep.residual[i] = div[i] - bP[i] - rep.R[i];
  }

  double fprime_scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rep.excluded[i]) continue;
    ++rep.evaluated;
    rep.max_P = std::max(rep.max_P, rep.P[i]);
    rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(rep.residual[i]));
    rep.min_R = std::min(rep.min_R, rep.R[i]);
    rep.max_pde_residual = std::max(rep.max_pde_residual, std::abs(pde[i]));
    fprime_scale = std::max(fprime_scale, std::abs(f.derivative(field.values[i])));
  }
  if (rep.evaluated == 0) throw EmptyReportError("every grid point was excluded");
  rep.non_solution = rep.max_pde_residual > 1e-3 * fprime_scale;
  return rep;
}

/// Upper bound P <= 0 away from the boundary collar.
///
/// c_u is sup F over `solution_range` when given (the range of the entire
/// solution a box field stands in for), else over the sampled range.
/// `tol_P` defaults to 1e-6 * max(1, c_u - min F) on the same range. P is
/// evaluated at every non-collar point, including points with vanishing
/// gradient.
template <int N>
PReport<N> gradient_bound_check(const GridField<N>& field, const Anisotropy<N>& a, const BProfile& b,
                                const Potential& f, int collar, std::optional<double> tol_P = std::nullopt,
                                const StencilSpec& spec = {},
                                std::optional<std::pair<double, double>> solution_range = std::nullopt) {
  if (collar < 0) throw UsageError("collar must be non-negative");
  const auto& g = field.grid;
  const auto der = fd_derivatives(field, spec);
  const std::size_t n = field.size();
  const auto [lo, hi] = solution_range.value_or(detail::field_range(field));
  if (!(lo <= hi)) throw UsageError("solution range must satisfy lo <= hi");

  PReport<N> rep;
  rep.grid = g;
  rep.c_u = f.gauge(lo, hi).c_u;
  rep.tol_P = tol_P.value_or(1e-6 * std::max(1.0, rep.c_u - detail::min_on_range(f, lo, hi)));
  rep.P.assign(n, 0.0);
  rep.R.assign(n, 0.0);
  rep.residual.assign(n, 0.0);
  rep.excluded.assign(n, 0);
  parallel_for(n, [&](std::size_t i) {
    rep.P[i] = p_value(detail::state_at(field, der, i), a, b, f, rep.c_u);
    if (g.cells_from_boundary(g.unflatten(i)) < collar) rep.excluded[i] = 1;
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (rep.excluded[i]) continue;
    ++rep.evaluated;
    rep.max_P = std::max(rep.max_P, rep.P[i]);
    if (rep.P[i] > rep.tol_P) {
      const Vec<N> x = g.coordinate(i);
      rep.violations.push_back({i, std::vector<double>(x.data(), x.data() + N), rep.P[i]});
    }
  }
  return rep;
}

template <int N>
struct FlatnessReport {
  GridSpec<N> grid;
  /// Frobenius norm of the block of Hess u orthogonal to grad u.
  std::vector<double> block_norm;
  std::vector<double> abs_P;
  std::vector<std::uint8_t> excluded;
  double max_block_norm = 0.0;
  double max_abs_P = 0.0;
  /// Largest block norm among points with |P| <= p_tol.
  double max_block_where_P_vanishes = 0.0;
  double p_tol = 0.0;
  std::size_t evaluated = 0;
};

/// Level-set flatness next to |P|, so that "P = 0 implies flat level sets"
/// can be tested on a sample.
template <int N>
FlatnessReport<N> rigidity_flatness(const GridField<N>& field, const Anisotropy<N>& a, const BProfile& b,
                                    const Potential& f, double theta, const StencilSpec& spec, double p_tol = 1e-8) {
  if (!(theta > 0.0)) throw UsageError("rigidity_flatness needs theta > 0");
  const auto& g = field.grid;
  const auto der = fd_derivatives(field, spec);
  const std::size_t n = field.size();
  const auto [lo, hi] = detail::field_range(field);
  const double c_u = f.gauge(lo, hi).c_u;

  FlatnessReport<N> rep;
  rep.grid = g;
  rep.p_tol = p_tol;
  rep.block_norm.assign(n, 0.0);
  rep.abs_P.assign(n, 0.0);
  rep.excluded.assign(n, 0);
  const int collar = 2 * spec.order;
  parallel_for(n, [&](std::size_t i) {
    const auto s = detail::state_at(field, der, i);
    rep.abs_P[i] = std::abs(p_value(s, a, b, f, c_u));
    if (!(s.grad_u.norm() > theta) || g.cells_from_boundary(g.unflatten(i)) < collar) {
      rep.excluded[i] = 1;
      return;
    }
    const Mat<N> q = householder_frame<N>(s.grad_u);
    const Mat<N> rotated = q.transpose() * s.hess_u * q;
    rep.block_norm[i] = rotated.topLeftCorner(N - 1, N - 1).norm();
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (rep.excluded[i]) continue;
    ++rep.evaluated;
    rep.max_block_norm = std::max(rep.max_block_norm, rep.block_norm[i]);
    rep.max_abs_P = std::max(rep.max_abs_P, rep.abs_P[i]);
    if (rep.abs_P[i] <= p_tol) rep.max_block_where_P_vanishes = std::max(rep.max_block_where_P_vanishes, rep.block_norm[i]);
  }
  return rep;
}

}  // namespace aniso

#pragma once

// Dual function H*(x) = sup_{|xi|=1} <xi, x> / H(xi), the Wulff shape
// {H* <= 1}, and the residual of travelling waves u0(omega.x - c t) for
// u_tt = div(H grad H(grad u)).

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "aniso/anisotropy.hpp"
#include "aniso/bprofile.hpp"
#include "aniso/errors.hpp"
#include "aniso/grid.hpp"
#include "aniso/parallel.hpp"
#include "aniso/potential.hpp"
#include "aniso/profile1d.hpp"
#include "aniso/sampling.hpp"
#include "aniso/solver.hpp"

namespace aniso {

template <int N>
struct DualValue {
  double value = 0.0;
  /// Unit direction attaining the supremum (zero for x = 0).
  Vec<N> direction = Vec<N>::Zero();
};

namespace detail {

inline constexpr double kGolden = 0.6180339887498949;

// Deterministic search directions: uniform angles in the plane, a
// Fibonacci lattice on S^2, low-discrepancy points otherwise.
template <int N>
std::vector<Vec<N>> dual_lattice(std::size_t count) {
  std::vector<Vec<N>> out;
  if constexpr (N == 1) {
    out = {Vec<N>::Constant(1.0), Vec<N>::Constant(-1.0)};
  } else if constexpr (N == 2) {
    for (std::size_t k = 0; k < count; ++k) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
      out.emplace_back(std::cos(t), std::sin(t));
    }
  } else if constexpr (N == 3) {
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(count);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden_angle * static_cast<double>(k);
      out.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
  } else {
    out = sphere_samples<N>(count, 0x5eed);
  }
  return out;
}

// Maximizes a scalar function on [lo, hi] by golden section.
template <class F>
double golden_max(F&& f, double lo, double hi, int steps) {
  double c = hi - kGolden * (hi - lo), d = lo + kGolden * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int k = 0; k < steps; ++k) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kGolden * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kGolden * (hi - lo);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

}  // namespace detail

/// Number of lattice directions used by dual_value.
template <int N>
constexpr std::size_t dual_lattice_size() {
  return N == 2 ? 720 : 4096;
}

/// Evaluates H*(x) by a lattice sweep followed by golden-section refinement
/// around the best direction.
template <int N>
DualValue<N> dual_value(const Anisotropy<N>& a, const Vec<N>& x) {
  DualValue<N> out;
  if (x.norm() == 0.0) return out;
  static const std::vector<Vec<N>> lattice = detail::dual_lattice<N>(dual_lattice_size<N>());
  auto ratio = [&](const Vec<N>& xi) { return xi.dot(x) / a.value(xi); };
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    const double v = ratio(lattice[k]);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  Vec<N> dir = lattice[best];
  if constexpr (N == 2) {
    const double step = 2.0 * std::numbers::pi / static_cast<double>(lattice.size());
    const double t0 = std::atan2(dir(1), dir(0));
    auto along = [&](double t) { return ratio(Vec<N>(std::cos(t), std::sin(t))); };
    // Golden section to resolution, then the 20 polishing steps.
    double t = detail::golden_max(along, t0 - step, t0 + step, 40);
    const double w = step * std::pow(detail::kGolden, 40);
    t = detail::golden_max(along, t - w, t + w, 20);
    dir = Vec<N>(std::cos(t), std::sin(t));
  } else if constexpr (N >= 3) {
    // Alternating golden searches along tangent great circles, shrinking
    // the bracket every round.
    double width = 4.0 * std::sqrt(4.0 * std::numbers::pi / static_cast<double>(lattice.size()));
    for (int round = 0; round < 20; ++round) {
      const Mat<N> Q = householder_frame<N>(dir);
      for (int axis = 0; axis < N - 1; ++axis) {
        const Vec<N> tangent = Q.col(axis);
        const Vec<N> base = dir;
        auto along = [&](double t) { return ratio(Vec<N>(std::cos(t) * base + std::sin(t) * tangent)); };
        const double t = detail::golden_max(along, -width, width, 30);
        dir = (std::cos(t) * base + std::sin(t) * tangent).normalized();
      }
      width *= 0.5;
    }
  }
  const double v = ratio(dir);
  if (v >= best_val) {
    out.value = v;
    out.direction = dir;
  } else {
    out.value = best_val;
    out.direction = lattice[best];
  }
  return out;
}

template <int N>
struct WulffShape {
  std::vector<Vec<N>> boundary;
  std::string anisotropy;
};

/// Boundary points r d of {H* <= 1} along `samples` lattice directions d,
/// with r = 1 / H*(d) by homogeneity of H*.
template <int N>
WulffShape<N> wulff_boundary(const Anisotropy<N>& a, std::size_t samples) {
  if (samples < 8) throw UsageError("wulff_boundary needs at least 8 samples");
  const auto dirs = detail::dual_lattice<N>(samples);
  WulffShape<N> shape;
  shape.anisotropy = a.name();
  shape.boundary.resize(dirs.size());
  parallel_for(dirs.size(), [&](std::size_t k) {
    const double r = 1.0 / dual_value(a, dirs[k]).value;
    shape.boundary[k] = r * dirs[k];
  });
  return shape;
}

/// Sup over interior nodes of |u_tt - div(H grad H(grad u))| for
/// u(x, t) = u0(omega.x - speed t), with u_tt by central differences over
/// t = -dt, 0, dt and the divergence from the energy-gradient stencil of the
/// solver (B = t^2/2, F = 0). `u0` must cover the projected window shifted
/// by |speed| dt.
template <int N>
double traveling_wave_residual(const Anisotropy<N>& a, const Vec<N>& omega, double speed,
                               const std::function<double(double)>& u0, const GridSpec<N>& grid, double dt) {
  if (std::abs(omega.norm() - 1.0) > 1e-12) throw UsageError("omega must be a unit vector");
  if (!(dt > 0.0)) throw UsageError("timestep must be positive");
  grid.validate();
  auto field_at = [&](double t) {
    GridField<N> f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = u0(omega.dot(grid.coordinate(i)) - speed * t);
    return f;
  };
  const GridField<N> now = field_at(0.0), before = field_at(-dt), after = field_at(dt);

  // An affine u0 makes both sides vanish identically.
  double smin = std::numeric_limits<double>::infinity(), smax = -smin;
  for (std::size_t i = 0; i < now.size(); ++i) {
    const double s = omega.dot(grid.coordinate(i));
    smin = std::min(smin, s);
    smax = std::max(smax, s);
  }
  {
    const int m = 64;
    const double hs = (smax - smin) / m;
    double curvature = 0.0, scale = 0.0;
    for (int k = 0; k <= m; ++k) scale = std::max(scale, std::abs(u0(smin + k * hs)));
    if (hs > 0.0)
      for (int k = 1; k < m; ++k)
        curvature = std::max(curvature, std::abs(u0(smin + (k - 1) * hs) - 2.0 * u0(smin + k * hs) + u0(smin + (k + 1) * hs)));
    if (curvature <= 1e-12 * std::max(1.0, scale))
      throw DegenerateInputError("u0 is affine on the sampled window");
  }

  EnergyProblem<N> problem{grid, a, BProfile::power(2.0), Potential::zero()};
  const auto neg_div = detail::energy_gradient_impl(problem, problem.profile, now.values);
  double m = 0.0;
  for (std::size_t i = 0; i < now.size(); ++i) {
    if (grid.on_dirichlet_boundary(grid.unflatten(i))) continue;
    const double utt = (after[i] - 2.0 * now[i] + before[i]) / (dt * dt);
    m = std::max(m, std::abs(utt + neg_div[i]));
  }
  return m;
}

/// Same, with u0 interpolated from a profile table.
template <int N>
double traveling_wave_residual(const Anisotropy<N>& a, const Vec<N>& omega, double speed,
                               const ProfileSolution<N>& profile, const GridSpec<N>& grid, double dt) {
  auto u0 = [&](double s) { return detail::table_interpolate(profile.s, profile.u0, profile.du0, profile.ddu0, s); };
  return traveling_wave_residual<N>(a, omega, speed, std::function<double(double)>(u0), grid, dt);
}

}  // namespace aniso

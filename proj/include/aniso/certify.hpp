#pragma once

// Executable checks of the structural hypotheses on (B, H).
//
// Every check is a sampled certificate: it evaluates the hypothesis on a
// deterministic low-discrepancy sample (seeded) and reports the extremal
// values with the sample points where they occur. Nothing here is a proof.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "aniso/anisotropy.hpp"
#include "aniso/bprofile.hpp"
#include "aniso/errors.hpp"
#include "aniso/linalg.hpp"
#include "aniso/richardson.hpp"
#include "aniso/sampling.hpp"

namespace aniso {

/// Hessian of B o H at xi != 0: B'' H_i H_j + B' H_ij.
template <int N>
Mat<N> hess_BH(const Anisotropy<N>& a, const BProfile& b, const Vec<N>& xi) {
  const auto h = a.template jet<2>(xi);
  const BValues v = b.eval(h.value);
  return v.b2 * h.grad * h.grad.transpose() + v.b1 * h.hess;
}

/// Jet of B o H to order 3 at xi != 0.
template <int N>
Jet<N, 3> jet_BH(const Anisotropy<N>& a, const BProfile& b, const Vec<N>& xi) {
  const auto h = a.template jet<3>(xi);
  const BValues v = b.eval(h.value);
  return h.compose(v.b0, v.b1, v.b2, v.b3);
}

// ---------------------------------------------------------------------------
// Euler identities of homogeneous functions

template <int N>
struct EulerIdentityReport {
  std::size_t samples = 0;
  /// max |H_i xi_i - H| / H
  double first = 0.0;
  /// max_j |H_ij xi_i|
  double second = 0.0;
  /// max_jk |H_ijk xi_i + H_jk| * |xi|
  double third = 0.0;
  Vec<N> worst_third = Vec<N>::Zero();
  bool passed = false;
};

/// Samples xi with |xi| in [2^-8, 2^8]. The second and third identities are
/// homogeneous of degree 0 and -1; the third is scaled by |xi| so one
/// tolerance covers every scale.
template <int N>
EulerIdentityReport<N> check_euler_identities(const Anisotropy<N>& a, std::size_t samples, std::uint64_t seed,
                                              double tol_first = 1e-9, double tol_second = 1e-9,
                                              double tol_third = 1e-8) {
  if (samples < 1) throw UsageError("check_euler_identities needs at least one sample");
  EulerIdentityReport<N> r;
  r.samples = samples;
  for (const auto& xi : shell_samples<N>(samples, seed, std::ldexp(1.0, -8), std::ldexp(1.0, 8))) {
    const auto h = eval_jets(a, xi);
    r.first = std::max(r.first, std::abs(h.grad.dot(xi) - h.value) / h.value);
    r.second = std::max(r.second, (h.hess.transpose() * xi).cwiseAbs().maxCoeff());
    Mat<N> contracted = h.hess;
    for (int i = 0; i < N; ++i) contracted += xi(i) * h.third[static_cast<std::size_t>(i)];
    const double t = contracted.cwiseAbs().maxCoeff() * xi.norm();
    if (t > r.third) {
      r.third = t;
      r.worst_third = xi;
    }
  }
  r.passed = r.first <= tol_first && r.second <= tol_second && r.third <= tol_third;
  return r;
}

// ---------------------------------------------------------------------------
// Convexity of B o H versus convexity of H on xi^perp

template <int N>
struct WxgenReport {
  std::size_t samples = 0;
  std::size_t mismatches = 0;
  /// min over samples of lambda_min(Hess(B o H))
  double min_full = std::numeric_limits<double>::infinity();
  /// min over samples of lambda_min(Hess H restricted to xi^perp)
  double min_restricted = std::numeric_limits<double>::infinity();
  std::vector<Vec<N>> mismatch_points;
  bool passed = false;
};

template <int N>
WxgenReport<N> check_wxgen_equivalence(const Anisotropy<N>& a, const BProfile& b, std::size_t samples,
                                       std::uint64_t seed) {
  if (samples < 1) throw UsageError("check_wxgen_equivalence needs at least one sample");
  WxgenReport<N> r;
  r.samples = samples;
  for (const auto& xi : sphere_samples<N>(samples, seed)) {
    const double full = min_eigenvalue(hess_BH(a, b, xi));
    const double restricted = min_eigenvalue(restrict_to_complement<N>(a.template jet<2>(xi).hess, xi));
    r.min_full = std::min(r.min_full, full);
    r.min_restricted = std::min(r.min_restricted, restricted);
    if ((full > 0.0) != (restricted > 0.0)) {
      ++r.mismatches;
      r.mismatch_points.push_back(xi);
    }
  }
  r.passed = r.mismatches == 0;
  return r;
}

// ---------------------------------------------------------------------------
// Behaviour of B o H at the origin

template <int N>
struct OriginLimits {
  /// lim_{t->0} B''(t) by extrapolation, with its error estimate.
  LimitEstimate b2_zero;
  bool b2_zero_positive = false;
  /// B''(0) recovered as H(e_1)^-2 * d^2_11 (B o H)(0).
  LimitEstimate b2_from_hessian;
  /// max_ij |d_i(H^2)(e_j) + d_i(H^2)(-e_j)|
  double parity_defect = 0.0;
  bool parity_ok = false;
  /// max over sampled directions u of |lim_t Hess(B o H)(t u) - B''(0) L|,
  /// with L_ij = H_i(e_j) H(e_j).
  double hessian_limit_defect = 0.0;
  bool hessian_limit_ok = false;
  Mat<N> limit_matrix = Mat<N>::Zero();
};

template <int N>
OriginLimits<N> origin_limits(const Anisotropy<N>& a, const BProfile& b, std::uint64_t seed = 3) {
  constexpr double t0 = 1.0 / 16.0;
  constexpr double ratio = 0.5;
  constexpr int count = 6;
  OriginLimits<N> r;
  r.b2_zero = richardson_limit_of([&](double t) { return b.eval(t).b2; }, t0, ratio, count);
  r.b2_zero_positive = std::isfinite(r.b2_zero.limit) && r.b2_zero.limit > 1e-12 &&
                       r.b2_zero.error <= 1e-6 * std::max(1.0, std::abs(r.b2_zero.limit));

  const Vec<N> e1 = Vec<N>::Unit(0);
  const double h_e1 = a.value(e1);
  r.b2_from_hessian = richardson_limit_of(
      [&](double t) {
        const auto h = a.template jet<1>(Vec<N>(t * e1));
        return b.eval(h.value).b1 * h.grad(0) / t;
      },
      t0, ratio, count);
  r.b2_from_hessian.limit /= h_e1 * h_e1;
  r.b2_from_hessian.error /= h_e1 * h_e1;

  double scale = 0.0;
  for (int j = 0; j < N; ++j) {
    const auto plus = a.template jet<1>(Vec<N>(Vec<N>::Unit(j)));
    const auto minus = a.template jet<1>(Vec<N>(-Vec<N>::Unit(j)));
    const Vec<N> dp = 2.0 * plus.value * plus.grad;
    const Vec<N> dm = 2.0 * minus.value * minus.grad;
    r.parity_defect = std::max(r.parity_defect, (dp + dm).cwiseAbs().maxCoeff());
    scale = std::max({scale, dp.cwiseAbs().maxCoeff(), dm.cwiseAbs().maxCoeff()});
    r.limit_matrix.col(j) = plus.value * plus.grad;
  }
  r.parity_ok = r.parity_defect <= 1e-10 * std::max(1.0, scale);

  const double b2 = r.b2_zero.limit;
  const Mat<N> target = b2 * r.limit_matrix;
  std::vector<Vec<N>> directions = sphere_samples<N>(8, seed);
  for (int i = 0; i < N; ++i) directions.push_back(Vec<N>::Unit(i));
  for (const auto& u : directions) {
    for (int i = 0; i < N; ++i)
      for (int j = i; j < N; ++j) {
        const auto lim = richardson_limit_of([&](double t) { return hess_BH(a, b, Vec<N>(t * u))(i, j); }, t0,
                                             ratio, count);
        r.hessian_limit_defect = std::max(r.hessian_limit_defect, std::abs(lim.limit - target(i, j)) + lim.error);
      }
  }
  const double tol = 1e-6 * std::max(1.0, std::isfinite(b2) ? std::abs(b2) * r.limit_matrix.cwiseAbs().maxCoeff() : 1.0);
  r.hessian_limit_ok = std::isfinite(r.hessian_limit_defect) && r.hessian_limit_defect <= tol;
  return r;
}

/// lim_{t->0} B'(H(t e_i)) H_i(t e_i), expected to vanish.
template <int N>
LimitEstimate flux_limit_at_origin(const Anisotropy<N>& a, const BProfile& b, int axis) {
  return richardson_limit_of(
      [&](double t) {
        const auto h = a.template jet<1>(Vec<N>(t * Vec<N>::Unit(axis)));
        return b.eval(h.value).b1 * h.grad(axis);
      },
      1.0 / 16.0, 0.5, 6);
}

/// Polarization of H^2 on the axes: M_ii = H^2(e_i),
/// M_ij = (H^2(e_i + e_j) - H^2(e_i - e_j)) / 4. Exact when H^2 is quadratic.
template <int N>
Mat<N> polarized_quadratic(const Anisotropy<N>& a) {
  auto sq = [&](const Vec<N>& x) {
    const double h = a.value(x);
    return h * h;
  };
  Mat<N> m;
  for (int i = 0; i < N; ++i) {
    m(i, i) = sq(Vec<N>::Unit(i));
    for (int j = i + 1; j < N; ++j) {
      const Vec<N> p = Vec<N>::Unit(i) + Vec<N>::Unit(j);
      const Vec<N> q = Vec<N>::Unit(i) - Vec<N>::Unit(j);
      m(i, j) = m(j, i) = 0.25 * (sq(p) - sq(q));
    }
  }
  return m;
}

template <int N>
struct QuadraticDefect {
  double defect = 0.0;
  Vec<N> witness = Vec<N>::Zero();
};

/// sup over unit vectors of |H^2(u) - <M u, u>|. Diagonal directions
/// (e_i +- e_j)/sqrt(2) are tried before the sample.
template <int N>
QuadraticDefect<N> quadratic_defect(const Anisotropy<N>& a, const Mat<N>& m, std::size_t samples, std::uint64_t seed) {
  std::vector<Vec<N>> points;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      points.push_back((Vec<N>::Unit(i) + Vec<N>::Unit(j)).normalized());
      points.push_back((Vec<N>::Unit(i) - Vec<N>::Unit(j)).normalized());
    }
  for (const auto& u : sphere_samples<N>(samples, seed)) points.push_back(u);
  QuadraticDefect<N> r;
  for (const auto& u : points) {
    const double h = a.value(u);
    const double d = std::abs(h * h - u.dot(m * u));
    if (d > r.defect) {
      r.defect = d;
      r.witness = u;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Assumptions (A) and (B)

template <int N>
struct AssumptionReport {
  bool holds_A = false;
  bool holds_B = false;
  double p = 2.0;
  double kappa = 0.0;
  /// inf lambda_min(Hess(B o H)(xi)) / (kappa + |xi|)^(p-2)
  double gamma_est = std::numeric_limits<double>::infinity();
  /// sup sum_ij |Hess(B o H)(xi)_ij| / (kappa + |xi|)^(p-2)
  double Gamma_est = 0.0;
  double p_star = 2.0;
  /// Radius of the ball used for (B).
  double K = 0.0;
  /// inf lambda_min(Hess(B o H)) over the sampled ball {|xi| <= K}.
  double gamma_B = std::numeric_limits<double>::infinity();
  /// sup of |D^3 (B o H)| on the annulus K/2 <= |xi| <= K.
  double third_bound = 0.0;
  double quadratic_defect = 0.0;
  OriginLimits<N> origin;
  Vec<N> witness_gamma = Vec<N>::Zero();
  Vec<N> witness_Gamma = Vec<N>::Zero();
  Vec<N> witness_gamma_B = Vec<N>::Zero();
};

/// Largest admissible ratio Gamma / gamma for the sampled (A) certificate.
inline constexpr double kMaxEllipticitySpread = 1e4;

template <int N>
AssumptionReport<N> certify_assumptions(const Anisotropy<N>& a, const BProfile& b, double K, std::size_t samples,
                                        std::uint64_t seed) {
  if (!(b.kappa() >= 0.0 && b.kappa() < 1.0)) throw UsageError("kappa must lie in [0, 1)");
  if (!(K > 0.0)) throw UsageError("certify_assumptions needs K > 0");
  if (samples < 1) throw UsageError("certify_assumptions needs at least one sample");

  AssumptionReport<N> r;
  r.p = b.has_growth_parameters() ? b.p() : 2.0;
  r.kappa = b.has_growth_parameters() ? b.kappa() : 0.0;
  r.K = K;

  // (A): ratios over all scales 2^-8 <= |xi| <= 2^8.
  for (const auto& xi : shell_samples<N>(samples, seed, std::ldexp(1.0, -8), std::ldexp(1.0, 8))) {
    const Mat<N> h = hess_BH(a, b, xi);
    const double w = std::pow(r.kappa + xi.norm(), r.p - 2.0);
    const double lo = min_eigenvalue(h) / w;
    const double hi = h.cwiseAbs().sum() / w;
    if (lo < r.gamma_est) {
      r.gamma_est = lo;
      r.witness_gamma = xi;
    }
    if (hi > r.Gamma_est || !std::isfinite(hi)) {
      r.Gamma_est = hi;
      r.witness_Gamma = xi;
    }
  }
  r.holds_A = r.gamma_est > 0.0 && std::isfinite(r.Gamma_est) && r.Gamma_est <= kMaxEllipticitySpread * r.gamma_est;

  // (B): C^2 extension at the origin, then ellipticity on the ball.
  r.origin = origin_limits(a, b, seed);
  const Mat<N> m = polarized_quadratic(a);
  const auto quad = quadratic_defect(a, m, samples, seed);
  r.quadratic_defect = quad.defect;
  const bool quadratic_ok = quad.defect <= 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff());

  const auto directions = sphere_samples<N>(samples, seed + 1);
  constexpr int radial_levels = 32;
  for (std::size_t k = 0; k < directions.size(); ++k) {
    const double radius = K * static_cast<double>(k % radial_levels + 1) / radial_levels;
    const Vec<N> xi = radius * directions[k];
    const double lo = min_eigenvalue(hess_BH(a, b, xi));
    if (lo < r.gamma_B) {
      r.gamma_B = lo;
      r.witness_gamma_B = xi;
    }
    if (radius >= 0.5 * K) {
      const auto j = jet_BH(a, b, xi);
      for (const auto& slice : j.third) r.third_bound = std::max(r.third_bound, slice.cwiseAbs().maxCoeff());
    }
  }
  r.holds_B = r.origin.b2_zero_positive && r.origin.parity_ok && r.origin.hessian_limit_ok && quadratic_ok &&
              r.gamma_B > 0.0 && std::isfinite(r.third_bound);

  r.p_star = (r.holds_A && r.kappa == 0.0) ? r.p : 2.0;
  return r;
}

// ---------------------------------------------------------------------------
// Gauge lower bound b(t) >= eps t^p*

struct EpsilonEstimate {
  double epsilon = 0.0;
  double p_star = 2.0;
  /// t where the ratio b(t) / t^p* is smallest.
  double witness = 0.0;
};

/// Smallest ratio b(t) / t^p* on (0, M_cap], with p* taken from the
/// certification of (b, a).
template <int N>
EpsilonEstimate estimate_epsilon(const BProfile& b, const Anisotropy<N>& a, double M_cap, std::size_t samples = 256,
                                 std::uint64_t seed = 0) {
  if (!(M_cap > 0.0)) throw UsageError("estimate_epsilon needs M_cap > 0");
  const auto cert = certify_assumptions(a, b, M_cap, samples, seed);
  EpsilonEstimate e;
  e.p_star = cert.p_star;
  auto ratio = [&](double t) { return b.gauge(t) / std::pow(t, e.p_star); };

  constexpr int linear = 2000, logarithmic = 2000;
  std::vector<double> ts;
  ts.reserve(linear + logarithmic);
  for (int i = 1; i <= linear; ++i) ts.push_back(M_cap * i / linear);
  for (int i = 0; i < logarithmic; ++i) ts.push_back(M_cap * std::pow(10.0, -8.0 + 8.0 * i / logarithmic));
  std::sort(ts.begin(), ts.end());

  std::size_t best = 0;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double v = ratio(ts[i]);
    if (v < best_ratio) {
      best_ratio = v;
      best = i;
    }
  }
  e.witness = ts[best];
  if (best > 0 && best + 1 < ts.size()) {
    double lo = ts[best - 1], hi = ts[best + 1];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100 && hi - lo > 1e-14 * hi; ++it) {
      const double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
      if (ratio(c) < ratio(d)) hi = d;
      else lo = c;
    }
    const double m = 0.5 * (lo + hi);
    if (ratio(m) < best_ratio) {
      best_ratio = ratio(m);
      e.witness = m;
    }
  }
  e.epsilon = best_ratio;
  return e;
}

// ---------------------------------------------------------------------------
// The quartic form H_ij H_kl c_ik c_jl

struct CorposValue {
  double value = 0.0;
  /// Frobenius norm of the block of c orthogonal to xi.
  double rigid_block_norm = 0.0;
};

template <int N>
CorposValue corpos_form(const Anisotropy<N>& a, const Vec<N>& xi, const Mat<N>& c) {
  const Mat<N> h = a.template jet<2>(xi).hess;
  CorposValue out;
  out.value = (h * c * h).cwiseProduct(c).sum();
  const Mat<N> q = householder_frame<N>(xi);
  const Mat<N> rotated = q.transpose() * c * q;
  out.rigid_block_norm = rotated.topLeftCorner(N - 1, N - 1).norm();
  return out;
}

// ---------------------------------------------------------------------------
// Sphere-graph anisotropies

template <int N>
struct SphereGraphReport {
  /// max |H(u / Theta(u)) - 1| over the sample: {H = 1} is the graph.
  double level_set_defect = 0.0;
  /// Sampled infimum of the principal curvatures of {H = 1}.
  double curvature_inf = std::numeric_limits<double>::infinity();
  Vec<N> curvature_witness = Vec<N>::Zero();
  double expected_c = 0.0;
  bool meets_expected = false;
  /// 1 / min Theta: radius bound of {H = 1}.
  double c_prime = 0.0;
  /// Sampled constant of Hess(B o H)(xi) >= c_star |xi|^(p-2) for B = t^p/p.
  double c_star = std::numeric_limits<double>::infinity();
  double p = 2.0;
};

template <int N>
struct SphereGraphBuild {
  Anisotropy<N> anisotropy;
  SphereGraphReport<N> report;
};

/// Builds H = |xi| Theta(xi/|xi|) and certifies its unit level set.
///
/// The second fundamental form on {H = 1} is H_ij v_i v_j / |grad H| for v
/// orthogonal to grad H; its smallest eigenvalue is the curvature lower bound.
template <int N>
SphereGraphBuild<N> build_sphere_graph(SphereFunction<N> theta, double expected_c, double p = 2.0,
                                       std::size_t samples = 2048, std::uint64_t seed = 7) {
  SphereGraphBuild<N> out{Anisotropy<N>::sphere_graph(std::move(theta)), {}};
  const auto& a = out.anisotropy;
  auto& r = out.report;
  r.expected_c = expected_c;
  r.p = p;
  const BProfile b = BProfile::power(p);
  double theta_min = std::numeric_limits<double>::infinity();
  std::vector<Vec<N>> directions = sphere_samples<N>(samples, seed);
  for (int i = 0; i < N; ++i) {
    directions.push_back(Vec<N>::Unit(i));
    directions.push_back(-Vec<N>::Unit(i));
  }
  for (const auto& u : directions) {
    const double th = a.theta()->value(u);
    theta_min = std::min(theta_min, th);
    const Vec<N> xi = u / th;
    const auto h = a.template jet<2>(xi);
    r.level_set_defect = std::max(r.level_set_defect, std::abs(h.value - 1.0));
    const double g = h.grad.norm();
    const double k = min_eigenvalue(restrict_to_complement<N>(h.hess, h.grad)) / g;
    if (k < r.curvature_inf) {
      r.curvature_inf = k;
      r.curvature_witness = xi;
    }
    r.c_star = std::min(r.c_star, min_eigenvalue(hess_BH(a, b, u)));
  }
  r.c_prime = 1.0 / theta_min;
  if (!(r.curvature_inf > 0.0)) throw CertificationError("sphere graph is not uniformly convex on the sample");
  r.meets_expected = r.curvature_inf >= expected_c;
  return out;
}

// ---------------------------------------------------------------------------
// Quadratic-form characterization under (B)

template <int N>
struct MatrixCharacterization {
  std::optional<Mat<N>> matrix;
  Mat<N> candidate = Mat<N>::Zero();
  double defect = 0.0;
  Vec<N> witness = Vec<N>::Zero();
  /// max |Hess(H^2/2)(e_1) - candidate|, a consistency check of the fit.
  double hessian_consistency = 0.0;
  OriginLimits<N> origin;
};

template <int N>
MatrixCharacterization<N> characterize_matrix_form(const Anisotropy<N>& a, const BProfile& b, double tol,
                                                   std::size_t samples = 1024, std::uint64_t seed = 11) {
  if (!(tol > 0.0)) throw UsageError("characterize_matrix_form needs tol > 0");
  MatrixCharacterization<N> r;
  r.candidate = polarized_quadratic(a);
  const auto quad = quadratic_defect(a, r.candidate, samples, seed);
  r.defect = quad.defect;
  r.witness = quad.witness;
  const auto h = a.template jet<2>(Vec<N>(Vec<N>::Unit(0)));
  const Mat<N> hess_half_sq = h.value * h.hess + h.grad * h.grad.transpose();
  r.hessian_consistency = (hess_half_sq - r.candidate).cwiseAbs().maxCoeff();
  r.origin = origin_limits(a, b, seed);
  if (r.defect <= tol && r.origin.parity_ok && r.origin.hessian_limit_ok && min_eigenvalue(r.candidate) > 0.0)
    r.matrix = r.candidate;
  return r;
}

}  // namespace aniso

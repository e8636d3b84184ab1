#pragma once

// Truncated multivariate Taylor arithmetic.
//
// A Jet<N, K> carries the value of a scalar function of N variables together
// with all of its partial derivatives up to order K (K <= 3). Arithmetic on
// jets propagates derivatives exactly by the chain and Leibniz rules, so a
// closed-form expression evaluated on seeded variables returns exact
// derivatives up to roundoff. Higher-order slots are filled only for the
// unique index tuples (i <= j <= k) and then mirrored, so the Hessian and the
// third-derivative array are symmetric bit for bit.

#include <array>
#include <cmath>
#include <functional>

#include "aniso/errors.hpp"
#include "aniso/linalg.hpp"

namespace aniso {

template <int N, int K = 3>
class Jet {
  static_assert(N >= 1 && N <= 4, "jets support 1 to 4 variables");
  static_assert(K >= 0 && K <= 3, "jets are truncated at order 3");

 public:
  static constexpr int dim = N;
  static constexpr int order = K;

  double value = 0.0;
  Vec<N> grad = Vec<N>::Zero();
  Mat<N> hess = Mat<N>::Zero();
  /// third[k](i, j) = d^3 f / dx_i dx_j dx_k
  std::array<Mat<N>, N> third = zero_third();

  Jet() = default;
  /*implicit*/ Jet(double c) : value(c) {}

  static Jet constant(double c) { return Jet(c); }

  static Jet variable(double x, int index) {
    Jet j(x);
    if constexpr (K >= 1) j.grad(index) = 1.0;
    return j;
  }

  double d3(int i, int j, int k) const { return third[static_cast<std::size_t>(k)](i, j); }

  /// Composition g(f) given g and its first three derivatives at f.value.
  Jet compose(double g0, double g1, double g2, double g3) const {
    Jet r(g0);
    if constexpr (K >= 1) r.grad = g1 * grad;
    if constexpr (K >= 2) {
      for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j) {
          const double v = g2 * grad(i) * grad(j) + g1 * hess(i, j);
          r.hess(i, j) = v;
          r.hess(j, i) = v;
        }
    }
    if constexpr (K >= 3) {
      for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j)
          for (int k = j; k < N; ++k) {
            const double v = g3 * grad(i) * grad(j) * grad(k) +
                             g2 * (hess(i, j) * grad(k) + hess(i, k) * grad(j) + hess(j, k) * grad(i)) +
                             g1 * d3(i, j, k);
            r.set3(i, j, k, v);
          }
    }
    return r;
  }

  Jet& operator+=(const Jet& o) {
    value += o.value;
    if constexpr (K >= 1) grad += o.grad;
    if constexpr (K >= 2) hess += o.hess;
    if constexpr (K >= 3)
      for (int k = 0; k < N; ++k) third[static_cast<std::size_t>(k)] += o.third[static_cast<std::size_t>(k)];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    value -= o.value;
    if constexpr (K >= 1) grad -= o.grad;
    if constexpr (K >= 2) hess -= o.hess;
    if constexpr (K >= 3)
      for (int k = 0; k < N; ++k) third[static_cast<std::size_t>(k)] -= o.third[static_cast<std::size_t>(k)];
    return *this;
  }
  Jet& operator*=(double s) {
    value *= s;
    if constexpr (K >= 1) grad *= s;
    if constexpr (K >= 2) hess *= s;
    if constexpr (K >= 3)
      for (auto& t : third) t *= s;
    return *this;
  }

  Jet operator-() const {
    Jet r = *this;
    r *= -1.0;
    return r;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double b) { a.value += b; return a; }
  friend Jet operator+(double a, Jet b) { b.value += a; return b; }
  friend Jet operator-(Jet a, double b) { a.value -= b; return a; }
  friend Jet operator-(double a, const Jet& b) { return -b + a; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a *= (1.0 / s); }

  friend Jet operator*(const Jet& f, const Jet& g) {
    Jet r(f.value * g.value);
    if constexpr (K >= 1) r.grad = f.grad * g.value + f.value * g.grad;
    if constexpr (K >= 2) {
      for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j) {
          const double v = f.hess(i, j) * g.value + f.grad(i) * g.grad(j) + f.grad(j) * g.grad(i) +
                           f.value * g.hess(i, j);
          r.hess(i, j) = v;
          r.hess(j, i) = v;
        }
    }
    if constexpr (K >= 3) {
      for (int i = 0; i < N; ++i)
        for (int j = i; j < N; ++j)
          for (int k = j; k < N; ++k) {
            const double v = f.d3(i, j, k) * g.value + f.hess(i, j) * g.grad(k) +
                             f.hess(i, k) * g.grad(j) + f.hess(j, k) * g.grad(i) +
                             f.grad(i) * g.hess(j, k) + f.grad(j) * g.hess(i, k) +
                             f.grad(k) * g.hess(i, j) + f.value * g.d3(i, j, k);
            r.set3(i, j, k, v);
          }
    }
    return r;
  }

  friend Jet operator/(const Jet& f, const Jet& g) { return f * reciprocal(g); }
  friend Jet operator/(double c, const Jet& g) { return reciprocal(g) * c; }

  friend Jet reciprocal(const Jet& g) {
    const double v = g.value;
    if (v == 0.0) throw DomainError("jet division by zero");
    const double r = 1.0 / v;
    return g.compose(r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r);
  }

  friend Jet sqrt(const Jet& f) {
    if (!(f.value > 0.0)) throw DomainError("jet sqrt requires a positive argument");
    const double s = std::sqrt(f.value);
    const double inv = 1.0 / f.value;
    return f.compose(s, 0.5 * s * inv, -0.25 * s * inv * inv, 0.375 * s * inv * inv * inv);
  }

  /// f^a for real a. At f = 0 a derivative whose falling-factorial
  /// coefficient vanishes is exactly zero; the others follow 0^(a-k).
  friend Jet pow(const Jet& f, double a) {
    if (f.value < 0.0) throw DomainError("jet pow requires a non-negative base");
    std::array<double, 4> g{};
    double falling = 1.0;
    for (int k = 0; k <= 3; ++k) {
      if (k > 0) falling *= (a - (k - 1));
      g[static_cast<std::size_t>(k)] = falling == 0.0 ? 0.0 : falling * std::pow(f.value, a - k);
    }
    return f.compose(g[0], g[1], g[2], g[3]);
  }

  friend Jet exp(const Jet& f) {
    const double e = std::exp(f.value);
    return f.compose(e, e, e, e);
  }

  friend Jet log(const Jet& f) {
    if (!(f.value > 0.0)) throw DomainError("jet log requires a positive argument");
    const double r = 1.0 / f.value;
    return f.compose(std::log(f.value), r, -r * r, 2.0 * r * r * r);
  }

  friend Jet sin(const Jet& f) {
    const double s = std::sin(f.value), c = std::cos(f.value);
    return f.compose(s, c, -s, -c);
  }

  friend Jet cos(const Jet& f) {
    const double s = std::sin(f.value), c = std::cos(f.value);
    return f.compose(c, -s, -c, s);
  }

  friend Jet tanh(const Jet& f) {
    const double t = std::tanh(f.value);
    const double s = 1.0 - t * t;
    return f.compose(t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0));
  }

 private:
  static std::array<Mat<N>, N> zero_third() {
    std::array<Mat<N>, N> t;
    for (auto& m : t) m.setZero();
    return t;
  }

  void set3(int i, int j, int k, double v) {
    auto& t = third;
    t[static_cast<std::size_t>(k)](i, j) = t[static_cast<std::size_t>(k)](j, i) = v;
    t[static_cast<std::size_t>(j)](i, k) = t[static_cast<std::size_t>(j)](k, i) = v;
    t[static_cast<std::size_t>(i)](j, k) = t[static_cast<std::size_t>(i)](k, j) = v;
  }
};

template <int N, int K = 3>
using JetVec = std::array<Jet<N, K>, static_cast<std::size_t>(N)>;

/// Seeds the coordinates of x as independent jet variables.
template <int N, int K = 3>
JetVec<N, K> seed_variables(const Vec<N>& x) {
  JetVec<N, K> vars;
  for (int i = 0; i < N; ++i) vars[static_cast<std::size_t>(i)] = Jet<N, K>::variable(x(i), i);
  return vars;
}

/// Exact derivatives to order K of a closed-form function at x.
///
/// `f` receives the seeded coordinates as a JetVec and must be written in
/// terms of jet arithmetic. Domain violations surface as DomainError from
/// the offending primitive (e.g. sqrt of zero for a norm at the origin).
template <int N, int K = 3, class Function>
Jet<N, K> taylor_jet(Function&& f, const Vec<N>& x) {
  return std::invoke(std::forward<Function>(f), seed_variables<N, K>(x));
}

/// Univariate convenience: the jet of t -> f(t) at t.
template <int K = 3, class Function>
Jet<1, K> taylor_jet_1d(Function&& f, double t) {
  return std::invoke(std::forward<Function>(f), Jet<1, K>::variable(t, 0));
}

/// Sum of squares of the seeded coordinates, a common building block.
template <int N, int K>
Jet<N, K> squared_norm(const JetVec<N, K>& x) {
  Jet<N, K> s = x[0] * x[0];
  for (int i = 1; i < N; ++i) s += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
  return s;
}

}  // namespace aniso

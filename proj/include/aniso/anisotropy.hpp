#pragma once

// Degree-1 positively homogeneous anisotropies H and their jets.
//
// Three families are supported: the Euclidean norm, quadratic forms
// H(xi) = sqrt(<M xi, xi>) with M symmetric positive definite, and
// sphere graphs H(xi) = |xi| * Theta(xi / |xi|) for an analytic Theta > 0.
// H is extended by H(0) = 0; jets at the origin raise DomainError.

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "aniso/errors.hpp"
#include "aniso/jet.hpp"
#include "aniso/linalg.hpp"
#include "aniso/sampling.hpp"

namespace aniso {

/// Analytic positive function on the unit sphere, evaluable on jets of
/// orders 0 to 3. Only its values on the sphere matter: H composes it with
/// xi / |xi|, which is homogeneous of degree 0.
template <int N>
class SphereFunction {
 public:
  /// `f` is a generic callable taking `const JetVec<N, K>&` and returning
  /// `Jet<N, K>` for every K in 0..3.
  template <class F>
  explicit SphereFunction(F f, std::string name = "custom")
      : name_(std::move(name)),
        k0_([f](const JetVec<N, 0>& u) { return Jet<N, 0>(f(u)); }),
        k1_([f](const JetVec<N, 1>& u) { return Jet<N, 1>(f(u)); }),
        k2_([f](const JetVec<N, 2>& u) { return Jet<N, 2>(f(u)); }),
        k3_([f](const JetVec<N, 3>& u) { return Jet<N, 3>(f(u)); }) {}

  template <int K>
  Jet<N, K> operator()(const JetVec<N, K>& u) const {
    if constexpr (K == 0) return k0_(u);
    else if constexpr (K == 1) return k1_(u);
    else if constexpr (K == 2) return k2_(u);
    else return k3_(u);
  }

  double value(const Vec<N>& unit) const { return k0_(seed_variables<N, 0>(unit)).value; }

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::function<Jet<N, 0>(const JetVec<N, 0>&)> k0_;
  std::function<Jet<N, 1>(const JetVec<N, 1>&)> k1_;
  std::function<Jet<N, 2>(const JetVec<N, 2>&)> k2_;
  std::function<Jet<N, 3>(const JetVec<N, 3>&)> k3_;
};

/// Theta = 1: the unit sphere.
template <int N>
SphereFunction<N> theta_constant() {
  return SphereFunction<N>([](const auto& u) { return std::decay_t<decltype(u[0])>(1.0); }, "constant");
}

/// Theta(u) = sqrt(sum_i w_i u_i^2), which makes H the quadratic form diag(w).
template <int N>
SphereFunction<N> theta_ellipse(const Vec<N>& weights) {
  return SphereFunction<N>(
      [weights](const auto& u) {
        auto q = weights(0) * (u[0] * u[0]);
        for (int i = 1; i < N; ++i) q += weights(i) * (u[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)]);
        return sqrt(q);
      },
      "ellipse");
}

/// Theta(u) = 1 + A u_1, so H(xi) = |xi| + A xi_1; not even when A != 0.
template <int N>
SphereFunction<N> theta_cosine_bump(double amplitude) {
  return SphereFunction<N>([amplitude](const auto& u) { return 1.0 + amplitude * u[0]; }, "cosine-bump");
}

/// Theta(u) = (sum_i u_i^4)^(1/4): the l4 unit sphere.
template <int N>
SphereFunction<N> theta_l4() {
  return SphereFunction<N>(
      [](const auto& u) {
        auto s = (u[0] * u[0]) * (u[0] * u[0]);
        for (int i = 1; i < N; ++i) {
          const auto& c = u[static_cast<std::size_t>(i)];
          s += (c * c) * (c * c);
        }
        return pow(s, 0.25);
      },
      "l4");
}

enum class AnisotropyFamily { euclidean, matrix, sphere_graph };

template <int N>
class Anisotropy {
 public:
  static Anisotropy euclidean() {
    Anisotropy a;
    a.family_ = AnisotropyFamily::euclidean;
    a.name_ = "euclidean";
    return a;
  }

  static Anisotropy matrix(const Mat<N>& m) {
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-14 * m.cwiseAbs().maxCoeff())
      throw ConstructionError("anisotropy matrix must be symmetric");
    if (!(min_eigenvalue(m) > 0.0)) throw ConstructionError("anisotropy matrix must be positive definite");
    Anisotropy a;
    a.family_ = AnisotropyFamily::matrix;
    a.name_ = "matrix";
    a.m_ = m;
    return a;
  }

  /// Sphere graph from Theta; Theta is checked positive on a dense sample.
  static Anisotropy sphere_graph(SphereFunction<N> theta, std::size_t check_samples = 4096) {
    auto check = [&](const Vec<N>& u) {
      const double v = theta.value(u);
      if (!(v > 0.0) || !std::isfinite(v)) throw ConstructionError("sphere graph needs Theta > 0 on the sphere");
    };
    for (const auto& u : sphere_samples<N>(check_samples, 0x5eed)) check(u);
    for (int i = 0; i < N; ++i) {
      check(Vec<N>::Unit(i));
      check(-Vec<N>::Unit(i));
    }
    Anisotropy a;
    a.family_ = AnisotropyFamily::sphere_graph;
    a.name_ = "sphere-graph(" + theta.name() + ")";
    a.theta_ = std::make_shared<const SphereFunction<N>>(std::move(theta));
    return a;
  }

  AnisotropyFamily family() const { return family_; }
  const std::string& name() const { return name_; }
  const Mat<N>& matrix_form() const { return m_; }
  const SphereFunction<N>* theta() const { return theta_.get(); }

  /// H(xi), with H(0) = 0.
  double value(const Vec<N>& xi) const {
    switch (family_) {
      case AnisotropyFamily::euclidean:
        return xi.norm();
      case AnisotropyFamily::matrix:
        return std::sqrt(std::max(0.0, xi.dot(m_ * xi)));
      case AnisotropyFamily::sphere_graph: {
        const double r = xi.norm();
        if (r == 0.0) return 0.0;
        return r * theta_->value(xi / r);
      }
    }
    return 0.0;
  }

  /// H and its derivatives to order K at xi != 0.
  template <int K = 3>
  Jet<N, K> jet(const Vec<N>& xi) const {
    if (!(xi.squaredNorm() > 0.0)) throw DomainError("anisotropy jets are undefined at the origin");
    const auto x = seed_variables<N, K>(xi);
    switch (family_) {
      case AnisotropyFamily::euclidean:
        return sqrt(squared_norm<N, K>(x));
      case AnisotropyFamily::matrix: {
        Jet<N, K> q(0.0);
        for (int i = 0; i < N; ++i) {
          q += m_(i, i) * (x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)]);
          for (int j = i + 1; j < N; ++j)
            q += (2.0 * m_(i, j)) * (x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)]);
        }
        return sqrt(q);
      }
      case AnisotropyFamily::sphere_graph: {
        const Jet<N, K> r = sqrt(squared_norm<N, K>(x));
        const Jet<N, K> inv = reciprocal(r);
        JetVec<N, K> u;
        for (int i = 0; i < N; ++i) u[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] * inv;
        return r * (*theta_).template operator()<K>(u);
      }
    }
    throw DomainError("unknown anisotropy family");
  }

  /// Value and gradient, with closed forms for the quadratic families.
  std::pair<double, Vec<N>> value_gradient(const Vec<N>& xi) const {
    switch (family_) {
      case AnisotropyFamily::euclidean: {
        const double h = xi.norm();
        if (h == 0.0) throw DomainError("anisotropy gradient is undefined at the origin");
        return {h, xi / h};
      }
      case AnisotropyFamily::matrix: {
        const Vec<N> mx = m_ * xi;
        const double h = std::sqrt(std::max(0.0, xi.dot(mx)));
        if (h == 0.0) throw DomainError("anisotropy gradient is undefined at the origin");
        return {h, mx / h};
      }
      case AnisotropyFamily::sphere_graph: {
        const auto j = jet<1>(xi);
        return {j.value, j.grad};
      }
    }
    throw DomainError("unknown anisotropy family");
  }

 private:
  AnisotropyFamily family_ = AnisotropyFamily::euclidean;
  std::string name_;
  Mat<N> m_ = Mat<N>::Identity();
  std::shared_ptr<const SphereFunction<N>> theta_;
};

/// H and its derivatives to order 3 at xi != 0.
template <int N>
Jet<N, 3> eval_jets(const Anisotropy<N>& a, const Vec<N>& xi) {
  return a.template jet<3>(xi);
}

}  // namespace aniso

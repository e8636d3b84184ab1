#pragma once

// Scalar profiles B of the gradient energy density B(H(grad u)).

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "aniso/errors.hpp"
#include "aniso/jet.hpp"

namespace aniso {

/// B and its first three derivatives at one point.
struct BValues {
  double b0 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;
};

enum class BFamily { power, regularized_power, minimal_surface, custom };

class BProfile {
 public:
  using CustomFn = std::function<Jet<1, 3>(const Jet<1, 3>&)>;

  /// B(t) = t^p / p.
  static BProfile power(double p) {
    if (!(p > 1.0)) throw UsageError("power profile needs p > 1");
    BProfile b;
    b.family_ = BFamily::power;
    b.p_ = p;
    b.name_ = "power";
    return b;
  }

  /// B(t) = ((kappa^2 + t^2)^(p/2) - kappa^p) / p with kappa in [0, 1).
  static BProfile regularized_power(double p, double kappa) {
    if (!(p > 1.0)) throw UsageError("regularized power profile needs p > 1");
    if (!(kappa >= 0.0 && kappa < 1.0)) throw UsageError("regularized power profile needs kappa in [0, 1)");
    BProfile b;
    b.family_ = BFamily::regularized_power;
    b.p_ = p;
    b.kappa_ = kappa;
    b.name_ = "regularized-power";
    return b;
  }

  /// B(t) = sqrt(1 + t^2) - 1.
  static BProfile minimal_surface() {
    BProfile b;
    b.family_ = BFamily::minimal_surface;
    b.name_ = "minimal-surface";
    return b;
  }

  /// User profile given on jets. `p` and `kappa` declare growth parameters
  /// for the power-type assumption when known.
  static BProfile custom(CustomFn f, std::string name = "custom", std::optional<double> p = std::nullopt,
                         double kappa = 0.0) {
    BProfile b;
    b.family_ = BFamily::custom;
    b.custom_ = std::move(f);
    b.name_ = std::move(name);
    b.declared_p_ = p;
    b.p_ = p.value_or(2.0);
    b.kappa_ = kappa;
    return b;
  }

  BFamily family() const { return family_; }
  const std::string& name() const { return name_; }
  double p() const { return p_; }
  double kappa() const { return kappa_; }

  /// True when the family comes with growth parameters (p, kappa).
  bool has_growth_parameters() const {
    return family_ == BFamily::power || family_ == BFamily::regularized_power || declared_p_.has_value();
  }

  BValues eval(double t) const {
    if (t < 0.0) throw DomainError("B is evaluated on t >= 0 only");
    switch (family_) {
      case BFamily::power:
        return power_values(t, p_);
      case BFamily::regularized_power: {
        if (kappa_ == 0.0) return power_values(t, p_);
        const double k2 = kappa_ * kappa_;
        const double s = k2 + t * t;
        const double g = k2 + (p_ - 1.0) * t * t;
        BValues v;
        v.b0 = std::pow(kappa_, p_) * std::expm1(0.5 * p_ * std::log1p(t * t / k2)) / p_;
        v.b1 = t * std::pow(s, 0.5 * p_ - 1.0);
        v.b2 = std::pow(s, 0.5 * p_ - 2.0) * g;
        v.b3 = t * std::pow(s, 0.5 * p_ - 3.0) * ((p_ - 4.0) * g + 2.0 * (p_ - 1.0) * s);
        return v;
      }
      case BFamily::minimal_surface: {
        const double s = std::sqrt(1.0 + t * t);
        BValues v;
        v.b0 = t * t / (1.0 + s);
        v.b1 = t / s;
        v.b2 = 1.0 / (s * s * s);
        v.b3 = -3.0 * t / (s * s * s * s * s);
        return v;
      }
      case BFamily::custom: {
        const auto j = custom_(Jet<1, 3>::variable(t, 0));
        return {j.value, j.grad(0), j.hess(0, 0), j.d3(0, 0, 0)};
      }
    }
    return {};
  }

  double value(double t) const { return eval(t).b0; }
  double first(double t) const { return eval(t).b1; }
  double second(double t) const { return eval(t).b2; }

  /// Gauge b(t) = B'(t) t - B(t).
  double gauge(double t) const {
    if (t < 0.0) throw DomainError("gauge is evaluated on t >= 0 only");
    if (family_ == BFamily::minimal_surface) {
      const double s = std::sqrt(1.0 + t * t);
      return t * t / (s * (1.0 + s));
    }
    const BValues v = eval(t);
    return v.b1 * t - v.b0;
  }

  /// b'(t) = B''(t) t.
  double gauge_derivative(double t) const { return eval(t).b2 * t; }

 private:
  static BValues power_values(double t, double p) {
    // Derivatives of t^p / p; a term with a vanishing falling-factorial
    // coefficient is exactly zero, so p = 2 gives B''' = 0 at t = 0.
    BValues v;
    v.b0 = std::pow(t, p) / p;
    v.b1 = std::pow(t, p - 1.0);
    v.b2 = (p - 1.0) * std::pow(t, p - 2.0);
    const double c3 = (p - 1.0) * (p - 2.0);
    v.b3 = c3 == 0.0 ? 0.0 : c3 * std::pow(t, p - 3.0);
    return v;
  }

  BFamily family_ = BFamily::power;
  std::string name_;
  double p_ = 2.0;
  double kappa_ = 0.0;
  std::optional<double> declared_p_;
  CustomFn custom_;
};

/// b(t) = B'(t) t - B(t), with b(0) = 0.
inline double gauge_b(const BProfile& b, double t) { return b.gauge(t); }

}  // namespace aniso

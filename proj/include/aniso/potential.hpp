#pragma once

// Nonlinearities F(u) with F' and F'', and the gauge c_u = sup F over a range.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "aniso/errors.hpp"

namespace aniso {

struct FValues {
  double f = 0.0;
  double df = 0.0;
  double ddf = 0.0;
};

struct GaugeLevel {
  double c_u = 0.0;
  /// A point of the range where the supremum is attained.
  double argmax = 0.0;
};

class Potential {
 public:
  using Fn = std::function<FValues(double)>;

  Potential() : Potential(zero()) {}
  Potential(Fn fn, std::string name) : fn_(std::move(fn)), name_(std::move(name)) {}

  /// F(u) = -(1 - u^2)^2 / 4, so F'(u) = u (1 - u^2).
  static Potential allen_cahn() {
    return Potential(
        [](double u) {
          const double w = 1.0 - u * u;
          return FValues{-0.25 * w * w, u * w, 1.0 - 3.0 * u * u};
        },
        "allen-cahn");
  }

  static Potential zero() {
    return Potential([](double) { return FValues{}; }, "zero");
  }

  /// F(u) = sum_k coeffs[k] u^k.
  static Potential polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) throw UsageError("polynomial potential needs at least one coefficient");
    return Potential(
        [c = std::move(coeffs)](double u) {
          // Horner for F, F', F'' together.
          FValues v;
          for (std::size_t k = c.size(); k-- > 0;) {
            v.ddf = v.ddf * u + 2.0 * v.df;
            v.df = v.df * u + v.f;
            v.f = v.f * u + c[k];
          }
          return v;
        },
        "custom-poly");
  }

  /// The same potential plus a constant. The constant is carried separately
  /// so that everything depending on F' only is bitwise unchanged.
  Potential shifted(double constant) const {
    Potential p = *this;
    p.offset_ += constant;
    return p;
  }

  double offset() const { return offset_; }
  const std::string& name() const { return name_; }

  /// F, F', F'' at u, including the offset in F.
  FValues eval(double u) const {
    FValues v = fn_(u);
    v.f += offset_;
    return v;
  }

  /// F without the offset.
  double shape_value(double u) const { return fn_(u).f; }
  double value(double u) const { return fn_(u).f + offset_; }
  double derivative(double u) const { return fn_(u).df; }

  /// c_u = sup F on [lo, hi] by a dense scan refined with golden sections.
  GaugeLevel gauge(double lo, double hi, int scan_points = 4097) const {
    if (hi < lo) throw UsageError("gauge range is empty");
    if (hi == lo) return {value(lo), lo};
    const int n = std::max(scan_points, 3);
    int best = 0;
    double best_f = shape_value(lo);
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      xs[static_cast<std::size_t>(i)] = i == n - 1 ? hi : lo + (hi - lo) * i / (n - 1);
      const double f = shape_value(xs[static_cast<std::size_t>(i)]);
      if (f > best_f) {
        best_f = f;
        best = i;
      }
    }
    double arg = xs[static_cast<std::size_t>(best)];
    if (best > 0 && best < n - 1) {
      double a = xs[static_cast<std::size_t>(best - 1)], b = xs[static_cast<std::size_t>(best + 1)];
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      double c = b - g * (b - a), d = a + g * (b - a);
      double fc = shape_value(c), fd = shape_value(d);
      for (int it = 0; it < 80 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        if (fc > fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - g * (b - a);
          fc = shape_value(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + g * (b - a);
          fd = shape_value(d);
        }
      }
      const double m = 0.5 * (a + b);
      const double fm = shape_value(m);
      if (fm > best_f) {
        best_f = fm;
        arg = m;
      }
    }
    return {best_f + offset_, arg};
  }

 private:
  Fn fn_;
  std::string name_;
  double offset_ = 0.0;
};

}  // namespace aniso

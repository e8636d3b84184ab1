#pragma once

// Dormand-Prince 5(4) integration of small first-order systems.

#include <algorithm>
#include <array>
#include <initializer_list>
#include <utility>
#include <cmath>
#include <vector>

#include "aniso/errors.hpp"

namespace aniso {

template <std::size_t M>
using OdeVector = std::array<double, M>;

struct OdeOptions {
  double tol = 1e-10;
  /// Largest step; 0 means unbounded.
  double max_step = 0.0;
  int max_steps = 1000000;
};

/// Integrates y' = rhs(s, y) from s0 to each of `targets` in order and
/// returns the state at every target. Targets must be monotone in the
/// direction of integration. The error per step is measured as
/// max_i |err_i| / (tol + tol * max(|y_i|, |y_new_i|)).
template <std::size_t M, class Rhs>
std::vector<OdeVector<M>> dormand_prince(Rhs&& rhs, double s0, OdeVector<M> y, const std::vector<double>& targets,
                                         const OdeOptions& opt = {}) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  std::vector<OdeVector<M>> out;
  out.reserve(targets.size());
  double s = s0;
  double h = 0.0;
  int steps = 0;
  auto combine = [&](const OdeVector<M>& base, double step, std::initializer_list<std::pair<double, const OdeVector<M>*>> terms) {
    OdeVector<M> r = base;
    for (const auto& [c, k] : terms)
      for (std::size_t i = 0; i < M; ++i) r[i] += step * c * (*k)[i];
    return r;
  };

  for (const double target : targets) {
    const double span = target - s;
    if (span == 0.0) {
      out.push_back(y);
      continue;
    }
    const double dir = span > 0 ? 1.0 : -1.0;
    if (h == 0.0 || h * dir < 0.0) h = dir * std::min(std::abs(span), opt.max_step > 0 ? opt.max_step : std::abs(span));
    while ((target - s) * dir > 0.0) {
      if (++steps > opt.max_steps) throw StagnationError("ODE integration exceeded the step budget");
      double step = h;
      if (opt.max_step > 0.0) step = dir * std::min(std::abs(step), opt.max_step);
      bool last = false;
      if ((s + step - target) * dir >= 0.0) {
        step = target - s;
        last = true;
      }
      const auto k1 = rhs(s, y);
      const auto k2 = rhs(s + c2 * step, combine(y, step, {{a21, &k1}}));
      const auto k3 = rhs(s + c3 * step, combine(y, step, {{a31, &k1}, {a32, &k2}}));
      const auto k4 = rhs(s + c4 * step, combine(y, step, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
      const auto k5 = rhs(s + c5 * step, combine(y, step, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
      const auto k6 = rhs(s + step, combine(y, step, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
      const auto yn = combine(y, step, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
      const auto k7 = rhs(s + step, yn);
      double err = 0.0;
      for (std::size_t i = 0; i < M; ++i) {
        const double e = step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc = opt.tol + opt.tol * std::max(std::abs(y[i]), std::abs(yn[i]));
        err = std::max(err, std::abs(e) / sc);
      }
      if (!std::isfinite(err)) throw StagnationError("ODE integration produced a non-finite state");
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (err <= 1.0) {
        s = last ? target : s + step;
        y = yn;
        if (!last) h = step * factor;
        else if (factor < 1.0) h *= factor;
      } else {
        h = step * factor;
        if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(s)))
          throw StagnationError("ODE step size underflow");
      }
    }
    out.push_back(y);
  }
  return out;
}

}  // namespace aniso

#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "aniso/errors.hpp"

namespace aniso {

struct LimitEstimate {
  double limit = 0.0;
  double error = 0.0;
};

namespace detail {
// Neville evaluation at h = 0 of the interpolating polynomial through
// samples [first, last).
inline double neville_at_zero(const std::vector<std::pair<double, double>>& s, std::size_t first, std::size_t last) {
  std::vector<double> p;
  for (std::size_t i = first; i < last; ++i) p.push_back(s[i].second);
  const std::size_t n = p.size();
  for (std::size_t m = 1; m < n; ++m)
    for (std::size_t i = 0; i + m < n; ++i) {
      const double hi = s[first + i].first, hj = s[first + i + m].first;
      p[i] = (hj * p[i] - hi * p[i + 1]) / (hj - hi);
    }
  return p[0];
}
}  // namespace detail

/// Polynomial extrapolation to step 0 from (step, value) samples.
///
/// The error is the gap between the extrapolant through all samples and the
/// one that drops the coarsest sample.
inline LimitEstimate richardson_limit(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 3) throw UsageError("richardson_limit needs at least 3 samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i].first > 0.0)) throw UsageError("richardson_limit steps must be positive");
    if (i > 0 && !(samples[i].first < samples[i - 1].first))
      throw UsageError("richardson_limit steps must decrease strictly");
  }
  LimitEstimate out;
  out.limit = detail::neville_at_zero(samples, 0, samples.size());
  out.error = std::abs(out.limit - detail::neville_at_zero(samples, 1, samples.size()));
  return out;
}

/// Samples f on steps h0, h0*ratio, ... and extrapolates to 0.
template <class Function>
LimitEstimate richardson_limit_of(Function&& f, double h0, double ratio, int count) {
  std::vector<std::pair<double, double>> s;
  double h = h0;
  for (int i = 0; i < count; ++i, h *= ratio) s.emplace_back(h, f(h));
  return richardson_limit(s);
}

}  // namespace aniso

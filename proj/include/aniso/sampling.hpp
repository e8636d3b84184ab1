#pragma once

// Deterministic low-discrepancy samples of directions and scales.
//
// Points come from the additive recurrence x_k = frac(shift + k * alpha)
// with alpha built from the generalized golden ratio of the dimension; the
// seed only fixes the shift, so equal seeds give equal sample sets.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "aniso/linalg.hpp"

namespace aniso {

template <int D>
class LowDiscrepancySequence {
 public:
  explicit LowDiscrepancySequence(std::uint64_t seed) {
    // phi_D is the positive root of x^(D+1) = x + 1.
    double phi = 2.0;
    for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (D + 1));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int d = 0; d < D; ++d) {
      alpha_[static_cast<std::size_t>(d)] = std::fmod(1.0 / std::pow(phi, d + 1), 1.0);
      shift_[static_cast<std::size_t>(d)] = unit(rng);
    }
  }

  std::array<double, D> operator()(std::uint64_t k) const {
    std::array<double, D> x{};
    for (std::size_t d = 0; d < D; ++d) {
      const double v = shift_[d] + static_cast<double>(k) * alpha_[d];
      x[d] = v - std::floor(v);
    }
    return x;
  }

 private:
  std::array<double, D> alpha_{};
  std::array<double, D> shift_{};
};

/// Area-preserving map from the unit cube [0,1)^(N-1) onto S^(N-1).
template <int N>
Vec<N> cube_to_sphere(const double* u) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Vec<N> x;
  if constexpr (N == 1) {
    x(0) = u[0] < 0.5 ? -1.0 : 1.0;
  } else if constexpr (N == 2) {
    x << std::cos(two_pi * u[0]), std::sin(two_pi * u[0]);
  } else if constexpr (N == 3) {
    const double z = 2.0 * u[0] - 1.0;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    x << r * std::cos(two_pi * u[1]), r * std::sin(two_pi * u[1]), z;
  } else {
    const double a = std::sqrt(u[0]), b = std::sqrt(1.0 - u[0]);
    x << a * std::cos(two_pi * u[1]), a * std::sin(two_pi * u[1]), b * std::cos(two_pi * u[2]),
        b * std::sin(two_pi * u[2]);
  }
  return x;
}

/// `count` unit vectors, deterministic in `seed`.
template <int N>
std::vector<Vec<N>> sphere_samples(std::size_t count, std::uint64_t seed) {
  constexpr int D = N > 1 ? N - 1 : 1;
  LowDiscrepancySequence<D> seq(seed);
  std::vector<Vec<N>> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto u = seq(k);
    out.push_back(cube_to_sphere<N>(u.data()));
  }
  return out;
}

/// `count` vectors with unit direction and log-uniform radius in
/// [r_min, r_max]; the radius uses one extra sequence coordinate.
template <int N>
std::vector<Vec<N>> shell_samples(std::size_t count, std::uint64_t seed, double r_min, double r_max) {
  constexpr int D = N > 1 ? N : 2;
  LowDiscrepancySequence<D> seq(seed);
  std::vector<Vec<N>> out;
  out.reserve(count);
  const double lo = std::log(r_min), hi = std::log(r_max);
  for (std::size_t k = 0; k < count; ++k) {
    const auto u = seq(k);
    const double r = std::exp(lo + (hi - lo) * u[static_cast<std::size_t>(D - 1)]);
    out.push_back(r * cube_to_sphere<N>(u.data()));
  }
  return out;
}

}  // namespace aniso

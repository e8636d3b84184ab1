#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "aniso/errors.hpp"
#include "aniso/linalg.hpp"

namespace aniso {

enum class Boundary { dirichlet, periodic };

/// Node-based rectangular grid.
///
/// Dirichlet axes carry nodes on both ends (spacing = extent/(points-1));
/// periodic axes omit the right end (spacing = extent/points). Flat indices
/// are row-major: the last axis varies fastest.
template <int N>
struct GridSpec {
  std::array<int, N> points{};
  std::array<double, N> lower{};
  std::array<double, N> upper{};
  std::array<Boundary, N> boundary{};

  static GridSpec box(int points_per_axis, double lo, double hi, Boundary bc = Boundary::dirichlet) {
    GridSpec g;
    g.points.fill(points_per_axis);
    g.lower.fill(lo);
    g.upper.fill(hi);
    g.boundary.fill(bc);
    return g;
  }

  void validate() const {
    for (int a = 0; a < N; ++a) {
      if (points[a] < 2) throw SizeError("grid needs at least 2 points per axis");
      if (!(upper[a] > lower[a])) throw UsageError("grid extent must be positive");
    }
  }

  bool periodic(int axis) const { return boundary[static_cast<std::size_t>(axis)] == Boundary::periodic; }

  double spacing(int axis) const {
    const auto a = static_cast<std::size_t>(axis);
    const double extent = upper[a] - lower[a];
    return periodic(axis) ? extent / points[a] : extent / (points[a] - 1);
  }

  std::size_t size() const {
    std::size_t n = 1;
    for (int p : points) n *= static_cast<std::size_t>(p);
    return n;
  }

  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < N; ++a) v *= spacing(a);
    return v;
  }

  std::size_t stride(int axis) const {
    std::size_t s = 1;
    for (int a = N - 1; a > axis; --a) s *= static_cast<std::size_t>(points[static_cast<std::size_t>(a)]);
    return s;
  }

  std::array<int, N> unflatten(std::size_t flat) const {
    std::array<int, N> idx{};
    for (int a = N - 1; a >= 0; --a) {
      const auto p = static_cast<std::size_t>(points[static_cast<std::size_t>(a)]);
      idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % p);
      flat /= p;
    }
    return idx;
  }

  std::size_t flatten(const std::array<int, N>& idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < N; ++a)
      flat = flat * static_cast<std::size_t>(points[static_cast<std::size_t>(a)]) +
             static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
    return flat;
  }

  Vec<N> coordinate(const std::array<int, N>& idx) const {
    Vec<N> x;
    for (int a = 0; a < N; ++a) x(a) = lower[static_cast<std::size_t>(a)] + idx[static_cast<std::size_t>(a)] * spacing(a);
    return x;
  }

  Vec<N> coordinate(std::size_t flat) const { return coordinate(unflatten(flat)); }

  /// True when the node lies on a Dirichlet face.
  bool on_dirichlet_boundary(const std::array<int, N>& idx) const {
    for (int a = 0; a < N; ++a) {
      if (periodic(a)) continue;
      const int i = idx[static_cast<std::size_t>(a)];
      if (i == 0 || i == points[static_cast<std::size_t>(a)] - 1) return true;
    }
    return false;
  }

  /// Distance (in cells) from the nearest non-periodic face; periodic axes
  /// never contribute.
  int cells_from_boundary(const std::array<int, N>& idx) const {
    int d = 1 << 30;
    for (int a = 0; a < N; ++a) {
      if (periodic(a)) continue;
      const int i = idx[static_cast<std::size_t>(a)];
      d = std::min({d, i, points[static_cast<std::size_t>(a)] - 1 - i});
    }
    return d;
  }

  /// Same extents, spacing halved on every axis.
  GridSpec refined() const {
    GridSpec g = *this;
    for (int a = 0; a < N; ++a) {
      auto& p = g.points[static_cast<std::size_t>(a)];
      p = periodic(a) ? 2 * p : 2 * p - 1;
    }
    return g;
  }

  bool operator==(const GridSpec&) const = default;
};

/// Sampled scalar field on a grid; boundary values on Dirichlet faces double
/// as the Dirichlet data.
template <int N>
struct GridField {
  GridSpec<N> grid;
  std::vector<double> values;

  GridField() = default;
  explicit GridField(GridSpec<N> g, double fill = 0.0) : grid(g), values(g.size(), fill) { g.validate(); }

  static GridField sample(const GridSpec<N>& g, const std::function<double(const Vec<N>&)>& f) {
    GridField field(g);
    for (std::size_t i = 0; i < field.values.size(); ++i) field.values[i] = f(g.coordinate(i));
    return field;
  }

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

}  // namespace aniso

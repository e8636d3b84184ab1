#pragma once

// Finite-difference derivatives of grid fields.
//
// Interior nodes use central stencils of the declared order. Periodic axes
// wrap; on Dirichlet axes nodes whose central stencil leaves the grid use a
// shifted one-sided window of the same formal order. Mixed derivatives are
// tensor products of first-derivative operators along the two axes.

#include <algorithm>
#include <vector>

#include "aniso/errors.hpp"
#include "aniso/grid.hpp"
#include "aniso/parallel.hpp"

namespace aniso {

struct StencilSpec {
  int order = 2;
  double step = 1.0;

  void validate() const {
    if (order != 2 && order != 4) throw UsageError("stencil order must be 2 or 4");
    if (!(step > 0.0)) throw UsageError("stencil step must be positive");
  }
};

/// Fornberg weights for the m-th derivative at x0 from the given nodes.
inline std::vector<double> fornberg_weights(double x0, const std::vector<double>& nodes, int m) {
  const int n = static_cast<int>(nodes.size()) - 1;
  std::vector<std::vector<double>> c(static_cast<std::size_t>(n + 1),
                                     std::vector<double>(static_cast<std::size_t>(m + 1), 0.0));
  auto at = [&](int i, int k) -> double& { return c[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]; };
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  at(0, 0) = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[static_cast<std::size_t>(i)] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[static_cast<std::size_t>(i)] - nodes[static_cast<std::size_t>(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) at(i, k) = c1 * (k * at(i - 1, k - 1) - c5 * at(i - 1, k)) / c2;
        at(i, 0) = -c1 * c5 * at(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) at(j, k) = (c4 * at(j, k) - k * at(j, k - 1)) / c3;
      at(j, 0) = c4 * at(j, 0) / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) w[static_cast<std::size_t>(i)] = at(i, m);
  return w;
}

/// A 1D difference operator for one axis: per node, a window start and weights.
class AxisOperator {
 public:
  AxisOperator(int points, double h, bool periodic, int derivative, int order) : points_(points) {
    const int half = order / 2;
    const int central = 2 * half + 1;
    const int one_sided = std::min(points, derivative == 1 ? order + 1 : order + 2);
    std::vector<double> central_nodes;
    for (int k = -half; k <= half; ++k) central_nodes.push_back(k);
    const auto central_w = scale(fornberg_weights(0.0, central_nodes, derivative), h, derivative);

    rows_.resize(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
      Row& row = rows_[static_cast<std::size_t>(i)];
      if (periodic || (i - half >= 0 && i + half < points)) {
        row.start = i - half;
        row.weights = central_w;
        continue;
      }
      const int start = std::clamp(i - one_sided / 2, 0, points - one_sided);
      std::vector<double> nodes;
      for (int k = 0; k < one_sided; ++k) nodes.push_back(start + k);
      row.start = start;
      row.weights = scale(fornberg_weights(static_cast<double>(i), nodes, derivative), h, derivative);
      (void)central;
    }
  }

  /// Applies the operator along one axis of a flat row-major array.
  void apply(const std::vector<double>& in, std::vector<double>& out, std::size_t stride, std::size_t total) const {
    const auto n = static_cast<std::size_t>(points_);
    const std::size_t outer = total / (n * stride);
    parallel_for(outer * stride, [&](std::size_t line) {
      const std::size_t o = line / stride, s = line % stride;
      const std::size_t base = o * n * stride + s;
      for (std::size_t i = 0; i < n; ++i) {
        const Row& row = rows_[i];
        double acc = 0.0;
        for (std::size_t k = 0; k < row.weights.size(); ++k) {
          int j = row.start + static_cast<int>(k);
          j = ((j % points_) + points_) % points_;
          acc += row.weights[k] * in[base + static_cast<std::size_t>(j) * stride];
        }
        out[base + i * stride] = acc;
      }
    });
  }

 private:
  struct Row {
    int start = 0;
    std::vector<double> weights;
  };

  static std::vector<double> scale(std::vector<double> w, double h, int derivative) {
    const double f = derivative == 1 ? 1.0 / h : 1.0 / (h * h);
    for (double& x : w) x *= f;
    return w;
  }

  int points_;
  std::vector<Row> rows_;
};

template <int N>
struct FieldDerivatives {
  std::vector<Vec<N>> gradient;
  std::vector<Mat<N>> hessian;
};

/// Minimum points per axis for a stencil order.
inline int min_points_for_order(int order) { return order == 4 ? 5 : 3; }

/// Gradient and Hessian of a grid field by finite differences.
///
/// `spec.step` is ignored in favour of the grid spacing of each axis when the
/// grid is anisotropically spaced; it is kept for callers that difference
/// raw arrays with a single step.
template <int N>
FieldDerivatives<N> fd_derivatives(const GridField<N>& field, const StencilSpec& spec) {
  spec.validate();
  const auto& g = field.grid;
  for (int a = 0; a < N; ++a)
    if (g.points[static_cast<std::size_t>(a)] < min_points_for_order(spec.order))
      throw SizeError("grid too small for the requested stencil order");

  const std::size_t total = g.size();
  std::array<std::vector<double>, N> first;
  for (int a = 0; a < N; ++a) {
    AxisOperator d1(g.points[static_cast<std::size_t>(a)], g.spacing(a), g.periodic(a), 1, spec.order);
    first[static_cast<std::size_t>(a)].resize(total);
    d1.apply(field.values, first[static_cast<std::size_t>(a)], g.stride(a), total);
  }

  FieldDerivatives<N> out;
  out.gradient.resize(total);
  out.hessian.resize(total);
  for (std::size_t i = 0; i < total; ++i)
    for (int a = 0; a < N; ++a) out.gradient[i](a) = first[static_cast<std::size_t>(a)][i];

  std::vector<double> scratch(total);
  for (int a = 0; a < N; ++a) {
    AxisOperator d2(g.points[static_cast<std::size_t>(a)], g.spacing(a), g.periodic(a), 2, spec.order);
    d2.apply(field.values, scratch, g.stride(a), total);
    for (std::size_t i = 0; i < total; ++i) out.hessian[i](a, a) = scratch[i];
    AxisOperator d1(g.points[static_cast<std::size_t>(a)], g.spacing(a), g.periodic(a), 1, spec.order);
    for (int b = a + 1; b < N; ++b) {
      d1.apply(first[static_cast<std::size_t>(b)], scratch, g.stride(a), total);
      for (std::size_t i = 0; i < total; ++i) out.hessian[i](a, b) = out.hessian[i](b, a) = scratch[i];
    }
  }
  return out;
}

/// First derivative along one axis of an arbitrary nodal array.
template <int N>
std::vector<double> fd_axis_derivative(const GridSpec<N>& g, const std::vector<double>& values, int axis, int order) {
  AxisOperator d1(g.points[static_cast<std::size_t>(axis)], g.spacing(axis), g.periodic(axis), 1, order);
  std::vector<double> out(values.size());
  d1.apply(values, out, g.stride(axis), values.size());
  return out;
}

}  // namespace aniso

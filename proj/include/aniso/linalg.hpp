#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>

namespace aniso {

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;
template <int N>
using Mat = Eigen::Matrix<double, N, N>;

/// Square matrix of runtime size with a compile-time capacity, no heap use.
template <int MaxN>
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, MaxN, MaxN>;
template <int MaxN>
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, MaxN, 1>;

template <class Derived>
struct EigenSystem {
  /// Ascending eigenvalues.
  Eigen::Matrix<double, Derived::RowsAtCompileTime, 1, 0, Derived::MaxRowsAtCompileTime, 1> values;
  /// Column k is the eigenvector of values(k).
  Eigen::Matrix<double, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime, 0,
                Derived::MaxRowsAtCompileTime, Derived::MaxColsAtCompileTime>
      vectors;
  int sweeps = 0;
};

/// Cyclic Jacobi eigensolver for small symmetric matrices.
///
/// Sweeps over all off-diagonal pairs until the off-diagonal Frobenius mass
/// drops below `tol` times the Frobenius norm of the input. Only the upper
/// triangle of `input` is read.
template <class Derived>
EigenSystem<Derived> jacobi_eigen(const Eigen::MatrixBase<Derived>& input, double tol = 1e-13,
                                  int max_sweeps = 64) {
  using MatrixType = decltype(EigenSystem<Derived>{}.vectors);
  const Eigen::Index n = input.rows();
  MatrixType a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) a(i, j) = a(j, i) = input(i, j);
  MatrixType v = MatrixType::Identity(n, n);

  const double scale = a.norm();
  EigenSystem<Derived> out;
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(2.0 * off) <= tol * scale || off == 0.0) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  // Sort ascending.
  out.values.resize(n);
  out.vectors.resize(n, n);
  std::array<Eigen::Index, 16> order{};
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.begin() + n,
            [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = a(src, src);
    out.vectors.col(k) = v.col(src);
  }
  out.sweeps = sweep;
  return out;
}

template <class Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() == 0) return 0.0;
  return jacobi_eigen(a).values(0);
}

/// Householder reflection Q (symmetric, orthogonal) with Q e_n = d/|d|.
///
/// The first n-1 columns of Q form an orthonormal basis of d^perp.
template <int N>
Mat<N> householder_frame(const Vec<N>& d) {
  const double norm = d.norm();
  Vec<N> unit = d / norm;
  Vec<N> v = -unit;
  // v = e_n - unit, with the last entry computed without cancellation.
  double tail = 0.0;
  for (int i = 0; i < N - 1; ++i) tail += unit(i) * unit(i);
  v(N - 1) = unit(N - 1) > 0 ? tail / (1.0 + unit(N - 1)) : 1.0 - unit(N - 1);
  const double vv = v.squaredNorm();
  if (vv == 0.0) return Mat<N>::Identity();
  return Mat<N>::Identity() - (2.0 / vv) * v * v.transpose();
}

/// Restriction of a symmetric matrix to d^perp, in the Householder frame of d.
template <int N>
SmallMat<N> restrict_to_complement(const Mat<N>& a, const Vec<N>& d) {
  const Mat<N> q = householder_frame<N>(d);
  const Mat<N> rotated = q.transpose() * a * q;
  SmallMat<N> block(N - 1, N - 1);
  for (int i = 0; i < N - 1; ++i)
    for (int j = i; j < N - 1; ++j) block(i, j) = block(j, i) = 0.5 * (rotated(i, j) + rotated(j, i));
  return block;
}

}  // namespace aniso

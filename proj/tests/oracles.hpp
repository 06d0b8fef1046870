#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the library's element routines.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using P3 = std::array<double, 3>;

struct QPoint {
  P3 x;
  double w;
};

/// Gauss-Legendre nodes and weights on [0, 1] by Newton iteration.
inline std::vector<std::pair<double, double>> gauss_legendre(int m) {
  std::vector<std::pair<double, double>> out;
  for (int i = 1; i <= m; ++i) {
    double x = std::cos(std::numbers::pi * (i - 0.25) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    out.emplace_back(0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp));
  }
  return out;
}

/// Collapsed-cube (Duffy) rule on a tetrahedron, exact for polynomials of
/// degree <= 2m - 3.
inline std::vector<QPoint> tet_rule(const std::array<P3, 4>& v, int m) {
  const auto g = gauss_legendre(m);
  Eigen::Matrix3d J;
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 3; ++r) J(r, c) = v[c + 1][r] - v[0][r];
  const double vol6 = std::abs(J.determinant());
  std::vector<QPoint> out;
  for (const auto& [u, wu] : g)
    for (const auto& [s, ws] : g)
      for (const auto& [t, wt] : g) {
        // reference point in the unit simplex
        const double a = u;
        const double b = (1.0 - u) * s;
        const double c = (1.0 - u) * (1.0 - s) * t;
        const double jac = (1.0 - u) * (1.0 - u) * (1.0 - s);
        P3 x;
        for (int r = 0; r < 3; ++r) x[r] = v[0][r] + J(r, 0) * a + J(r, 1) * b + J(r, 2) * c;
        out.push_back({x, wu * ws * wt * jac * vol6});
      }
  return out;
}

/// Collapsed-square rule on a triangle in 3-D.
inline std::vector<QPoint> tri_rule(const std::array<P3, 3>& v, int m) {
  const auto g = gauss_legendre(m);
  P3 e1, e2;
  for (int r = 0; r < 3; ++r) {
    e1[r] = v[1][r] - v[0][r];
    e2[r] = v[2][r] - v[0][r];
  }
  const Eigen::Vector3d n = Eigen::Vector3d(e1[0], e1[1], e1[2]).cross(Eigen::Vector3d(e2[0], e2[1], e2[2]));
  const double area2 = n.norm();
  std::vector<QPoint> out;
  for (const auto& [u, wu] : g)
    for (const auto& [s, ws] : g) {
      const double a = u, b = (1.0 - u) * s;
      P3 x;
      for (int r = 0; r < 3; ++r) x[r] = v[0][r] + e1[r] * a + e2[r] * b;
      out.push_back({x, wu * ws * (1.0 - u) * area2});
    }
  return out;
}

/// Affine map x -> barycentric coordinates as the inverse of the 4x4
/// vertex matrix: lambda = Minv [x; 1].
inline Eigen::Matrix4d bary_map(const std::array<P3, 4>& v) {
  Eigen::Matrix4d A;
  for (int c = 0; c < 4; ++c) {
    for (int r = 0; r < 3; ++r) A(r, c) = v[c][r];
    A(3, c) = 1.0;
  }
  return A.inverse();
}

inline std::array<double, 4> bary(const std::array<P3, 4>& v, const P3& x) {
  const Eigen::Vector4d l = bary_map(v) * Eigen::Vector4d(x[0], x[1], x[2], 1.0);
  return {l(0), l(1), l(2), l(3)};
}

/// Whitney field lambda_a grad lambda_b - lambda_b grad lambda_a.
inline P3 whitney(const std::array<P3, 4>& v, int a, int b, const P3& x) {
  const Eigen::Matrix4d m = bary_map(v);
  const Eigen::Vector4d l = m * Eigen::Vector4d(x[0], x[1], x[2], 1.0);
  P3 w;
  for (int d = 0; d < 3; ++d) w[d] = l(a) * m(b, d) - l(b) * m(a, d);
  return w;
}

/// Curl of the Whitney field by central differences (the field is affine).
inline P3 whitney_curl(const std::array<P3, 4>& v, int a, int b, const P3& x) {
  const double h = 1e-3;
  double d[3][3];  // d[i][j] = d w_j / d x_i
  for (int i = 0; i < 3; ++i) {
    P3 xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const P3 wp = whitney(v, a, b, xp), wm = whitney(v, a, b, xm);
    for (int j = 0; j < 3; ++j) d[i][j] = (wp[j] - wm[j]) / (2 * h);
  }
  return {d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]};
}

inline double dot(const P3& a, const P3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

}  // namespace oracle

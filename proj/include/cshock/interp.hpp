#pragma once

#include "cshock/types.hpp"

#include <algorithm>
#include <cmath>

namespace cshock {

/// Uniform axis x0, x0 + h, ..., x0 + (n-1) h.
struct UniformAxis {
  double x0 = 0.0;
  double h = 1.0;
  Eigen::Index n = 2;

  UniformAxis() = default;
  UniformAxis(double lo, double hi, Eigen::Index count) : x0(lo), h((hi - lo) / double(count - 1)), n(count) {}

  double lo() const { return x0; }
  double hi() const { return x0 + h * double(n - 1); }
  double operator[](Eigen::Index i) const { return x0 + h * double(i); }

  bool contains(double x, double slack = 1e-12) const {
    const double s = slack * std::max(1.0, std::abs(hi() - lo()));
    return x >= lo() - s && x <= hi() + s;
  }

  /// Cell index i and local coordinate s in [0, 1] with x = x_i + s h; clamps to the axis.
  std::pair<Eigen::Index, double> locate(double x) const {
    double pos = (x - x0) / h;
    pos = std::clamp(pos, 0.0, double(n - 1));
    auto i = static_cast<Eigen::Index>(pos);
    if (i >= n - 1) i = n - 2;
    return {i, pos - double(i)};
  }
};

/// Bilinear interpolation of values(j, k) sampled at (ta[j], ya[k]); clamps outside the box.
inline double bilinear(const UniformAxis& ta, const UniformAxis& ya, const MatrixXd& values, double t, double y) {
  auto [j, s] = ta.locate(t);
  auto [k, r] = ya.locate(y);
  const double v00 = values(j, k);
  const double v01 = values(j, k + 1);
  const double v10 = values(j + 1, k);
  const double v11 = values(j + 1, k + 1);
  return (1.0 - s) * ((1.0 - r) * v00 + r * v01) + s * ((1.0 - r) * v10 + r * v11);
}

/// Cubic Hermite interpolation with centred-difference slopes (Catmull-Rom)
/// on a uniform axis; one-sided slopes at the ends, flat beyond them.
inline double cubic(const UniformAxis& ax, const double* v, double x) {
  if (x <= ax.lo()) return v[0];
  if (x >= ax.hi()) return v[ax.n - 1];
  auto [i, s] = ax.locate(x);
  const Eigen::Index n = ax.n;
  const double p0 = v[i];
  const double p1 = v[i + 1];
  const double m0 = (i > 0) ? 0.5 * (v[i + 1] - v[i - 1]) : (v[i + 1] - v[i]);
  const double m1 = (i + 2 < n) ? 0.5 * (v[i + 2] - v[i]) : (v[i + 1] - v[i]);
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1;
}

}  // namespace cshock

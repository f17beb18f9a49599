#pragma once

#include <span>
#include <vector>

namespace cshock {

/// Deterministic time-dependent coefficient t -> f(t).
///
/// Three representations are supported, all of which admit exact integrals:
///  - constant
///  - piecewise constant: `values[i]` holds on [breaks[i-1], breaks[i]), right-continuous
///  - tabulated: linear interpolation between (times[i], values[i]), flat beyond the ends
class TimeCoefficient {
 public:
  enum class Kind { constant, piecewise_constant, tabulated };

  TimeCoefficient() : TimeCoefficient(0.0) {}
  TimeCoefficient(double value);  // NOLINT: implicit from a number reads naturally in configs

  static TimeCoefficient constant(double value);
  static TimeCoefficient piecewise(std::vector<double> breaks, std::vector<double> values);
  static TimeCoefficient tabulated(std::vector<double> times, std::vector<double> values);

  double operator()(double t) const;

  /// Exact integral over [a, b] (a <= b).
  double integral(double a, double b) const;
  /// Exact integral of f^2 over [a, b].
  double integral_of_square(double a, double b) const;
  /// Exact integral of |f| over [a, b].
  double integral_of_abs(double a, double b) const;

  double max_on(double a, double b) const;
  double min_on(double a, double b) const;
  double max_abs_on(double a, double b) const;

  /// Lipschitz modulus: 0 for constants, the largest segment slope for tabulated,
  /// +inf for a piecewise-constant coefficient with at least one jump.
  double max_slope() const;

  /// Same representation with every value multiplied by `factor`.
  TimeCoefficient scaled(double factor) const;

  bool is_constant() const;

  Kind kind() const { return kind_; }
  std::span<const double> knots() const { return knots_; }
  std::span<const double> values() const { return values_; }

 private:
  TimeCoefficient(Kind kind, std::vector<double> knots, std::vector<double> values);

  // Points in (a, b) where the representation changes.
  std::vector<double> interior_knots(double a, double b) const;

  Kind kind_;
  std::vector<double> knots_;
  std::vector<double> values_;
};

}  // namespace cshock

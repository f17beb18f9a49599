#include "cshock/coefficient.hpp"

#include "cshock/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cshock {

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw ConfigError(std::string("time coefficient: non-finite ") + what);
    }
  }
}

void require_increasing(const std::vector<double>& v, const char* what) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) {
      throw ConfigError(std::string("time coefficient: ") + what + " must be strictly increasing");
    }
  }
}

}  // namespace

TimeCoefficient::TimeCoefficient(double value) : TimeCoefficient(Kind::constant, {}, {value}) {}

TimeCoefficient::TimeCoefficient(Kind kind, std::vector<double> knots, std::vector<double> values)
    : kind_(kind), knots_(std::move(knots)), values_(std::move(values)) {
  require_finite(knots_, "knot");
  require_finite(values_, "value");
  require_increasing(knots_, "knots");
}

TimeCoefficient TimeCoefficient::constant(double value) { return TimeCoefficient(value); }

TimeCoefficient TimeCoefficient::piecewise(std::vector<double> breaks, std::vector<double> values) {
  if (values.size() != breaks.size() + 1) {
    throw ConfigError("piecewise coefficient: need exactly one more value than breaks");
  }
  return TimeCoefficient(Kind::piecewise_constant, std::move(breaks), std::move(values));
}

TimeCoefficient TimeCoefficient::tabulated(std::vector<double> times, std::vector<double> values) {
  if (times.size() != values.size() || times.empty()) {
    throw ConfigError("tabulated coefficient: times and values must be non-empty and of equal size");
  }
  return TimeCoefficient(Kind::tabulated, std::move(times), std::move(values));
}

double TimeCoefficient::operator()(double t) const {
  switch (kind_) {
    case Kind::constant:
      return values_[0];
    case Kind::piecewise_constant: {
      auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
      return values_[static_cast<std::size_t>(it - knots_.begin())];
    }
    case Kind::tabulated: {
      if (t <= knots_.front()) return values_.front();
      if (t >= knots_.back()) return values_.back();
      auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
      const auto i = static_cast<std::size_t>(it - knots_.begin());
      const double w = (t - knots_[i - 1]) / (knots_[i] - knots_[i - 1]);
      return (1.0 - w) * values_[i - 1] + w * values_[i];
    }
  }
  return 0.0;
}

std::vector<double> TimeCoefficient::interior_knots(double a, double b) const {
  std::vector<double> pts;
  for (double k : knots_) {
    if (k > a && k < b) pts.push_back(k);
  }
  return pts;
}

double TimeCoefficient::integral(double a, double b) const {
  if (b < a) return -integral(b, a);
  if (kind_ == Kind::constant) return values_[0] * (b - a);

  auto pts = interior_knots(a, b);
  pts.insert(pts.begin(), a);
  pts.push_back(b);
  double sum = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double lo = pts[i - 1];
    const double hi = pts[i];
    if (kind_ == Kind::piecewise_constant) {
      sum += (*this)(0.5 * (lo + hi)) * (hi - lo);
    } else {
      // linear on [lo, hi]
      sum += 0.5 * ((*this)(lo) + (*this)(hi)) * (hi - lo);
    }
  }
  return sum;
}

double TimeCoefficient::integral_of_square(double a, double b) const {
  if (b < a) return -integral_of_square(b, a);
  if (kind_ == Kind::constant) return values_[0] * values_[0] * (b - a);

  auto pts = interior_knots(a, b);
  pts.insert(pts.begin(), a);
  pts.push_back(b);
  double sum = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double lo = pts[i - 1];
    const double hi = pts[i];
    if (kind_ == Kind::piecewise_constant) {
      const double v = (*this)(0.5 * (lo + hi));
      sum += v * v * (hi - lo);
    } else {
      const double v0 = (*this)(lo);
      const double v1 = (*this)(hi);
      sum += (hi - lo) * (v0 * v0 + v0 * v1 + v1 * v1) / 3.0;
    }
  }
  return sum;
}

double TimeCoefficient::integral_of_abs(double a, double b) const {
  if (b < a) return -integral_of_abs(b, a);
  if (kind_ == Kind::constant) return std::abs(values_[0]) * (b - a);

  auto pts = interior_knots(a, b);
  pts.insert(pts.begin(), a);
  pts.push_back(b);
  double sum = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double lo = pts[i - 1];
    const double hi = pts[i];
    if (kind_ == Kind::piecewise_constant) {
      sum += std::abs((*this)(0.5 * (lo + hi))) * (hi - lo);
      continue;
    }
    const double v0 = (*this)(lo);
    const double v1 = (*this)(hi);
    if (v0 * v1 >= 0.0) {
      sum += 0.5 * std::abs(v0 + v1) * (hi - lo);
    } else {
      // sign change inside the segment: two triangles
      const double root = lo + (hi - lo) * v0 / (v0 - v1);
      sum += 0.5 * (std::abs(v0) * (root - lo) + std::abs(v1) * (hi - root));
    }
  }
  return sum;
}

double TimeCoefficient::max_on(double a, double b) const {
  double m = std::max((*this)(a), (*this)(b));
  for (double k : interior_knots(a, b)) {
    m = std::max(m, (*this)(k));
    if (kind_ == Kind::piecewise_constant) {
      // left limit at a break
      auto it = std::find(knots_.begin(), knots_.end(), k);
      m = std::max(m, values_[static_cast<std::size_t>(it - knots_.begin())]);
    }
  }
  return m;
}

double TimeCoefficient::min_on(double a, double b) const {
  double m = std::min((*this)(a), (*this)(b));
  for (double k : interior_knots(a, b)) {
    m = std::min(m, (*this)(k));
    if (kind_ == Kind::piecewise_constant) {
      auto it = std::find(knots_.begin(), knots_.end(), k);
      m = std::min(m, values_[static_cast<std::size_t>(it - knots_.begin())]);
    }
  }
  return m;
}

double TimeCoefficient::max_abs_on(double a, double b) const {
  return std::max(std::abs(max_on(a, b)), std::abs(min_on(a, b)));
}

double TimeCoefficient::max_slope() const {
  switch (kind_) {
    case Kind::constant:
      return 0.0;
    case Kind::piecewise_constant:
      for (std::size_t i = 1; i < values_.size(); ++i) {
        if (values_[i] != values_[i - 1]) return std::numeric_limits<double>::infinity();
      }
      return 0.0;
    case Kind::tabulated: {
      double s = 0.0;
      for (std::size_t i = 1; i < knots_.size(); ++i) {
        s = std::max(s, std::abs(values_[i] - values_[i - 1]) / (knots_[i] - knots_[i - 1]));
      }
      return s;
    }
  }
  return 0.0;
}

TimeCoefficient TimeCoefficient::scaled(double factor) const {
  std::vector<double> v = values_;
  for (double& x : v) x *= factor;
  return TimeCoefficient(kind_, knots_, std::move(v));
}

bool TimeCoefficient::is_constant() const {
  return std::all_of(values_.begin(), values_.end(), [&](double v) { return v == values_[0]; });
}

}  // namespace cshock

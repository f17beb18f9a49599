#pragma once

#include "cshock/types.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <utility>

namespace cshock {

struct RootOptions {
  double residual_tol = 1e-10;
  double x_tol = 1e-15;  // relative width at which the bracket is considered collapsed
  int max_iterations = 200;
  int max_doublings = 60;
};

struct Root {
  double x = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Grows [lo, hi] geometrically until an increasing function changes sign.
/// f may return +inf (treated as positive), which is how callers signal that
/// an exponential moment blew up on the far side of the root.
template <class F>
std::pair<double, double> expand_bracket(F&& f, double lo, double hi, const RootOptions& opt = {}) {
  double width = std::max(hi - lo, 1e-3);
  double flo = f(lo);
  for (int k = 0; flo > 0.0; ++k) {
    if (k >= opt.max_doublings) {
      throw BracketError(fmt::format("no sign change below {:.6g} after {} doublings", lo, k));
    }
    hi = lo;
    lo -= width;
    width *= 2.0;
    flo = f(lo);
  }
  width = std::max(hi - lo, 1e-3);
  double fhi = f(hi);
  for (int k = 0; fhi < 0.0; ++k) {
    if (k >= opt.max_doublings) {
      throw BracketError(fmt::format("no sign change above {:.6g} after {} doublings", hi, k));
    }
    lo = hi;
    hi += width;
    width *= 2.0;
    fhi = f(hi);
  }
  return {lo, hi};
}

/// Safeguarded Newton iteration on a bracket [lo, hi] of an increasing
/// function with f(lo) <= 0 <= f(hi). fd(x) returns {f(x), f'(x)}; a
/// non-finite value is treated as lying to the right of the root.
template <class FD>
Root newton_bisect(FD&& fd, double lo, double hi, const RootOptions& opt = {}) {
  if (lo > hi) std::swap(lo, hi);
  double x = 0.5 * (lo + hi);
  double step_before_last = hi - lo;
  double last_step = step_before_last;
  Root out;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    auto [f, df] = fd(x);
    out.iterations = it;
    if (!std::isfinite(f)) {
      hi = x;
      x = 0.5 * (lo + hi);
      continue;
    }
    out.x = x;
    out.residual = f;
    if (std::abs(f) <= opt.residual_tol) return out;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    if (hi - lo <= opt.x_tol * std::max(1.0, std::abs(x))) return out;
    // Newton creeps along steep exponentials; bisect when the step would not
    // be under half the step before last
    const bool slow = std::abs(2.0 * f) > std::abs(step_before_last * df);
    double next = (df > 0.0 && std::isfinite(df) && !slow) ? x - f / df : lo - 1.0;
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    } else if (std::abs(next - x) <= opt.x_tol * std::max(1.0, std::abs(x))) {
      // Newton has stalled at rounding level from one side of the root
      out.x = next;
      out.residual = fd(next).first;
      return out;
    }
    step_before_last = last_step;
    last_step = std::abs(next - x);
    x = next;
  }
  throw ConvergenceError(fmt::format("root not found in {} iterations (bracket [{:.17g}, {:.17g}], residual {:.3g})",
                                     opt.max_iterations, lo, hi, out.residual));
}

/// Plain bisection for an increasing function; used where no derivative is available.
template <class F>
Root bisect(F&& f, double lo, double hi, const RootOptions& opt = {}) {
  Root out;
  for (int it = 1; it <= 400; ++it) {
    const double x = 0.5 * (lo + hi);
    const double v = f(x);
    out = {x, v, it};
    if (std::isfinite(v) && std::abs(v) <= opt.residual_tol) return out;
    if (!std::isfinite(v) || v > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    if (hi - lo <= opt.x_tol * std::max(1.0, std::abs(x))) return out;
  }
  return out;
}

}  // namespace cshock

#include "cshock/claims.hpp"

#include "cshock/types.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cshock {

namespace {

constexpr double kMaxExponent = 700.0;

// \int_0^D z^j e^{s z} dz for j in {0,1,2}.
double truncated_power_exp_integral(double s, double D, int j) {
  const double x = s * D;
  if (std::abs(x) <= 2.0) {
    // D^{j+1} sum_n x^n / (n! (n + j + 1))
    double term = 1.0;  // x^n / n!
    double sum = 0.0;
    for (int n = 0; n < 60; ++n) {
      const double contrib = term / (n + j + 1);
      sum += contrib;
      if (std::abs(contrib) < 1e-18 * std::abs(sum)) break;
      term *= x / (n + 1);
    }
    return std::pow(D, j + 1) * sum;
  }
  if (x > kMaxExponent) {
    throw DivergenceError(fmt::format("tilted moment overflows: s*D = {:.6g}", x));
  }
  const double ex = std::exp(x);
  switch (j) {
    case 0:
      return (ex - 1.0) / s;
    case 1:
      return (ex * (x - 1.0) + 1.0) / (s * s);
    default:
      return (ex * (x * x - 2.0 * x + 2.0) - 2.0) / (s * s * s);
  }
}

}  // namespace

ClaimDistribution ClaimDistribution::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ConfigError(fmt::format("exponential claims: rate must be positive, got {}", rate));
  }
  ClaimDistribution d;
  d.kind_ = Kind::exponential;
  d.rate_ = rate;
  d.finish();
  return d;
}

ClaimDistribution ClaimDistribution::truncated_exponential(double rate, double cap) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ConfigError(fmt::format("truncated exponential claims: rate must be positive, got {}", rate));
  }
  if (!(cap > 0.0) || !std::isfinite(cap)) {
    throw ConfigError(fmt::format("truncated exponential claims: cap must be positive, got {}", cap));
  }
  ClaimDistribution d;
  d.kind_ = Kind::truncated_exponential;
  d.rate_ = rate;
  d.cap_ = cap;
  d.finish();
  return d;
}

ClaimDistribution ClaimDistribution::discrete(std::vector<double> atoms, std::vector<double> weights) {
  if (atoms.empty() || atoms.size() != weights.size()) {
    throw ConfigError("discrete claims: atoms and weights must be non-empty and of equal size");
  }
  for (double a : atoms) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw ConfigError(fmt::format("discrete claims: atoms must be positive, got {}", a));
    }
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw ConfigError(fmt::format("discrete claims: weights must be positive, got {}", w));
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) {
    throw ConfigError(fmt::format("discrete claims: weights sum to {:.17g}, expected 1", total));
  }
  ClaimDistribution d;
  d.kind_ = Kind::discrete;
  d.atoms_ = std::move(atoms);
  d.weights_ = std::move(weights);
  d.cap_ = *std::max_element(d.atoms_.begin(), d.atoms_.end());
  d.finish();
  return d;
}

void ClaimDistribution::finish() {
  if (kind_ == Kind::discrete) {
    cumulative_.resize(weights_.size());
    std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
  }
  mean_ = tilted_moment(0.0, 1);
  second_moment_ = tilted_moment(0.0, 2);
}

double ClaimDistribution::support_bound() const {
  return kind_ == Kind::exponential ? std::numeric_limits<double>::infinity() : cap_;
}

double ClaimDistribution::tilt_limit() const {
  return kind_ == Kind::exponential ? rate_ : std::numeric_limits<double>::infinity();
}

double ClaimDistribution::tilted_moment(double c, int order) const {
  if (order < 0 || order > 2) {
    throw ConfigError(fmt::format("tilted moment: order must be 0, 1 or 2, got {}", order));
  }
  if (std::isnan(c)) throw ConfigError("tilted moment: tilt is NaN");

  switch (kind_) {
    case Kind::exponential: {
      if (c >= rate_) {
        throw DivergenceError(
            fmt::format("E[Z^{} e^(cZ)] diverges for exponential(rate={}) at c={}", order, rate_, c));
      }
      const double gap = rate_ - c;
      switch (order) {
        case 0:
          return rate_ / gap;
        case 1:
          return rate_ / (gap * gap);
        default:
          return 2.0 * rate_ / (gap * gap * gap);
      }
    }
    case Kind::truncated_exponential: {
      const double norm = -std::expm1(-rate_ * cap_);  // 1 - e^{-aD}
      return rate_ / norm * truncated_power_exp_integral(c - rate_, cap_, order);
    }
    case Kind::discrete: {
      double sum = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        const double e = c * atoms_[i];
        if (e > kMaxExponent) {
          throw DivergenceError(fmt::format("tilted moment overflows: c*z = {:.6g}", e));
        }
        sum += weights_[i] * std::pow(atoms_[i], order) * std::exp(e);
      }
      return sum;
    }
  }
  return 0.0;
}

double ClaimDistribution::sample_from_uniform(double u) const {
  switch (kind_) {
    case Kind::exponential:
      return -std::log1p(-u) / rate_;
    case Kind::truncated_exponential:
      return -std::log1p(u * std::expm1(-rate_ * cap_)) / rate_;
    case Kind::discrete: {
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      const auto i = std::min(static_cast<std::size_t>(it - cumulative_.begin()), atoms_.size() - 1);
      return atoms_[i];
    }
  }
  return 0.0;
}

}  // namespace cshock

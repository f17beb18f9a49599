#pragma once

// Shared helpers for the test binaries: random admissible configurations and
// plain quadrature/root oracles that do not go through the library's solvers.

#include "cshock/model.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <random>

namespace cshock::testing {

// E[Z^order e^{c Z}] by adaptive quadrature, independent of ClaimDistribution's
// closed forms. Discrete laws are summed directly.
inline double quad_moment(const ClaimDistribution& d, double c, int order) {
  using boost::math::quadrature::gauss_kronrod;
  if (d.kind() == ClaimDistribution::Kind::discrete) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.atoms().size(); ++i) {
      s += d.weights()[i] * std::pow(d.atoms()[i], order) * std::exp(c * d.atoms()[i]);
    }
    return s;
  }
  const double a = d.rate();
  if (d.kind() == ClaimDistribution::Kind::exponential) {
    auto f = [&](double z) { return a * std::pow(z, order) * std::exp((c - a) * z); };
    return gauss_kronrod<double, 61>::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-13);
  }
  const double D = d.cap();
  const double norm = 1.0 - std::exp(-a * D);
  auto f = [&](double z) { return a * std::pow(z, order) * std::exp((c - a) * z) / norm; };
  return gauss_kronrod<double, 61>::integrate(f, 0.0, D, 15, 1e-13);
}

// Bisection on an increasing function over [lo, hi] with f(lo) < 0 < f(hi).
inline double bisection(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// A random admissible configuration. Claims are compactly supported or light
// enough that every moment used by the solvers is finite, and the jump scale
// is small so kD < 1 holds.
inline ModelConfig random_config(std::mt19937_64& rng, bool evp_line2 = false) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto between = [&](double a, double b) { return a + (b - a) * U(rng); };

  ModelConfig cfg;
  cfg.prefs.gamma = between(0.2, 1.5);
  cfg.prefs.horizon = between(0.5, 2.0);
  const double r = between(0.0, 0.05);
  cfg.market.r = r;
  cfg.market.mu = r + between(-0.02, 0.12);
  cfg.market.sigma = between(0.15, 0.4);
  cfg.market.jump = FinancialMarket::Jump::multiplicative;

  auto claims = [&]() {
    const double pick = U(rng);
    if (pick < 0.4) return ClaimDistribution::truncated_exponential(between(0.8, 2.0), between(3.0, 8.0));
    if (pick < 0.7) return ClaimDistribution::exponential(between(4.0, 8.0));
    return ClaimDistribution::discrete({0.5, 1.0, 2.0 + U(rng)}, {0.5, 0.3, 0.2});
  };
  auto premium = [&](bool evp) {
    const double theta = between(0.05, 0.2);
    const double theta_r = theta + between(0.05, 0.3);
    return evp ? PremiumPrinciple::expected_value(theta, theta_r) : PremiumPrinciple::variance(theta, theta_r);
  };

  for (int i = 1; i <= 2; ++i) {
    auto& l = cfg.line(i);
    l.claims = claims();
    l.premium = premium(i == 2 ? (evp_line2 || U(rng) < 0.5) : U(rng) < 0.5);
    l.intensity = U(rng) < 0.5 ? Intensity::exponential(between(0.5, 3.0), between(-0.8, 0.8))
                               : Intensity::logistic(between(0.5, 3.0), 0.5, 1.5);
    l.vol = between(0.1, 0.4);
    l.drift = between(-0.1, 0.1);
    l.y0 = between(-0.3, 0.3);
    l.delta = 50.0;
  }
  const double D = cfg.line(2).claims.support_bound();
  cfg.market.k = std::isfinite(D) ? between(0.1, 0.5) / D : between(0.005, 0.05);
  return cfg;
}

}  // namespace cshock::testing

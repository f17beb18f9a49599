#include "cshock/model.hpp"

#include "cshock/types.hpp"

#include <fmt/format.h>

#include <cmath>

namespace cshock {

Intensity Intensity::constant(TimeCoefficient base) {
  Intensity i;
  i.kind = Kind::constant;
  i.base = std::move(base);
  return i;
}

Intensity Intensity::exponential(TimeCoefficient base, double slope) {
  Intensity i;
  i.kind = Kind::exponential;
  i.base = std::move(base);
  i.slope = slope;
  return i;
}

Intensity Intensity::logistic(TimeCoefficient base, double low, double high, double scale) {
  if (!(high > low) || low < 0.0) {
    throw ConfigError(fmt::format("logistic intensity: need 0 <= low < high, got [{}, {}]", low, high));
  }
  Intensity i;
  i.kind = Kind::logistic;
  i.base = std::move(base);
  i.low = low;
  i.high = high;
  i.scale = scale;
  return i;
}

Intensity Intensity::custom(std::function<double(double, double)> fn) {
  Intensity i;
  i.kind = Kind::custom;
  i.custom_fn = std::move(fn);
  return i;
}

double Intensity::operator()(double t, double y) const {
  switch (kind) {
    case Kind::constant:
      return base(t);
    case Kind::exponential:
      return base(t) * std::exp(slope * y);
    case Kind::logistic:
      return base(t) * (low + (high - low) / (1.0 + std::exp(-scale * y)));
    case Kind::custom:
      return custom_fn(t, y);
  }
  return 0.0;
}

Intensity Intensity::scaled(double factor) const {
  Intensity out = *this;
  if (kind == Kind::custom) {
    out.custom_fn = [fn = custom_fn, factor](double t, double y) { return factor * fn(t, y); };
  } else {
    out.base = base.scaled(factor);
  }
  return out;
}

PremiumPrinciple PremiumPrinciple::expected_value(double theta, double theta_r) {
  PremiumPrinciple p;
  p.kind = Kind::expected_value;
  p.theta = theta;
  p.theta_r = theta_r;
  return p;
}

PremiumPrinciple PremiumPrinciple::variance(double theta, double theta_r) {
  PremiumPrinciple p;
  p.kind = Kind::variance;
  p.theta = theta;
  p.theta_r = theta_r;
  return p;
}

PremiumPrinciple PremiumPrinciple::custom(std::function<double(double, double)> c,
                                          std::function<double(double, double, double)> q,
                                          std::function<double(double, double, double)> dq,
                                          std::function<double(double, double, double)> d2q) {
  if (!c || !q || !dq || !d2q) {
    throw ConfigError("custom premium: c, q and both u-derivatives are required");
  }
  PremiumPrinciple p;
  p.kind = Kind::custom;
  p.c_fn = std::move(c);
  p.q_fn = std::move(q);
  p.dq_fn = std::move(dq);
  p.d2q_fn = std::move(d2q);
  return p;
}

double InsuranceLine::c(double t, double y) const {
  switch (premium.kind) {
    case PremiumPrinciple::Kind::expected_value:
      return (1.0 + premium.theta) * claims.mean() * lambda(t, y);
    case PremiumPrinciple::Kind::variance:
      return (claims.mean() + premium.theta * claims.second_moment()) * lambda(t, y);
    case PremiumPrinciple::Kind::custom:
      return premium.c_fn(t, y);
  }
  return 0.0;
}

double InsuranceLine::q(double t, double y, double u) const {
  const double v = 1.0 - u;
  switch (premium.kind) {
    case PremiumPrinciple::Kind::expected_value:
      return (1.0 + premium.theta_r) * claims.mean() * v * lambda(t, y);
    case PremiumPrinciple::Kind::variance:
      return (claims.mean() * v + premium.theta_r * claims.second_moment() * v * v) * lambda(t, y);
    case PremiumPrinciple::Kind::custom:
      return premium.q_fn(t, y, u);
  }
  return 0.0;
}

double InsuranceLine::dq(double t, double y, double u) const {
  switch (premium.kind) {
    case PremiumPrinciple::Kind::expected_value:
      return -(1.0 + premium.theta_r) * claims.mean() * lambda(t, y);
    case PremiumPrinciple::Kind::variance:
      return -(claims.mean() + 2.0 * premium.theta_r * (1.0 - u) * claims.second_moment()) *
             lambda(t, y);
    case PremiumPrinciple::Kind::custom:
      return premium.dq_fn(t, y, u);
  }
  return 0.0;
}

double InsuranceLine::d2q(double t, double y, double u) const {
  switch (premium.kind) {
    case PremiumPrinciple::Kind::expected_value:
      return 0.0;
    case PremiumPrinciple::Kind::variance:
      return 2.0 * premium.theta_r * claims.second_moment() * lambda(t, y);
    case PremiumPrinciple::Kind::custom:
      return premium.d2q_fn(t, y, u);
  }
  return 0.0;
}

const InsuranceLine& ModelConfig::line(int i) const {
  if (i != 1 && i != 2) throw ConfigError(fmt::format("line index must be 1 or 2, got {}", i));
  return lines[static_cast<std::size_t>(i - 1)];
}

InsuranceLine& ModelConfig::line(int i) {
  if (i != 1 && i != 2) throw ConfigError(fmt::format("line index must be 1 or 2, got {}", i));
  return lines[static_cast<std::size_t>(i - 1)];
}

void ModelConfig::check() const {
  if (!(prefs.gamma > 0.0)) throw ConfigError(fmt::format("risk aversion must be positive, got {}", prefs.gamma));
  if (!(prefs.horizon > 0.0)) throw ConfigError(fmt::format("horizon must be positive, got {}", prefs.horizon));
  if (!std::isfinite(prefs.initial_wealth)) throw ConfigError("initial wealth must be finite");
  if (!(market.p0 > 0.0)) throw ConfigError(fmt::format("initial price must be positive, got {}", market.p0));
  if (!(market.sigma.min_on(0.0, prefs.horizon) > 0.0)) {
    throw ConfigError("asset volatility must be strictly positive on [0, T]");
  }
  for (int i = 1; i <= 2; ++i) {
    const auto& l = line(i);
    if (l.premium.kind == PremiumPrinciple::Kind::custom && (!l.premium.q_fn || !l.premium.dq_fn)) {
      throw ConfigError(fmt::format("line {}: custom premium without evaluators", i));
    }
    if (l.intensity.kind == Intensity::Kind::custom && !l.intensity.custom_fn) {
      throw ConfigError(fmt::format("line {}: custom intensity without evaluator", i));
    }
  }
}

double accumulation_factor(const ModelConfig& cfg, double t1, double t2) {
  const double T = cfg.horizon();
  constexpr double slack = 1e-12;
  if (!(t1 >= -slack && t1 <= t2 + slack && t2 <= T * (1.0 + slack) + slack)) {
    throw DomainError(fmt::format("accumulation factor: need 0 <= t1 <= t2 <= T, got t1={}, t2={}, T={}", t1,
                                  t2, T));
  }
  return std::exp(cfg.market.r.integral(t1, t2));
}

double accumulation_bound(const ModelConfig& cfg) {
  return std::exp(cfg.market.r.integral_of_abs(0.0, cfg.horizon()));
}

double effective_risk_aversion(const ModelConfig& cfg, double t) {
  return cfg.prefs.gamma * accumulation_factor(cfg, t, cfg.horizon());
}

ModelConfig with_jump_scale(const ModelConfig& cfg, double factor) {
  ModelConfig out = cfg;
  out.market.k = cfg.market.k.scaled(factor);
  return out;
}

ModelConfig with_intensity_scale(const ModelConfig& cfg, int line, double factor) {
  ModelConfig out = cfg;
  out.line(line).intensity = cfg.line(line).intensity.scaled(factor);
  return out;
}

ModelConfig without_shock(const ModelConfig& cfg) {
  ModelConfig out = cfg;
  out.market.jump = FinancialMarket::Jump::none;
  out.market.k = 0.0;
  return out;
}

}  // namespace cshock

#pragma once

#include "cshock/claims.hpp"
#include "cshock/coefficient.hpp"

#include <array>
#include <functional>

namespace cshock {

/// Claim-arrival intensity lambda(t, y) = base(t) * f(y).
struct Intensity {
  enum class Kind { constant, exponential, logistic, custom };

  Kind kind = Kind::constant;
  TimeCoefficient base = 1.0;
  double slope = 0.0;  // exponential: f(y) = exp(slope * y)
  double low = 0.0;    // logistic: f(y) = low + (high - low) / (1 + exp(-scale * y))
  double high = 1.0;
  double scale = 1.0;
  std::function<double(double, double)> custom_fn;

  static Intensity constant(TimeCoefficient base);
  static Intensity exponential(TimeCoefficient base, double slope);
  static Intensity logistic(TimeCoefficient base, double low, double high, double scale = 1.0);
  static Intensity custom(std::function<double(double, double)> fn);

  double operator()(double t, double y) const;

  /// True when lambda does not depend on y.
  bool factor_free() const { return kind == Kind::constant; }

  Intensity scaled(double factor) const;
};

/// Insurance premium c(t, y) and reinsurance premium q(t, y, u) for one line.
///
/// The built-in principles are polynomials in the retention u and are
/// evaluated by their algebraic formula for every real u. Custom principles
/// supply their own first and second u-derivatives (and their own extension
/// outside [0, 1]).
struct PremiumPrinciple {
  enum class Kind { expected_value, variance, custom };

  Kind kind = Kind::expected_value;
  double theta = 0.1;    // insurer loading
  double theta_r = 0.2;  // reinsurer loading

  std::function<double(double, double)> c_fn;
  std::function<double(double, double, double)> q_fn;
  std::function<double(double, double, double)> dq_fn;
  std::function<double(double, double, double)> d2q_fn;

  static PremiumPrinciple expected_value(double theta, double theta_r);
  static PremiumPrinciple variance(double theta, double theta_r);
  static PremiumPrinciple custom(std::function<double(double, double)> c,
                                 std::function<double(double, double, double)> q,
                                 std::function<double(double, double, double)> dq,
                                 std::function<double(double, double, double)> d2q);
};

/// One business line: Cox arrivals driven by the factor
/// dY = b(t) dt + a(t) dW, claim sizes, premia and the thinning bound delta(t).
struct InsuranceLine {
  Intensity intensity;
  TimeCoefficient drift = 0.0;  // b(t)
  TimeCoefficient vol = 0.0;    // a(t)
  double y0 = 0.0;
  ClaimDistribution claims;
  PremiumPrinciple premium;
  TimeCoefficient delta = 1.0;

  double lambda(double t, double y) const { return intensity(t, y); }
  double c(double t, double y) const;
  double q(double t, double y, double u) const;
  double dq(double t, double y, double u) const;
  double d2q(double t, double y, double u) const;
};

struct FinancialMarket {
  enum class Jump { none, multiplicative };

  TimeCoefficient r = 0.0;
  TimeCoefficient mu = 0.0;
  TimeCoefficient sigma = 0.1;
  Jump jump = Jump::none;
  TimeCoefficient k = 0.0;  // K(t, z) = k(t) z when jump == multiplicative
  double p0 = 1.0;

  /// Jump coefficient k(t); zero without common shock.
  double jump_scale(double t) const { return jump == Jump::multiplicative ? k(t) : 0.0; }
  double K(double t, double z) const { return jump_scale(t) * z; }
};

struct Preferences {
  double gamma = 0.5;  // risk aversion
  double horizon = 1.0;
  double initial_wealth = 1.0;
};

/// The coupled market. Line 2 is the catastrophe line linked to the asset by K.
struct ModelConfig {
  std::array<InsuranceLine, 2> lines;
  FinancialMarket market;
  Preferences prefs;

  /// 1-based line accessor.
  const InsuranceLine& line(int i) const;
  InsuranceLine& line(int i);

  double horizon() const { return prefs.horizon; }

  /// Structural sanity (gamma > 0, T > 0, p0 > 0, sigma defined). Throws ConfigError.
  void check() const;
};

/// B(t1, t2) = exp(int_{t1}^{t2} r(s) ds) for 0 <= t1 <= t2 <= T.
double accumulation_factor(const ModelConfig& cfg, double t1, double t2);

/// B-bar = exp(int_0^T |r(s)| ds).
double accumulation_bound(const ModelConfig& cfg);

/// gamma * B(t, T), the scale in front of every exponent of the strategy problem.
double effective_risk_aversion(const ModelConfig& cfg, double t);

ModelConfig with_jump_scale(const ModelConfig& cfg, double factor);
ModelConfig with_intensity_scale(const ModelConfig& cfg, int line, double factor);
ModelConfig without_shock(const ModelConfig& cfg);

}  // namespace cshock

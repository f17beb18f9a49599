#include <doctest.h>

#include "cshock/claims.hpp"
#include "cshock/coefficient.hpp"
#include "cshock/config_json.hpp"
#include "cshock/model.hpp"
#include "cshock/types.hpp"
#include "cshock/validation.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <random>

using namespace cshock;
using boost::math::quadrature::gauss_kronrod;

namespace {

ModelConfig base_config() {
  ModelConfig cfg;
  cfg.prefs = {0.5, 1.0, 1.0};
  cfg.market.r = 0.02;
  cfg.market.mu = 0.05;
  cfg.market.sigma = 0.1;
  for (auto& l : cfg.lines) {
    l.intensity = Intensity::constant(2.0);
    l.claims = ClaimDistribution::exponential(1.0);
    l.premium = PremiumPrinciple::expected_value(0.1, 0.3);
    l.vol = 0.2;
    l.delta = 5.0;
  }
  return cfg;
}

// Reference E[Z^j e^{cZ}] by adaptive Gauss-Kronrod on the density.
double quad_moment(double rate, double cap, double c, int j) {
  const double norm = std::isfinite(cap) ? -std::expm1(-rate * cap) : 1.0;
  auto f = [&](double z) { return std::pow(z, j) * rate * std::exp((c - rate) * z) / norm; };
  double err = 0.0;
  const double hi = std::isfinite(cap) ? cap : std::numeric_limits<double>::infinity();
  return gauss_kronrod<double, 61>::integrate(f, 0.0, hi, 15, 1e-13, &err);
}

}  // namespace

TEST_CASE("time coefficient integrals are exact for every representation") {
  const auto c = TimeCoefficient(0.02);
  CHECK(c.integral(0.0, 1.0) == doctest::Approx(0.02).epsilon(1e-15));

  const auto pw = TimeCoefficient::piecewise({0.5}, {0.02, 0.04});
  CHECK(pw(0.25) == 0.02);
  CHECK(pw(0.5) == 0.04);  // right-continuous
  CHECK(pw.integral(0.0, 1.0) == doctest::Approx(0.03).epsilon(1e-15));
  CHECK(pw.integral(0.2, 0.7) == doctest::Approx(0.3 * 0.02 + 0.2 * 0.04).epsilon(1e-14));

  const auto tab = TimeCoefficient::tabulated({0.0, 0.3, 1.0}, {0.01, -0.02, 0.05});
  for (auto [a, b] : {std::pair{0.0, 1.0}, {0.1, 0.9}, {-0.5, 1.5}, {0.31, 0.32}}) {
    auto f = [&](double t) { return tab(t); };
    auto f2 = [&](double t) { return tab(t) * tab(t); };
    auto fa = [&](double t) { return std::abs(tab(t)); };
    CHECK(tab.integral(a, b) == doctest::Approx(gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14)).epsilon(1e-10));
    CHECK(tab.integral_of_square(a, b) ==
          doctest::Approx(gauss_kronrod<double, 61>::integrate(f2, a, b, 20, 1e-14)).epsilon(1e-10));
    CHECK(tab.integral_of_abs(a, b) ==
          doctest::Approx(gauss_kronrod<double, 61>::integrate(fa, a, b, 20, 1e-14)).epsilon(1e-10));
  }
  CHECK(tab.max_slope() == doctest::Approx(0.07 / 0.7));
  CHECK(tab.max_on(0.0, 1.0) == doctest::Approx(0.05));
  CHECK(tab.min_on(0.0, 1.0) == doctest::Approx(-0.02));
  CHECK(pw.max_slope() == std::numeric_limits<double>::infinity());

  CHECK_THROWS_AS(TimeCoefficient::piecewise({0.5, 0.4}, {1, 2, 3}), ConfigError);
  CHECK_THROWS_AS(TimeCoefficient::tabulated({0.0}, {1.0, 2.0}), ConfigError);
}

TEST_CASE("accumulation factor") {
  auto cfg = base_config();
  cfg.market.r = 0.0;
  CHECK(accumulation_factor(cfg, 0.2, 0.7) == 1.0);

  cfg.market.r = 0.02;
  CHECK(accumulation_factor(cfg, 0.0, 1.0) == doctest::Approx(1.02020134).epsilon(1e-9));

  cfg.market.r = TimeCoefficient::piecewise({0.5}, {0.02, 0.04});
  CHECK(accumulation_factor(cfg, 0.0, 1.0) == doctest::Approx(std::exp(0.03)).epsilon(1e-14));

  cfg.market.r = TimeCoefficient::tabulated({0.0, 0.4, 1.0}, {0.03, -0.05, 0.01});
  auto r = [&](double t) { return cfg.market.r(t); };
  auto absr = [&](double t) { return std::abs(cfg.market.r(t)); };
  CHECK(accumulation_factor(cfg, 0.0, 1.0) ==
        doctest::Approx(std::exp(gauss_kronrod<double, 61>::integrate(r, 0.0, 1.0, 20, 1e-14))).epsilon(1e-12));
  CHECK(accumulation_bound(cfg) ==
        doctest::Approx(std::exp(gauss_kronrod<double, 61>::integrate(absr, 0.0, 1.0, 20, 1e-14))).epsilon(1e-12));

  // chain rule B(t1,t2) B(t2,t3) = B(t1,t3)
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    double t[3] = {U(rng), U(rng), U(rng)};
    std::sort(t, t + 3);
    const double lhs = accumulation_factor(cfg, t[0], t[1]) * accumulation_factor(cfg, t[1], t[2]);
    CHECK(lhs == doctest::Approx(accumulation_factor(cfg, t[0], t[2])).epsilon(1e-12));
  }

  CHECK_THROWS_AS(accumulation_factor(cfg, 0.6, 0.5), DomainError);
  CHECK_THROWS_AS(accumulation_factor(cfg, -0.1, 0.5), DomainError);
  CHECK_THROWS_AS(accumulation_factor(cfg, 0.0, 1.5), DomainError);
}

TEST_CASE("tilted moments: closed forms against quadrature") {
  const auto e1 = ClaimDistribution::exponential(1.0);
  CHECK(e1.tilted_moment(0.0, 1) == doctest::Approx(1.0).epsilon(1e-15));

  const auto e2 = ClaimDistribution::exponential(2.0);
  CHECK(e2.tilted_moment(1.0, 1) == doctest::Approx(2.0).epsilon(1e-15));

  for (double c : {-3.0, -0.5, 0.0, 0.4, 1.2, 1.9}) {
    for (int j = 0; j <= 2; ++j) {
      CHECK(e2.tilted_moment(c, j) == doctest::Approx(quad_moment(2.0, INFINITY, c, j)).epsilon(1e-10));
    }
    CHECK(e2.tilted_moment(c, 1) == doctest::Approx(2.0 / ((2.0 - c) * (2.0 - c))).epsilon(1e-14));
  }
  CHECK_THROWS_AS(e2.tilted_moment(2.0, 1), DivergenceError);
  CHECK_THROWS_AS(e2.tilted_moment(2.5, 0), DivergenceError);

  // the truncated law at the tilt 0.01 gamma B with gamma = 0.5, r = 0.02, T = 1
  const auto tr = ClaimDistribution::truncated_exponential(1.0, 100.0);
  const double c0 = 0.01 * 0.5 * std::exp(0.02);
  for (double c : {c0, -2.0, -0.3, 0.0, 0.5, 0.99, 1.0, 1.01, 1.5, 3.0}) {
    for (int j = 0; j <= 2; ++j) {
      CHECK(tr.tilted_moment(c, j) == doctest::Approx(quad_moment(1.0, 100.0, c, j)).epsilon(1e-10));
    }
  }
  // compact support: no divergence for any moderate tilt, typed error only past overflow
  CHECK(std::isfinite(tr.tilted_moment(5.0, 2)));
  CHECK_THROWS_AS(tr.tilted_moment(50.0, 0), DivergenceError);

  const auto small = ClaimDistribution::truncated_exponential(0.7, 2.5);
  for (double c : {-1.0, -0.1, 0.0, 0.2, 0.69, 0.71, 1.5}) {
    for (int j = 0; j <= 2; ++j) {
      CHECK(small.tilted_moment(c, j) == doctest::Approx(quad_moment(0.7, 2.5, c, j)).epsilon(1e-10));
    }
  }

  const auto disc = ClaimDistribution::discrete({0.5, 1.0, 4.0}, {0.2, 0.5, 0.3});
  const double direct = 0.2 * 0.5 * std::exp(0.3 * 0.5) + 0.5 * std::exp(0.3) + 0.3 * 4.0 * std::exp(1.2);
  CHECK(disc.tilted_moment(0.3, 1) == doctest::Approx(direct).epsilon(1e-14));
  CHECK(disc.mean() == doctest::Approx(0.1 + 0.5 + 1.2).epsilon(1e-15));
  CHECK_THROWS_AS(ClaimDistribution::discrete({1.0, 2.0}, {0.5, 0.4}), ConfigError);
  CHECK_THROWS_AS(ClaimDistribution::discrete({-1.0}, {1.0}), ConfigError);
}

TEST_CASE("tilted moments: monotone in the tilt, mean at zero tilt") {
  const ClaimDistribution dists[] = {ClaimDistribution::exponential(1.5),
                                     ClaimDistribution::truncated_exponential(1.0, 10.0),
                                     ClaimDistribution::discrete({0.3, 2.0}, {0.6, 0.4})};
  for (const auto& d : dists) {
    CHECK(d.tilted_moment(0.0, 1) == doctest::Approx(d.mean()).epsilon(1e-12));
    CHECK(d.tilted_moment(0.0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    for (int order = 1; order <= 2; ++order) {
      double prev = d.tilted_moment(-2.0, order);
      for (double c = -1.95; c < 1.45; c += 0.05) {
        const double v = d.tilted_moment(c, order);
        CHECK(v > prev);
        prev = v;
      }
    }
  }
}

TEST_CASE("claim sampling matches the first two moments") {
  const ClaimDistribution dists[] = {ClaimDistribution::exponential(0.5),
                                     ClaimDistribution::truncated_exponential(1.0, 2.0),
                                     ClaimDistribution::discrete({1.0, 3.0}, {0.25, 0.75})};
  std::mt19937_64 rng(11);
  for (const auto& d : dists) {
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double z = d.sample(rng);
      CHECK_MESSAGE(z >= 0.0, "negative claim");
      CHECK(z <= d.support_bound());
      s += z;
      s2 += z * z;
    }
    const double mean = s / n;
    const double var = d.second_moment() - d.mean() * d.mean();
    CHECK(std::abs(mean - d.mean()) < 3.0 * std::sqrt(var / n));
  }
}

TEST_CASE("premium principles and premium validation") {
  auto cfg = base_config();
  auto& l = cfg.line(1);
  const auto grid = SampleGrid::around(cfg, 1);

  auto ok = validate_premium(l, grid);
  CHECK(ok.ok());

  // expected value: q(t,y,0) - c = lambda E[Z] (theta_R - theta)
  CHECK(l.q(0.3, 0.0, 0.0) - l.c(0.3, 0.0) == doctest::Approx(2.0 * 1.0 * 0.2));
  CHECK(l.q(0.3, 0.0, 1.0) == 0.0);

  l.premium = PremiumPrinciple::expected_value(0.2, 0.2);
  auto eq = validate_premium(l, grid);
  CHECK_FALSE(eq.ok());
  CHECK_FALSE(eq.find("no_risk_free_profit")->passed);
  CHECK_FALSE(eq.find("loadings")->passed);

  // variance: c = lambda (E Z + theta E Z^2), q = lambda (E Z (1-u) + theta_R E Z^2 (1-u)^2)
  l.premium = PremiumPrinciple::variance(0.1, 0.3);
  CHECK(l.c(0.0, 0.0) == doctest::Approx(2.0 * (1.0 + 0.1 * 2.0)));
  CHECK(l.q(0.0, 0.0, 0.25) == doctest::Approx(2.0 * (0.75 + 0.3 * 2.0 * 0.5625)));
  CHECK(l.dq(0.0, 0.0, 0.25) == doctest::Approx(-2.0 * (1.0 + 2.0 * 0.3 * 0.75 * 2.0)));
  CHECK(l.d2q(0.0, 0.0, 0.25) == doctest::Approx(2.0 * 2.0 * 0.3 * 2.0));
  CHECK(validate_premium(l, grid).ok());

  // custom q = (1-u)^2 with c = 0.5: q(.,.,0) = 1 > 0.5 holds, all checks by evaluation
  l.premium = PremiumPrinciple::custom([](double, double) { return 0.5; },
                                       [](double, double, double u) { return (1 - u) * (1 - u); },
                                       [](double, double, double u) { return -2 * (1 - u); },
                                       [](double, double, double) { return 2.0; });
  auto custom = validate_premium(l, grid);
  CHECK(custom.find("no_risk_free_profit")->passed);
  CHECK(custom.find("no_risk_free_profit")->value.value() == doctest::Approx(0.5));
  l.premium.c_fn = [](double, double) { return 1.5; };
  auto custom_bad = validate_premium(l, grid);
  CHECK_FALSE(custom_bad.find("no_risk_free_profit")->passed);
  CHECK(custom_bad.find("no_risk_free_profit")->worst_point.has_value());
}

TEST_CASE("admissibility: moment thresholds and compact support") {
  auto cfg = base_config();
  const double Bbar = accumulation_bound(cfg);
  const double threshold = 2.0 * cfg.prefs.gamma * Bbar;

  for (auto& l : cfg.lines) l.claims = ClaimDistribution::exponential(threshold * 1.01);
  auto pass = validate_admissibility(cfg);
  CHECK(pass.find("line2.moment_exp_2gammaBbarZ")->passed);
  CHECK(pass.find("line1.moment_Z2_exp_gammaBbarZ")->passed);

  for (auto& l : cfg.lines) l.claims = ClaimDistribution::exponential(threshold);
  auto fail = validate_admissibility(cfg);
  CHECK_FALSE(fail.find("line2.moment_exp_2gammaBbarZ")->passed);
  CHECK(fail.find("line2.moment_exp_2gammaBbarZ")->detail.find("divergent") != std::string::npos);

  for (auto& l : cfg.lines) l.claims = ClaimDistribution::truncated_exponential(0.01, 30.0);
  cfg.prefs.gamma = 5.0;
  auto compact = validate_admissibility(cfg);
  for (const char* name : {"line1.moment_exp_2gammaBbarZ", "line1.moment_Z2_exp_gammaBbarZ",
                           "line2.moment_exp_2gammaBbarZ", "line2.moment_Z2_exp_gammaBbarZ"}) {
    CHECK(compact.find(name)->passed);
  }

  // dominance: delta below lambda is flagged with the point
  cfg = base_config();
  cfg.line(1).delta = 1.0;
  auto dom = validate_admissibility(cfg);
  CHECK_FALSE(dom.find("line1.delta_dominates_lambda")->passed);
  CHECK(dom.find("line1.delta_dominates_lambda")->worst_point.has_value());

  // kappa is reported with the documented formula
  cfg = base_config();
  auto rep = validate_admissibility(cfg);
  double kappa = -1.0;
  for (auto& [k, v] : rep.quantities) {
    if (k == "kappa") kappa = v;
  }
  const double expected = 2.0 / 0.01 * Bbar * cfg.line(2).claims.tilted_moment(0.5 * Bbar, 0);
  CHECK(kappa == doctest::Approx(expected));
  CHECK(rep.find("kappa_integrability")->passed);
  CHECK(rep.to_json()["ok"].get<bool>() == rep.ok());
  CHECK(rep.to_text().find("kappa") != std::string::npos);
}

TEST_CASE("model JSON round trip and hash") {
  auto cfg = base_config();
  cfg.market.jump = FinancialMarket::Jump::multiplicative;
  cfg.market.k = TimeCoefficient::piecewise({0.5}, {0.01, 0.02});
  cfg.line(2).intensity = Intensity::exponential(10.0, -1.0);
  cfg.line(2).claims = ClaimDistribution::truncated_exponential(1.0, 20.0);
  cfg.line(1).premium = PremiumPrinciple::variance(0.1, 0.2);
  cfg.line(1).drift = TimeCoefficient::tabulated({0.0, 1.0}, {0.1, -0.1});

  const auto j = to_json(cfg);
  const auto back = model_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(back.line(2).lambda(0.3, -0.2) == doctest::Approx(10.0 * std::exp(0.2)));
  CHECK(back.market.k(0.7) == 0.02);

  auto other = cfg;
  other.prefs.gamma = 0.6;
  CHECK(config_hash(other) != config_hash(cfg));

  auto bad = j;
  bad["lines"].erase(1);
  CHECK_THROWS_AS(model_from_json(bad), ConfigError);
  bad = j;
  bad["market"]["sigma"] = 0.0;
  CHECK_THROWS_AS(model_from_json(bad), ConfigError);
}

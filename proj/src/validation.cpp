#include "cshock/validation.hpp"

#include "cshock/types.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

namespace cshock {

bool ValidationReport::ok() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

const CheckResult* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void ValidationReport::merge(const ValidationReport& other) {
  for (const auto& c : other.checks) {
    CheckResult copy = c;
    if (!other.subject.empty()) copy.name = other.subject + "." + c.name;
    checks.push_back(std::move(copy));
  }
  for (const auto& [k, v] : other.quantities) {
    quantities.emplace_back(other.subject.empty() ? k : other.subject + "." + k, v);
  }
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json j;
  j["subject"] = subject;
  j["ok"] = ok();
  auto& arr = j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json e{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}};
    if (c.worst_point) e["worst_point"] = *c.worst_point;
    if (c.value) e["value"] = std::isfinite(*c.value) ? nlohmann::json(*c.value) : nlohmann::json(nullptr);
    arr.push_back(std::move(e));
  }
  auto& q = j["quantities"] = nlohmann::json::object();
  for (const auto& [k, v] : quantities) q[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  return j;
}

std::string ValidationReport::to_text() const {
  std::string s = fmt::format("{}: {}\n", subject.empty() ? "validation" : subject, ok() ? "ok" : "FAILED");
  for (const auto& c : checks) {
    s += fmt::format("  [{}] {}", c.passed ? "pass" : "FAIL", c.name);
    if (!c.detail.empty()) s += " - " + c.detail;
    s += "\n";
  }
  for (const auto& [k, v] : quantities) s += fmt::format("  {} = {:.6g}\n", k, v);
  return s;
}

SampleGrid SampleGrid::around(const ModelConfig& cfg, int line, int nt, int ny, int nu) {
  const auto& l = cfg.line(line);
  const double T = cfg.horizon();
  const double spread = 5.0 * l.vol.max_abs_on(0.0, T) * std::sqrt(T);
  SampleGrid g;
  for (int i = 0; i < nt; ++i) g.t.push_back(T * i / std::max(1, nt - 1));
  for (int i = 0; i < ny; ++i) {
    g.y.push_back(ny == 1 ? l.y0 : l.y0 - spread + 2.0 * spread * i / (ny - 1));
  }
  for (int i = 0; i < nu; ++i) g.u.push_back(double(i) / std::max(1, nu - 1));
  return g;
}

namespace {

// Track the worst (most negative) margin over a grid.
struct Worst {
  double margin = std::numeric_limits<double>::infinity();
  std::vector<double> point;
  void see(double m, std::vector<double> p) {
    if (m < margin) {
      margin = m;
      point = std::move(p);
    }
  }
};

CheckResult pointwise(const std::string& name, const Worst& w, bool strict, const std::string& what) {
  CheckResult c;
  c.name = name;
  c.passed = strict ? w.margin > 0.0 : w.margin >= -1e-12;
  c.value = w.margin;
  if (!c.passed) {
    c.worst_point = w.point;
    c.detail = fmt::format("{} violated, worst margin {:.6g}", what, w.margin);
  } else {
    c.detail = fmt::format("{}, min margin {:.6g}", what, w.margin);
  }
  return c;
}

}  // namespace

ValidationReport validate_premium(const InsuranceLine& line, const SampleGrid& grid) {
  ValidationReport r;
  r.subject = "premium";
  if (grid.t.empty() || grid.y.empty() || grid.u.empty()) throw ConfigError("validate_premium: empty sampling grid");

  if (line.premium.kind != PremiumPrinciple::Kind::custom) {
    CheckResult c;
    c.name = "loadings";
    c.passed = line.premium.theta > 0.0 && line.premium.theta_r > line.premium.theta;
    c.detail = fmt::format("theta = {}, theta_R = {} (need theta_R > theta > 0)", line.premium.theta,
                           line.premium.theta_r);
    r.add(c);
  }

  Worst null_free, no_arbitrage, decreasing, convex;
  for (double t : grid.t) {
    for (double y : grid.y) {
      null_free.see(-std::abs(line.q(t, y, 1.0)), {t, y, 1.0});
      no_arbitrage.see(line.q(t, y, 0.0) - line.c(t, y), {t, y, 0.0});
      for (double u : grid.u) {
        decreasing.see(-line.dq(t, y, u), {t, y, u});
        convex.see(line.d2q(t, y, u), {t, y, u});
      }
    }
  }
  // |q(t,y,1)| must vanish up to rounding
  auto nf = pointwise("null_reinsurance_free", null_free, false, "q(t,y,1) = 0");
  nf.passed = null_free.margin >= -1e-12;
  r.add(nf);
  r.add(pointwise("no_risk_free_profit", no_arbitrage, true, "q(t,y,0) > c(t,y)"));
  r.add(pointwise("decreasing_in_retention", decreasing, false, "dq/du <= 0"));
  r.add(pointwise("convex_in_retention", convex, false, "d2q/du2 >= 0"));
  return r;
}

ValidationReport validate_admissibility(const ModelConfig& cfg) {
  ValidationReport r;
  r.subject = "admissibility";
  const double T = cfg.horizon();
  const double gamma = cfg.prefs.gamma;
  const double Bbar = accumulation_bound(cfg);
  r.quantities.emplace_back("B_bar", Bbar);

  for (int i = 1; i <= 2; ++i) {
    const auto& l = cfg.line(i);
    const auto grid = SampleGrid::around(cfg, i);
    Worst positive, dom_lambda, dom_q;
    for (double t : grid.t) {
      for (double y : grid.y) {
        const double lam = l.lambda(t, y);
        positive.see(lam, {t, y});
        dom_lambda.see(l.delta(t) - lam, {t, y});
        dom_q.see(l.delta(t) - l.q(t, y, 0.0), {t, y});
      }
    }
    r.add(pointwise(fmt::format("line{}.intensity_positive", i), positive, true, "lambda > 0"));
    r.add(pointwise(fmt::format("line{}.delta_dominates_lambda", i), dom_lambda, false, "lambda <= delta"));
    r.add(pointwise(fmt::format("line{}.delta_dominates_q0", i), dom_q, false, "q(t,y,0) <= delta"));

    const struct {
      const char* name;
      double tilt;
      int order;
    } moments[] = {{"moment_exp_2gammaBbarZ", 2.0 * gamma * Bbar, 0}, {"moment_Z2_exp_gammaBbarZ", gamma * Bbar, 2}};
    for (const auto& m : moments) {
      CheckResult c;
      c.name = fmt::format("line{}.{}", i, m.name);
      try {
        const double v = l.claims.tilted_moment(m.tilt, m.order);
        c.value = v;
        c.passed = std::isfinite(v);
        c.detail = fmt::format("tilt {:.6g}: {:.6g}", m.tilt, v);
      } catch (const DivergenceError& e) {
        c.passed = false;
        c.detail = fmt::format("divergent: {}", e.what());
      }
      r.add(c);
    }
  }

  // bounded market price of risk
  {
    const auto grid = SampleGrid::around(cfg, 2, 201, 1, 1);
    double worst = 0.0;
    double sigma_min = std::numeric_limits<double>::infinity();
    for (double t : grid.t) {
      const double s = cfg.market.sigma(t);
      sigma_min = std::min(sigma_min, s);
      worst = std::max(worst, std::abs(cfg.market.mu(t) - cfg.market.r(t)) / s);
    }
    sigma_min = std::min(sigma_min, cfg.market.sigma.min_on(0.0, T));
    CheckResult c;
    c.name = "market_price_of_risk_bounded";
    c.passed = std::isfinite(worst) && sigma_min > 0.0;
    c.value = worst;
    c.detail = fmt::format("sup |mu - r| / sigma = {:.6g}", worst);
    r.add(c);
    r.quantities.emplace_back("market_price_of_risk_bound", worst);
    r.quantities.emplace_back("sigma_min", sigma_min);

    CheckResult s;
    s.name = "sigma_bounded_below";
    s.passed = sigma_min > 0.0;
    s.value = sigma_min;
    s.detail = fmt::format("min sigma = {:.6g}", sigma_min);
    r.add(s);

    // jump sizes must keep the price positive
    CheckResult k;
    k.name = "jump_below_one";
    const double kmax = cfg.market.jump == FinancialMarket::Jump::multiplicative ? cfg.market.k.max_on(0.0, T) : 0.0;
    const double kmin = cfg.market.jump == FinancialMarket::Jump::multiplicative ? cfg.market.k.min_on(0.0, T) : 0.0;
    const double D = cfg.line(2).claims.support_bound();
    k.value = kmax * D;
    k.passed = kmin >= 0.0 && (kmax == 0.0 || kmax * D < 1.0);
    k.detail = fmt::format("sup K = k_max * D = {:.6g}", kmax == 0.0 ? 0.0 : kmax * D);
    r.add(k);

    // kappa condition
    CheckResult kc;
    kc.name = "kappa_integrability";
    try {
      const double m = cfg.line(2).claims.tilted_moment(gamma * Bbar, 0);
      const double kappa = 2.0 / (sigma_min * sigma_min) * Bbar * m;
      r.quantities.emplace_back("kappa", kappa);
      const auto& delta = cfg.line(2).delta;
      // log of int delta e^{kappa delta} dt, factored around the peak so it
      // stays representable when kappa delta is in the hundreds
      const double peak = kappa * delta.max_on(0.0, T);
      auto integrand = [&](double t) { return delta(t) * std::exp(kappa * delta(t) - peak); };
      const double scaled = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, T, 10, 1e-10);
      const double log_val = peak + std::log(scaled);
      kc.value = log_val;
      kc.passed = std::isfinite(log_val);
      r.quantities.emplace_back("log_kappa_integral", log_val);
      kc.detail = fmt::format("kappa = {:.6g}, log int delta e^(kappa delta) dt = {:.6g}", kappa, log_val);
    } catch (const DivergenceError& e) {
      kc.passed = false;
      kc.detail = fmt::format("divergent: {}", e.what());
    }
    r.add(kc);
  }
  return r;
}

}  // namespace cshock

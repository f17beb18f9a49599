#include "cshock/presets.hpp"

#include "cshock/types.hpp"

#include <fmt/format.h>

namespace cshock::presets {

namespace {

InsuranceLine line(Intensity intensity, ClaimDistribution claims, PremiumPrinciple premium, double vol, double y0,
                   double delta) {
  InsuranceLine l;
  l.intensity = std::move(intensity);
  l.claims = std::move(claims);
  l.premium = std::move(premium);
  l.vol = vol;
  l.y0 = y0;
  l.delta = delta;
  return l;
}

}  // namespace

ModelConfig fig1() {
  ModelConfig cfg;
  cfg.prefs = {0.5, 1.0, 1.0};
  cfg.market.r = 0.02;
  cfg.market.mu = 0.05;
  cfg.market.sigma = 0.1;
  cfg.market.jump = FinancialMarket::Jump::multiplicative;
  cfg.market.k = 0.01;
  cfg.line(1) = line(Intensity::constant(5.0), ClaimDistribution::truncated_exponential(1.0, 10.0),
                     PremiumPrinciple::expected_value(0.1, 0.2), 0.2, 0.0, 10.0);
  // lambda2 on y0 +- 5 a sqrt(T) stays below 10 e^{1.2}; q(., ., 0) = 1.3 lambda2
  cfg.line(2) = line(Intensity::exponential(10.0, -1.0), ClaimDistribution::exponential(1.0),
                     PremiumPrinciple::expected_value(0.1, 0.3), 0.2, -0.2, 45.0);
  return cfg;
}

ModelConfig fig2() {
  ModelConfig cfg = fig1();
  cfg.line(2).claims = ClaimDistribution::truncated_exponential(1.0, 100.0);
  cfg.market.k = 0.005;  // keeps k D < 1 with D = 100
  return cfg;
}

ModelConfig evp_comparison() {
  ModelConfig cfg;
  cfg.prefs = {0.5, 1.0, 1.0};
  cfg.market.r = 0.02;
  cfg.market.mu = 0.06;
  cfg.market.sigma = 0.2;
  cfg.market.jump = FinancialMarket::Jump::multiplicative;
  cfg.market.k = 0.04;
  cfg.line(1) = line(Intensity::constant(3.0), ClaimDistribution::truncated_exponential(1.0, 10.0),
                     PremiumPrinciple::expected_value(0.1, 0.25), 0.3, 0.0, 6.0);
  cfg.line(2) = line(Intensity::exponential(2.0, -1.0), ClaimDistribution::truncated_exponential(1.0, 10.0),
                     PremiumPrinciple::expected_value(0.15, 0.3), 0.3, 0.0, 12.0);
  return cfg;
}

ModelConfig sim_evp() {
  ModelConfig cfg;
  cfg.prefs = {0.5, 1.0, 1.0};
  cfg.market.r = 0.02;
  cfg.market.mu = 0.07;
  cfg.market.sigma = 0.25;
  cfg.market.jump = FinancialMarket::Jump::multiplicative;
  cfg.market.k = 0.05;
  cfg.line(1) = line(Intensity::exponential(2.0, 0.5), ClaimDistribution::truncated_exponential(1.0, 8.0),
                     PremiumPrinciple::expected_value(0.2, 0.35), 0.3, 0.0, 10.0);
  cfg.line(2) = line(Intensity::exponential(1.5, -0.5), ClaimDistribution::truncated_exponential(1.0, 8.0),
                     PremiumPrinciple::expected_value(0.2, 0.4), 0.3, 0.0, 10.0);
  return cfg;
}

ModelConfig sim_variance() {
  ModelConfig cfg;
  cfg.prefs = {0.4, 1.0, 1.0};
  cfg.market.r = 0.01;
  cfg.market.mu = 0.05;
  cfg.market.sigma = 0.2;
  cfg.market.jump = FinancialMarket::Jump::multiplicative;
  cfg.market.k = 0.08;
  cfg.line(1) = line(Intensity::logistic(2.0, 1.0, 2.0), ClaimDistribution::truncated_exponential(1.5, 6.0),
                     PremiumPrinciple::variance(0.1, 0.2), 0.4, 0.0, 6.0);
  cfg.line(2) = line(Intensity::logistic(3.0, 0.2, 1.0), ClaimDistribution::truncated_exponential(1.2, 6.0),
                     PremiumPrinciple::variance(0.1, 0.25), 0.4, 0.0, 8.0);
  return cfg;
}

ModelConfig sim_no_shock() {
  ModelConfig cfg = sim_evp();
  cfg.market.jump = FinancialMarket::Jump::none;
  cfg.market.k = 0.0;
  return cfg;
}

std::vector<std::string> names() {
  return {"fig1", "fig2", "evp-comparison", "sim-evp", "sim-variance", "sim-no-shock"};
}

ModelConfig by_name(const std::string& name) {
  if (name == "fig1") return fig1();
  if (name == "fig2") return fig2();
  if (name == "evp-comparison") return evp_comparison();
  if (name == "sim-evp") return sim_evp();
  if (name == "sim-variance") return sim_variance();
  if (name == "sim-no-shock") return sim_no_shock();
  throw ConfigError(fmt::format("unknown preset '{}'", name));
}

}  // namespace cshock::presets

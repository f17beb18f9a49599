#include "cshock/config_json.hpp"

#include "cshock/types.hpp"

#include <fmt/format.h>

#include <fstream>

namespace cshock {

using nlohmann::json;

namespace {

double number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(fmt::format("'{}' must be a number", key));
  return j.at(key).get<double>();
}

double required_number(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(fmt::format("missing required field '{}'", key));
  return number(j, key, 0.0);
}

std::string kind_of(const json& j) {
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ConfigError("object without a string 'kind'");
  return j.at("kind").get<std::string>();
}

TimeCoefficient coefficient_or(const json& j, const char* key, TimeCoefficient fallback) {
  return j.contains(key) ? coefficient_from_json(j.at(key)) : fallback;
}

json claims_to_json(const ClaimDistribution& d) {
  switch (d.kind()) {
    case ClaimDistribution::Kind::exponential:
      return {{"kind", "exponential"}, {"rate", d.rate()}};
    case ClaimDistribution::Kind::truncated_exponential:
      return {{"kind", "truncated_exponential"}, {"rate", d.rate()}, {"cap", d.cap()}};
    case ClaimDistribution::Kind::discrete:
      return {{"kind", "discrete"},
              {"atoms", std::vector<double>(d.atoms().begin(), d.atoms().end())},
              {"weights", std::vector<double>(d.weights().begin(), d.weights().end())}};
  }
  return {};
}

ClaimDistribution claims_from_json(const json& j) {
  const auto kind = kind_of(j);
  if (kind == "exponential") return ClaimDistribution::exponential(required_number(j, "rate"));
  if (kind == "truncated_exponential") {
    return ClaimDistribution::truncated_exponential(required_number(j, "rate"), required_number(j, "cap"));
  }
  if (kind == "discrete") {
    return ClaimDistribution::discrete(j.at("atoms").get<std::vector<double>>(),
                                       j.at("weights").get<std::vector<double>>());
  }
  throw ConfigError(fmt::format("unknown claim distribution '{}'", kind));
}

json intensity_to_json(const Intensity& i) {
  switch (i.kind) {
    case Intensity::Kind::constant:
      return {{"kind", "constant"}, {"base", coefficient_to_json(i.base)}};
    case Intensity::Kind::exponential:
      return {{"kind", "exponential"}, {"base", coefficient_to_json(i.base)}, {"slope", i.slope}};
    case Intensity::Kind::logistic:
      return {{"kind", "logistic"},
              {"base", coefficient_to_json(i.base)},
              {"low", i.low},
              {"high", i.high},
              {"scale", i.scale}};
    case Intensity::Kind::custom:
      throw ConfigError("custom intensities cannot be serialized");
  }
  return {};
}

Intensity intensity_from_json(const json& j) {
  const auto kind = kind_of(j);
  const auto base = coefficient_or(j, "base", 1.0);
  if (kind == "constant") return Intensity::constant(base);
  if (kind == "exponential") return Intensity::exponential(base, number(j, "slope", 0.0));
  if (kind == "logistic") {
    return Intensity::logistic(base, number(j, "low", 0.0), number(j, "high", 1.0), number(j, "scale", 1.0));
  }
  throw ConfigError(fmt::format("unknown intensity kind '{}'", kind));
}

json premium_to_json(const PremiumPrinciple& p) {
  switch (p.kind) {
    case PremiumPrinciple::Kind::expected_value:
      return {{"kind", "expected_value"}, {"theta", p.theta}, {"theta_r", p.theta_r}};
    case PremiumPrinciple::Kind::variance:
      return {{"kind", "variance"}, {"theta", p.theta}, {"theta_r", p.theta_r}};
    case PremiumPrinciple::Kind::custom:
      throw ConfigError("custom premium principles cannot be serialized");
  }
  return {};
}

PremiumPrinciple premium_from_json(const json& j) {
  const auto kind = kind_of(j);
  const double theta = required_number(j, "theta");
  const double theta_r = required_number(j, "theta_r");
  if (kind == "expected_value") return PremiumPrinciple::expected_value(theta, theta_r);
  if (kind == "variance") return PremiumPrinciple::variance(theta, theta_r);
  throw ConfigError(fmt::format("unknown premium principle '{}'", kind));
}

}  // namespace

json coefficient_to_json(const TimeCoefficient& c) {
  auto knots = std::vector<double>(c.knots().begin(), c.knots().end());
  auto values = std::vector<double>(c.values().begin(), c.values().end());
  switch (c.kind()) {
    case TimeCoefficient::Kind::constant:
      return values[0];
    case TimeCoefficient::Kind::piecewise_constant:
      return {{"kind", "piecewise"}, {"breaks", knots}, {"values", values}};
    case TimeCoefficient::Kind::tabulated:
      return {{"kind", "tabulated"}, {"times", knots}, {"values", values}};
  }
  return {};
}

TimeCoefficient coefficient_from_json(const json& j) {
  if (j.is_number()) return TimeCoefficient(j.get<double>());
  if (!j.is_object()) throw ConfigError("coefficient must be a number or an object");
  const auto kind = kind_of(j);
  if (kind == "constant") return TimeCoefficient(required_number(j, "value"));
  if (kind == "piecewise") {
    return TimeCoefficient::piecewise(j.at("breaks").get<std::vector<double>>(),
                                      j.at("values").get<std::vector<double>>());
  }
  if (kind == "tabulated") {
    return TimeCoefficient::tabulated(j.at("times").get<std::vector<double>>(),
                                      j.at("values").get<std::vector<double>>());
  }
  throw ConfigError(fmt::format("unknown coefficient kind '{}'", kind));
}

json to_json(const ModelConfig& cfg) {
  json j;
  j["horizon"] = cfg.prefs.horizon;
  j["gamma"] = cfg.prefs.gamma;
  j["initial_wealth"] = cfg.prefs.initial_wealth;
  const auto& m = cfg.market;
  j["market"] = {{"r", coefficient_to_json(m.r)},
                 {"mu", coefficient_to_json(m.mu)},
                 {"sigma", coefficient_to_json(m.sigma)},
                 {"p0", m.p0},
                 {"jump",
                  m.jump == FinancialMarket::Jump::none
                      ? json{{"kind", "none"}}
                      : json{{"kind", "multiplicative"}, {"k", coefficient_to_json(m.k)}}}};
  j["lines"] = json::array();
  for (const auto& l : cfg.lines) {
    j["lines"].push_back({{"intensity", intensity_to_json(l.intensity)},
                          {"drift", coefficient_to_json(l.drift)},
                          {"vol", coefficient_to_json(l.vol)},
                          {"y0", l.y0},
                          {"delta", coefficient_to_json(l.delta)},
                          {"claims", claims_to_json(l.claims)},
                          {"premium", premium_to_json(l.premium)}});
  }
  return j;
}

ModelConfig model_from_json(const json& j) {
  try {
    ModelConfig cfg;
    cfg.prefs.horizon = required_number(j, "horizon");
    cfg.prefs.gamma = required_number(j, "gamma");
    cfg.prefs.initial_wealth = number(j, "initial_wealth", 0.0);

    const auto& m = j.at("market");
    cfg.market.r = coefficient_or(m, "r", 0.0);
    cfg.market.mu = coefficient_or(m, "mu", 0.0);
    cfg.market.sigma = coefficient_from_json(m.at("sigma"));
    cfg.market.p0 = number(m, "p0", 1.0);
    if (m.contains("jump")) {
      const auto kind = kind_of(m.at("jump"));
      if (kind == "multiplicative") {
        cfg.market.jump = FinancialMarket::Jump::multiplicative;
        cfg.market.k = coefficient_from_json(m.at("jump").at("k"));
      } else if (kind != "none") {
        throw ConfigError(fmt::format("unknown jump kind '{}'", kind));
      }
    }

    const auto& lines = j.at("lines");
    if (!lines.is_array() || lines.size() != 2) throw ConfigError("'lines' must be an array of exactly two lines");
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& lj = lines[i];
      auto& l = cfg.lines[i];
      l.intensity = intensity_from_json(lj.at("intensity"));
      l.drift = coefficient_or(lj, "drift", 0.0);
      l.vol = coefficient_or(lj, "vol", 0.0);
      l.y0 = number(lj, "y0", 0.0);
      l.delta = coefficient_from_json(lj.at("delta"));
      l.claims = claims_from_json(lj.at("claims"));
      l.premium = premium_from_json(lj.at("premium"));
    }
    cfg.check();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed model config: {}", e.what()));
  }
}

ModelConfig load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return model_from_json(j);
}

void save_model(const ModelConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << to_json(cfg).dump(2) << '\n';
}

std::string config_hash(const ModelConfig& cfg) {
  const std::string s = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace cshock

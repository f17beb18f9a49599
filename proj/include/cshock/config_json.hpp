#pragma once

#include "cshock/model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace cshock {

// Schema (times in years, rates per annum):
//
//   {
//     "horizon": 1.0, "gamma": 0.5, "initial_wealth": 1.0,
//     "market": { "r": C, "mu": C, "sigma": C, "p0": 1.0,
//                 "jump": { "kind": "none" | "multiplicative", "k": C } },
//     "lines": [ L, L ]          // line 2 is the one coupled to the asset
//   }
//
//   C  coefficient: a number, or
//      { "kind": "piecewise", "breaks": [...], "values": [...] }, or
//      { "kind": "tabulated", "times": [...], "values": [...] }
//   L  { "intensity": { "kind": "constant" | "exponential" | "logistic", "base": C,
//                       "slope": s, "low": l, "high": h, "scale": k },
//        "drift": C, "vol": C, "y0": y, "delta": C,
//        "claims": { "kind": "exponential", "rate": a }
//                | { "kind": "truncated_exponential", "rate": a, "cap": D }
//                | { "kind": "discrete", "atoms": [...], "weights": [...] },
//        "premium": { "kind": "expected_value" | "variance", "theta": t, "theta_r": tr } }
//
// Custom intensities and premia are code-only and cannot be serialized.

nlohmann::json coefficient_to_json(const TimeCoefficient& c);
TimeCoefficient coefficient_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_from_json(const nlohmann::json& j);

ModelConfig load_model(const std::filesystem::path& path);
void save_model(const ModelConfig& cfg, const std::filesystem::path& path);

/// FNV-1a hash of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const ModelConfig& cfg);

}  // namespace cshock

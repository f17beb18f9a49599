#pragma once

#include "cshock/model.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <vector>

namespace cshock {

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;
  // worst sample point (t, y, u) when the check is pointwise
  std::optional<std::vector<double>> worst_point;
  std::optional<double> value;
};

/// Outcome of a set of named checks. Violations are data, not exceptions.
struct ValidationReport {
  std::string subject;
  std::vector<CheckResult> checks;
  // named scalars worth reporting alongside the verdicts (kappa, moduli, ...)
  std::vector<std::pair<std::string, double>> quantities;

  bool ok() const;
  const CheckResult* find(const std::string& name) const;
  void add(CheckResult c) { checks.push_back(std::move(c)); }
  void merge(const ValidationReport& other);

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// Points at which pointwise assumptions are sampled.
struct SampleGrid {
  std::vector<double> t;
  std::vector<double> y;
  std::vector<double> u;

  /// [0, T] x [y0 - 5 max|a| sqrt(T), y0 + 5 max|a| sqrt(T)] x [0, 1].
  static SampleGrid around(const ModelConfig& cfg, int line, int nt = 11, int ny = 21, int nu = 11);
};

ValidationReport validate_premium(const InsuranceLine& line, const SampleGrid& grid);

/// Dominance, moment, market-price-of-risk and kappa-integrability checks.
ValidationReport validate_admissibility(const ModelConfig& cfg);

}  // namespace cshock

#pragma once

#include "cshock/model.hpp"
#include "cshock/roots.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <vector>

namespace cshock {

// The strategy problem at a state (t, y) with g = gamma B(t, T):
//
//   Psi1(u)    = g (q1(u) - c1) + lambda1 (E[e^{g u Z}] - 1)
//   Psi2(u, w) = g (q2(u) - c2 + g sigma^2 w^2 / 2 - w (mu - r))
//                + lambda2 (E[e^{g (u Z + w K(Z))}] - 1)
//
// With K(t, z) = k(t) z every integral is a tilted moment of Z at tilt
// g (u + k w), which is how everything below is evaluated.

enum class Region { full_reinsurance, null_reinsurance, interior };
enum class SignRegion { short_asset, long_asset, neither };  // C1, C2

std::string to_string(Region r);
std::string to_string(SignRegion s);

struct FirstLineSolution {
  double u_star = 1.0;
  Region region = Region::interior;
  double residual = 0.0;  // first-order condition at u_star when interior
};

struct SecondLineSolution {
  double u2_star = 1.0;
  double w_star = 0.0;
  Region region = Region::interior;
  SignRegion sign_region = SignRegion::neither;
  double residual_h = 0.0;
  double residual_h_tilde = 0.0;
  // unconstrained solution of H = 0, H~ = 0
  double u_bar = 0.0;
  double w_bar = 0.0;
};

double psi1(const ModelConfig& cfg, double t, double y1, double u1);
double psi2(const ModelConfig& cfg, double t, double y2, double u2, double w);

/// dPsi2/du divided by g. The premium derivative is evaluated at any real u.
double H(const ModelConfig& cfg, double t, double y2, double u2, double w);
/// dPsi2/dw divided by g.
double H_tilde(const ModelConfig& cfg, double t, double y2, double u2, double w);

/// Minimizer of Psi1 over [0, 1].
FirstLineSolution solve_u1_star(const ModelConfig& cfg, double t, double y1, const RootOptions& opt = {});

/// Minimizer over [0, 1] of the single-line problem for `line` without
/// investment coupling (H^no for line 2).
FirstLineSolution solve_retention(const ModelConfig& cfg, int line, double t, double y, const RootOptions& opt = {});

/// Unique root in w of H~(t, y2, u2, .).
double solve_w_tilde(const ModelConfig& cfg, double t, double y2, double u2, const RootOptions& opt = {});

/// Root in u of H(t, y2, ., w) over the real line.
double solve_u_tilde(const ModelConfig& cfg, double t, double y2, double w, const RootOptions& opt = {});

SecondLineSolution solve_second_line(const ModelConfig& cfg, double t, double y2, const RootOptions& opt = {});

SignRegion classify_sign_region(const ModelConfig& cfg, double t, double y2);

struct WStarBounds {
  double upper = 0.0;
  double lower = 0.0;
  bool strict_upper = false;
  SignRegion sign = SignRegion::neither;
};

WStarBounds w_star_bounds(const ModelConfig& cfg, double t, double y2);

struct EvpClosedForm {
  double phi_star = 0.0;
  double w_bar = 0.0;
  double u_bar = 0.0;
  double u2_star = 0.0;
  double w_star = 0.0;
  Region region = Region::interior;
};

/// Root phi of E[Z e^{g phi Z}] = (1 + theta_R) E[Z].
double solve_phi_star(const ClaimDistribution& claims, double g, double theta_r, const RootOptions& opt = {});

/// Expected-value-principle solution of the second line. Requires an
/// expected-value premium on line 2.
EvpClosedForm evp_closed_form(const ModelConfig& cfg, double t, double y2);

struct NoShockStrategy {
  double u1 = 1.0;
  double u2_no = 1.0;
  double w_no = 0.0;
};

/// Optimal strategy of the same model with K = 0.
NoShockStrategy no_shock_strategy(const ModelConfig& cfg, double t, double y1, double y2);

struct ComparisonRecord {
  double t = 0.0;
  double y = 0.0;
  double w_star = 0.0;
  double w_no = 0.0;
  double u2_star = 0.0;
  double u2_no = 0.0;
  double w_bar = 0.0;
  double jump_scale = 0.0;
  SignRegion sign = SignRegion::neither;
  bool degenerate = false;  // E[K(t, Z)] = 0
};

struct ComparisonReport {
  std::vector<ComparisonRecord> records;
  std::vector<std::string> violations;
  bool evp = false;
  int degenerate_states = 0;

  nlohmann::json to_json() const;
};

struct State {
  double t = 0.0;
  double y = 0.0;
};

ComparisonReport compare_shock_effect(const ModelConfig& cfg, const std::vector<State>& states);

}  // namespace cshock

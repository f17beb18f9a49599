#pragma once

#include "cshock/model.hpp"

#include <string>
#include <vector>

namespace cshock::presets {

// Figure-1 market: t = 0, y2 = -0.2, lambda2(t, y) = 10 e^{-y}, gamma = 0.5,
// r = 0.02, mu = 0.05, sigma = 0.1, unit-mean exponential claims on line 2.
// The jump scale k = 0.01 and horizon T = 1 are not part of the figure
// parameters and are fixed here.
ModelConfig fig1();

// Figure-2 market: line-2 claims truncated exponential on [0, 100], theta_R = 0.3,
// gamma = 0.5, r = 0.02.
ModelConfig fig2();

// Expected-value premia with a visible common shock; used by compare and sweep.
ModelConfig evp_comparison();

// Simulation presets with compactly supported claims (k D < 1) and
// diffusive factors, so the value function PDEs are well posed.
ModelConfig sim_evp();
ModelConfig sim_variance();
ModelConfig sim_no_shock();

/// Names accepted by by_name().
std::vector<std::string> names();
ModelConfig by_name(const std::string& name);

}  // namespace cshock::presets

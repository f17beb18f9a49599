#pragma once

#include "cshock/model.hpp"
#include "cshock/random.hpp"
#include "cshock/strategy_field.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <vector>

namespace cshock {

struct SimConfig {
  long paths = 10000;
  int steps = 200;
  std::uint64_t seed = 1;
  bool antithetic = true;
  std::uint64_t stream = 0;  // common-random-numbers stream id
  bool keep_paths = false;   // store full paths in the bundle

  void check() const;
};

struct Control {
  double u1 = 1.0;
  double u2 = 1.0;
  double w = 0.0;
};

/// Strategy as a function of the pre-jump state (t, y1, y2).
using ControlLaw = std::function<Control(double t, double y1, double y2)>;

namespace control {
ControlLaw constant(Control c);
ControlLaw from_field(std::shared_ptr<const StrategyField> field);
/// Solves the strategy problem at every query; exact but slow.
ControlLaw pointwise_optimal(const ModelConfig& cfg);
/// w scaled by w_factor, u1 and u2 shifted and clamped to [0, 1].
ControlLaw perturbed(ControlLaw base, double w_factor, double du1, double du2);
}  // namespace control

struct Event {
  double t = 0.0;
  double z = 0.0;
};

/// Everything random about one path; independent of the strategy.
struct PathNoise {
  VectorXd y1, y2;  // factors at the time nodes
  VectorXd xi;      // standard normals driving W on each step
  std::vector<Event> events1, events2;
  VectorXd price;   // P at the time nodes (after jumps at or before the node)
};

struct PathSummary {
  double x_T = 0.0;
  int n1 = 0;
  int n2 = 0;
  double p_T = 0.0;
  double claims1 = 0.0;     // sum of claim sizes
  double claims2 = 0.0;
  double int_lambda1 = 0.0; // int_0^T lambda(t, Y_t) dt, trapezoid on the nodes
  double int_lambda2 = 0.0;
  double jump_log_return = 0.0;  // sum of log(1 - K) over line-2 events
};

struct PathRecord {
  PathNoise noise;
  VectorXd x;  // wealth at the time nodes
};

struct PathBundle {
  VectorXd times;
  std::vector<PathSummary> summary;
  std::vector<PathRecord> paths;  // only with SimConfig::keep_paths

  void write_summary_csv(const std::filesystem::path& path) const;
};

struct UtilityEstimate {
  double mean = 0.0;  // of e^{-gamma X_T}
  double std_error = 0.0;
  long n_paths = 0;
  long excluded = 0;  // paths whose e^{-gamma X_T} overflowed
  double expected_utility() const { return 1.0 - mean; }
  nlohmann::json to_json() const;
};

struct PairedEstimate {
  std::vector<UtilityEstimate> estimates;
  // mean and standard error of (strategy i) - (strategy 0), paired by path
  std::vector<double> diff_mean;
  std::vector<double> diff_std_error;
};

VectorXd time_grid(const ModelConfig& cfg, int steps);

/// Factor paths at the time nodes; rows are paths.
struct FactorPaths {
  VectorXd times;
  MatrixXd y1, y2;
};
FactorPaths simulate_factors(const ModelConfig& cfg, const SimConfig& sim);

/// Exact Gaussian factor increments (coefficients depend on t only).
/// `sign` = -1 gives the antithetic path.
VectorXd simulate_factor(const InsuranceLine& line, const VectorXd& times, Engine& rng, double sign = 1.0);

/// Ogata thinning against the constant bound max delta on [0, T], with the
/// factor linearly interpolated between nodes. Throws DominanceError when
/// lambda exceeds delta(t).
std::vector<Event> simulate_claim_arrivals(const InsuranceLine& line, const VectorXd& times, const VectorXd& factor,
                                           Engine& rng);

/// Exact log-normal steps between nodes, multiplied by (1 - K(t, z)) at every
/// line-2 event. Requires K < 1.
VectorXd simulate_asset(const ModelConfig& cfg, const VectorXd& times, const VectorXd& xi,
                        const std::vector<Event>& events2);

/// All noise for path `path`; antithetic partners share streams with
/// sign = -1 on the Brownian increments.
PathNoise simulate_noise(const ModelConfig& cfg, const VectorXd& times, const SimConfig& sim, long path, double sign);

/// Terminal wealth in T-forward units on one noise path; fills `x` with the
/// wealth at the nodes when non-null.
double simulate_terminal_wealth(const ModelConfig& cfg, const VectorXd& times, const PathNoise& noise,
                                const ControlLaw& strategy, VectorXd* x = nullptr);

PathBundle simulate_wealth(const ModelConfig& cfg, const ControlLaw& strategy, const SimConfig& sim);

UtilityEstimate estimate_utility(const ModelConfig& cfg, const ControlLaw& strategy, const SimConfig& sim);

/// Every strategy evaluated on the same noise paths.
PairedEstimate estimate_utility_paired(const ModelConfig& cfg, const std::vector<ControlLaw>& strategies,
                                       const SimConfig& sim);

}  // namespace cshock

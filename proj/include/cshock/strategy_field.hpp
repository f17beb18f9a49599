#pragma once

#include "cshock/interp.hpp"
#include "cshock/strategy.hpp"

#include <filesystem>

namespace cshock {

/// Optimal strategy tabulated on a common (t, y) grid; line 1 reads its
/// retention at y = y1, line 2 reads retention and investment at y = y2.
class StrategyField {
 public:
  /// Solves every node. A y-range of zero width is widened to cover both
  /// initial factors plus the default spread.
  static StrategyField tabulate(const ModelConfig& cfg, Eigen::Index nt, Eigen::Index ny, double y_lo = 0.0,
                                double y_hi = 0.0);

  /// Default y-range: both initial factors +- 6 max(a) sqrt(T) (at least +-1).
  static std::pair<double, double> default_y_range(const ModelConfig& cfg);

  const UniformAxis& t_axis() const { return t_; }
  const UniformAxis& y_axis() const { return y_; }

  double u1(double t, double y1) const { return bilinear(t_, y_, u1_, t, y1); }
  double u2(double t, double y2) const { return bilinear(t_, y_, u2_, t, y2); }
  double w(double t, double y2) const { return bilinear(t_, y_, w_, t, y2); }

  const MatrixXd& u1_table() const { return u1_; }
  const MatrixXd& u2_table() const { return u2_; }
  const MatrixXd& w_table() const { return w_; }
  Region region1(Eigen::Index j, Eigen::Index k) const { return static_cast<Region>(region1_(j, k)); }
  Region region2(Eigen::Index j, Eigen::Index k) const { return static_cast<Region>(region2_(j, k)); }
  SignRegion sign_region(Eigen::Index j, Eigen::Index k) const { return static_cast<SignRegion>(sign_(j, k)); }

  void write_csv(const std::filesystem::path& path) const;
  nlohmann::json to_json() const;

 private:
  UniformAxis t_, y_;
  MatrixXd u1_, u2_, w_;
  Eigen::MatrixXi region1_, region2_, sign_;
};

}  // namespace cshock

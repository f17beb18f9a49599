#include "cshock/strategy_field.hpp"

#include "cshock/parallel.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

namespace cshock {

std::pair<double, double> StrategyField::default_y_range(const ModelConfig& cfg) {
  const double T = cfg.horizon();
  double lo = std::min(cfg.line(1).y0, cfg.line(2).y0);
  double hi = std::max(cfg.line(1).y0, cfg.line(2).y0);
  double spread = 0.0;
  for (int i = 1; i <= 2; ++i) {
    const auto& l = cfg.line(i);
    spread = std::max(spread, 6.0 * l.vol.max_abs_on(0.0, T) * std::sqrt(T) + std::abs(l.drift.integral(0.0, T)));
  }
  spread = std::max(spread, 1.0);
  return {lo - spread, hi + spread};
}

StrategyField StrategyField::tabulate(const ModelConfig& cfg, Eigen::Index nt, Eigen::Index ny, double y_lo,
                                      double y_hi) {
  if (nt < 2 || ny < 2) throw ConfigError("strategy field needs at least 2 nodes per axis");
  if (!(y_hi > y_lo)) std::tie(y_lo, y_hi) = default_y_range(cfg);
  StrategyField f;
  f.t_ = UniformAxis(0.0, cfg.horizon(), nt);
  f.y_ = UniformAxis(y_lo, y_hi, ny);
  f.u1_.resize(nt, ny);
  f.u2_.resize(nt, ny);
  f.w_.resize(nt, ny);
  f.region1_.resize(nt, ny);
  f.region2_.resize(nt, ny);
  f.sign_.resize(nt, ny);

  parallel_for(long(nt * ny), [&](long idx) {
    const Eigen::Index j = idx / ny;
    const Eigen::Index k = idx % ny;
    const double t = f.t_[j];
    const double y = f.y_[k];
    const auto first = solve_u1_star(cfg, t, y);
    const auto second = solve_second_line(cfg, t, y);
    f.u1_(j, k) = first.u_star;
    f.region1_(j, k) = static_cast<int>(first.region);
    f.u2_(j, k) = second.u2_star;
    f.w_(j, k) = second.w_star;
    f.region2_(j, k) = static_cast<int>(second.region);
    f.sign_(j, k) = static_cast<int>(second.sign_region);
  });
  return f;
}

void StrategyField::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << "t,y,u1,u2,w,region1,region2,sign_region\n";
  for (Eigen::Index j = 0; j < t_.n; ++j) {
    for (Eigen::Index k = 0; k < y_.n; ++k) {
      out << fmt::format("{:.10g},{:.10g},{:.12g},{:.12g},{:.12g},{},{},{}\n", t_[j], y_[k], u1_(j, k), u2_(j, k),
                         w_(j, k), to_string(region1(j, k)), to_string(region2(j, k)), to_string(sign_region(j, k)));
    }
  }
}

nlohmann::json StrategyField::to_json() const {
  auto rows = [](const MatrixXd& m) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index j = 0; j < m.rows(); ++j) {
      for (Eigen::Index k = 0; k < m.cols(); ++k) out[static_cast<std::size_t>(j)].push_back(m(j, k));
    }
    return out;
  };
  return {{"t", {{"lo", t_.lo()}, {"hi", t_.hi()}, {"n", t_.n}}},
          {"y", {{"lo", y_.lo()}, {"hi", y_.hi()}, {"n", y_.n}}},
          {"interpolation", "bilinear"},
          {"u1", rows(u1_)},
          {"u2", rows(u2_)},
          {"w", rows(w_)}};
}

}  // namespace cshock

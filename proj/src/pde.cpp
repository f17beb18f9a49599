#include "cshock/pde.hpp"

#include "cshock/parallel.hpp"
#include "cshock/random.hpp"
#include "cshock/strategy.hpp"
#include "cshock/tridiagonal.hpp"
#include "cshock/types.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

namespace cshock {

Grid1D::Grid1D(double horizon, double y_lo, double y_hi, Eigen::Index M, Eigen::Index N) {
  if (M < 2 || N < 2) throw ConfigError(fmt::format("grid needs M >= 2 and N >= 2, got {}x{}", M, N));
  if (!(horizon > 0.0) || !(y_hi > y_lo)) {
    throw ConfigError(fmt::format("grid needs T > 0 and y_lo < y_hi, got T={}, [{}, {}]", horizon, y_lo, y_hi));
  }
  t = UniformAxis(0.0, horizon, M + 1);
  y = UniformAxis(y_lo, y_hi, N + 1);
}

Grid1D Grid1D::around(const ModelConfig& cfg, int line, Eigen::Index M, Eigen::Index N, double half_width) {
  const auto& l = cfg.line(line);
  const double T = cfg.horizon();
  const double spread = 6.0 * l.vol.max_abs_on(0.0, T) * std::sqrt(T) + std::abs(l.drift.integral(0.0, T));
  const double w = std::max(spread, half_width);
  if (!(w > 0.0)) throw ConfigError("grid half-width is zero; set a positive override");
  return Grid1D(T, l.y0 - w, l.y0 + w, M, N);
}

PdeSolution::PdeSolution(int line, Grid1D grid, MatrixXd values)
    : line_(line), grid_(std::move(grid)), values_(std::move(values)) {}

double PdeSolution::operator()(double t, double y) const {
  if (!grid_.t.contains(t) || !grid_.y.contains(y)) {
    throw DomainError(fmt::format("psi{} queried at (t={}, y={}) outside [{}, {}] x [{}, {}]", line_, t, y,
                                  grid_.t.lo(), grid_.t.hi(), grid_.y.lo(), grid_.y.hi()));
  }
  return bilinear(grid_.t, grid_.y, values_, t, y);
}

void PdeSolution::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << "t,y,psi\n";
  for (Eigen::Index j = 0; j < values_.rows(); ++j) {
    for (Eigen::Index k = 0; k < values_.cols(); ++k) {
      out << fmt::format("{:.10g},{:.10g},{:.15g}\n", grid_.t[j], grid_.y[k], values_(j, k));
    }
  }
}

nlohmann::json PdeSolution::to_json() const {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(values_.rows()));
  for (Eigen::Index j = 0; j < values_.rows(); ++j) {
    for (Eigen::Index k = 0; k < values_.cols(); ++k) rows[static_cast<std::size_t>(j)].push_back(values_(j, k));
  }
  return {{"line", line_},
          {"t", {{"lo", grid_.t.lo()}, {"hi", grid_.t.hi()}, {"n", grid_.t.n}}},
          {"y", {{"lo", grid_.y.lo()}, {"hi", grid_.y.hi()}, {"n", grid_.y.n}}},
          {"interpolation", "bilinear"},
          {"psi", rows}};
}

double min_generator_term(const ModelConfig& cfg, int line, double t, double y) {
  if (line == 1) return psi1(cfg, t, y, solve_u1_star(cfg, t, y).u_star);
  if (line == 2) {
    const auto s = solve_second_line(cfg, t, y);
    return psi2(cfg, t, y, s.u2_star, s.w_star);
  }
  throw ConfigError(fmt::format("line index must be 1 or 2, got {}", line));
}

namespace {

// Tridiagonal operator L = b d/dy + a^2/2 d2/dy2 + g at one time level.
struct Operator {
  VectorXd lower, diag, upper;

  void build(double b, double a, const VectorXd& g, double h) {
    const Eigen::Index n = g.size();
    lower.resize(n);
    diag.resize(n);
    upper.resize(n);
    const double dif = 0.5 * a * a / (h * h);
    const double adv = b / (2.0 * h);
    for (Eigen::Index k = 1; k < n - 1; ++k) {
      lower(k) = dif - adv;
      diag(k) = -2.0 * dif + g(k);
      upper(k) = dif + adv;
    }
    // ghost nodes from zero curvature: the diffusion term drops out and the
    // advection term becomes one-sided
    lower(0) = 0.0;
    diag(0) = -b / h + g(0);
    upper(0) = b / h;
    lower(n - 1) = -b / h;
    diag(n - 1) = b / h + g(n - 1);
    upper(n - 1) = 0.0;
  }

  // out = (I + c L) v
  void apply(double c, const VectorXd& v, VectorXd& out) const {
    const Eigen::Index n = v.size();
    out.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      double s = (1.0 + c * diag(k)) * v(k);
      if (k > 0) s += c * lower(k) * v(k - 1);
      if (k + 1 < n) s += c * upper(k) * v(k + 1);
      out(k) = s;
    }
  }

  // v <- (I - c L)^{-1} v
  void solve(double c, VectorXd& v, VectorXd& scratch) const {
    const VectorXd lo = -c * lower;
    const VectorXd up = -c * upper;
    const VectorXd di = VectorXd::Ones(diag.size()) - c * diag;
    solve_tridiagonal(lo, di, up, v, scratch);
  }
};

}  // namespace

PdeSolution solve_reaction_diffusion(int line, const Grid1D& grid, const TimeCoefficient& drift,
                                     const TimeCoefficient& vol, const ReactionRow& reaction) {
  const Eigen::Index M = grid.M();
  const Eigen::Index n = grid.y.n;
  const double dt = grid.t.h;
  const double h = grid.y.h;

  MatrixXd values(M + 1, n);
  VectorXd psi = VectorXd::Ones(n);
  values.row(M) = psi.transpose();

  VectorXd g_old(n), g_new(n), rhs(n), scratch(n);
  Operator op_old, op_new;

  auto build = [&](Operator& op, VectorXd& g, double t) {
    reaction(t, grid.y, g);
    op.build(drift(t), vol(t), g, h);
  };

  // Rannacher start: two implicit Euler half steps from T to t_{M-1}
  {
    const double t_half = grid.t[M] - 0.5 * dt;
    build(op_new, g_new, t_half);
    op_new.solve(0.5 * dt, psi, scratch);
    build(op_new, g_new, grid.t[M - 1]);
    op_new.solve(0.5 * dt, psi, scratch);
    values.row(M - 1) = psi.transpose();
  }
  op_old = op_new;
  for (Eigen::Index j = M - 1; j >= 1; --j) {
    build(op_new, g_new, grid.t[j - 1]);
    op_old.apply(0.5 * dt, psi, rhs);
    op_new.solve(0.5 * dt, rhs, scratch);
    psi = rhs;
    values.row(j - 1) = psi.transpose();
    std::swap(op_old, op_new);
  }

  Eigen::Index jm = 0, km = 0;
  const double lowest = values.minCoeff(&jm, &km);
  if (!(lowest > 0.0)) {
    throw PositivityError(fmt::format("psi{} = {:.6g} at (t={:.6g}, y={:.6g}); refine the grid or widen the domain",
                                      line, lowest, grid.t[jm], grid.y[km]));
  }
  return PdeSolution(line, grid, std::move(values));
}

PdeSolution solve_psi_pde(const ModelConfig& cfg, int line, const Grid1D& grid) {
  const auto& l = cfg.line(line);
  const double T = cfg.horizon();
  if (std::abs(grid.t.hi() - T) > 1e-12 * std::max(1.0, T)) {
    throw ConfigError(fmt::format("grid horizon {} does not match T = {}", grid.t.hi(), T));
  }
  if (!(l.vol.min_on(0.0, T) > 0.0)) {
    throw ConfigError(fmt::format("line {}: factor volatility must be bounded away from zero on [0, T]", line));
  }
  auto reaction = [&](double t, const UniformAxis& y, VectorXd& out) {
    out.resize(y.n);
    parallel_for(long(y.n), [&](long k) { out(k) = min_generator_term(cfg, line, t, y[k]); });
  };
  return solve_reaction_diffusion(line, grid, l.drift, l.vol, reaction);
}

ReactionTable ReactionTable::build(const std::function<double(double, double)>& g, double t0, double t1,
                                   Eigen::Index time_intervals, double y_lo, double y_hi, Eigen::Index ny) {
  if (time_intervals < 2 || ny < 4) throw ConfigError("reaction table needs >= 2 time intervals and >= 4 y nodes");
  ReactionTable tab;
  tab.t_ = UniformAxis(t0, t1, time_intervals + 1);
  tab.y_ = UniformAxis(y_lo, y_hi, ny);
  tab.values_.resize(time_intervals + 1, ny);
  parallel_for(long((time_intervals + 1) * ny), [&](long idx) {
    const Eigen::Index j = idx / ny;
    const Eigen::Index k = idx % ny;
    tab.values_(j, k) = g(tab.t_[j], tab.y_[k]);
  });
  return tab;
}

ReactionTable ReactionTable::build(const ModelConfig& cfg, int line, double t0, Eigen::Index time_intervals,
                                   double y_lo, double y_hi, Eigen::Index ny) {
  return build([&](double t, double y) { return min_generator_term(cfg, line, t, y); }, t0, cfg.horizon(),
               time_intervals, y_lo, y_hi, ny);
}

FkEstimate feynman_kac_oracle(const ReactionTable& table, const TimeCoefficient& drift, const TimeCoefficient& vol,
                              Eigen::Index start, double y, long n_paths, std::uint64_t seed) {
  if (n_paths < 100) throw ConfigError(fmt::format("Feynman-Kac oracle needs >= 100 paths, got {}", n_paths));
  const auto& ta = table.t_axis();
  const Eigen::Index last = ta.n - 1;
  if (start < 0 || start > last || (last - start) % 2 != 0) {
    throw ConfigError(fmt::format("start node {} must leave an even number of intervals before node {}", start, last));
  }
  FkEstimate est;
  est.n_paths = 2 * ((n_paths + 1) / 2);
  if (start == last) return est;

  const Eigen::Index steps = last - start;
  VectorXd mean(steps), sd(steps), weight(steps + 1);
  for (Eigen::Index i = 0; i < steps; ++i) {
    const double a = ta[start + i], b = ta[start + i + 1];
    mean(i) = drift.integral(a, b);
    sd(i) = std::sqrt(vol.integral_of_square(a, b));
  }
  for (Eigen::Index i = 0; i <= steps; ++i) {
    weight(i) = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
  }
  weight *= ta.h / 3.0;

  const long pairs = est.n_paths / 2;
  std::vector<double> values(static_cast<std::size_t>(pairs));
  parallel_for(pairs, [&](long p) {
    Engine rng = make_stream(seed, static_cast<std::uint64_t>(p), 0);
    std::normal_distribution<double> normal;
    double yp = y, ym = y;
    double sp = weight(0) * table.at(start, y);
    double sm = sp;
    for (Eigen::Index i = 0; i < steps; ++i) {
      const double z = sd(i) * normal(rng);
      yp += mean(i) + z;
      ym += mean(i) - z;
      sp += weight(i + 1) * table.at(start + i + 1, yp);
      sm += weight(i + 1) * table.at(start + i + 1, ym);
    }
    values[static_cast<std::size_t>(p)] = 0.5 * (std::exp(sp) + std::exp(sm));
  });

  double sum = 0.0;
  for (double v : values) sum += v;
  const double m = sum / double(pairs);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  est.estimate = m;
  est.std_error = pairs > 1 ? std::sqrt(ss / double(pairs - 1) / double(pairs)) : 0.0;
  return est;
}

FkEstimate feynman_kac_oracle(const ModelConfig& cfg, int line, double t, double y, long n_paths, std::uint64_t seed,
                              const FkOptions& opt) {
  if (n_paths < 100) throw ConfigError(fmt::format("Feynman-Kac oracle needs >= 100 paths, got {}", n_paths));
  const auto& l = cfg.line(line);
  const double T = cfg.horizon();
  if (!(t >= 0.0 && t <= T)) throw DomainError(fmt::format("Feynman-Kac start time {} outside [0, {}]", t, T));
  if (t == T) return {1.0, 0.0, 2 * ((n_paths + 1) / 2)};
  const double shift = l.drift.integral(t, T);
  double spread = opt.table_sd * std::sqrt(l.vol.integral_of_square(t, T));
  if (!(spread > 0.0)) spread = 1.0;
  const double lo = y + std::min(0.0, shift) - spread;
  const double hi = y + std::max(0.0, shift) + spread;
  const auto table = ReactionTable::build(cfg, line, t, 2 * opt.steps, lo, hi, opt.table_ny);
  return feynman_kac_oracle(table, l.drift, l.vol, 0, y, n_paths, seed);
}

ValueFunction::ValueFunction(const ModelConfig& cfg, PdeSolution psi1, PdeSolution psi2)
    : cfg_(cfg), psi1_(std::move(psi1)), psi2_(std::move(psi2)) {
  if (psi1_.line() != 1 || psi2_.line() != 2) throw ConfigError("value function needs psi1 for line 1, psi2 for line 2");
}

double ValueFunction::operator()(double t, double y1, double y2, double x) const {
  return value_function(cfg_, psi1_, psi2_, t, y1, y2, x);
}

double value_function(const ModelConfig& cfg, const PdeSolution& psi1, const PdeSolution& psi2, double t, double y1,
                      double y2, double x) {
  const double g = effective_risk_aversion(cfg, t);
  return std::exp(-g * x) * psi1(t, y1) * psi2(t, y2);
}

ValueFunction solve_value_function(const ModelConfig& cfg, Eigen::Index M, Eigen::Index N) {
  return ValueFunction(cfg, solve_psi_pde(cfg, 1, Grid1D::around(cfg, 1, M, N)),
                       solve_psi_pde(cfg, 2, Grid1D::around(cfg, 2, M, N)));
}

namespace {

struct Moduli {
  double sup = 0.0;
  double lip_t = 0.0;
  double lip_y = 0.0;
};

Moduli moduli(const std::function<double(double, double)>& f, const UniformAxis& ta, const UniformAxis& ya) {
  MatrixXd v(ta.n, ya.n);
  for (Eigen::Index j = 0; j < ta.n; ++j) {
    for (Eigen::Index k = 0; k < ya.n; ++k) v(j, k) = f(ta[j], ya[k]);
  }
  Moduli m;
  m.sup = v.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j + 1 < ta.n; ++j) {
    m.lip_t = std::max(m.lip_t, ((v.row(j + 1) - v.row(j)).cwiseAbs().maxCoeff()) / ta.h);
  }
  for (Eigen::Index k = 0; k + 1 < ya.n; ++k) {
    m.lip_y = std::max(m.lip_y, ((v.col(k + 1) - v.col(k)).cwiseAbs().maxCoeff()) / ya.h);
  }
  return m;
}

}  // namespace

ValidationReport check_existence_preconditions(const ModelConfig& cfg, Eigen::Index nt, Eigen::Index ny) {
  ValidationReport r;
  r.subject = "existence";
  const double T = cfg.horizon();
  constexpr double growth_limit = 1.5;

  for (int i = 1; i <= 2; ++i) {
    const auto& l = cfg.line(i);
    const auto grid = Grid1D::around(cfg, i, 2, 2, 1.0);
    const double half = 0.5 * (grid.y.hi() - grid.y.lo());
    const UniformAxis ta(0.0, T, nt);
    const UniformAxis ya(grid.y.lo(), grid.y.hi(), ny);
    const UniformAxis wide(l.y0 - 2.0 * half, l.y0 + 2.0 * half, 2 * ny - 1);

    const struct {
      const char* name;
      std::function<double(double, double)> f;
    } fields[] = {{"lambda", [&](double t, double y) { return l.lambda(t, y); }},
                  {"c", [&](double t, double y) { return l.c(t, y); }},
                  {"q0", [&](double t, double y) { return l.q(t, y, 0.0); }}};
    for (const auto& fld : fields) {
      const auto m = moduli(fld.f, ta, ya);
      const auto mw = moduli(fld.f, ta, wide);
      const std::string base = fmt::format("line{}.{}", i, fld.name);
      r.quantities.emplace_back(base + "_sup", m.sup);
      r.quantities.emplace_back(base + "_lipschitz_t", m.lip_t);
      r.quantities.emplace_back(base + "_lipschitz_y", m.lip_y);

      // a bounded coefficient barely grows when the sampled domain doubles
      CheckResult b;
      b.name = base + "_bounded";
      b.value = m.sup > 0.0 ? mw.sup / m.sup : 1.0;
      b.passed = std::isfinite(mw.sup) && *b.value <= growth_limit;
      b.detail = b.passed ? fmt::format("sup {:.6g} on the PDE domain, {:.6g} on twice the domain", m.sup, mw.sup)
                          : fmt::format("sup grows from {:.6g} to {:.6g} when the domain doubles; the coefficient "
                                        "looks unbounded in y, use a saturating (logistic) intensity",
                                        m.sup, mw.sup);
      r.add(b);

      CheckResult lip;
      lip.name = base + "_lipschitz";
      lip.value = std::max(m.lip_t, m.lip_y);
      lip.passed = std::isfinite(m.lip_t) && std::isfinite(m.lip_y);
      lip.detail = fmt::format("moduli t: {:.6g}, y: {:.6g}", m.lip_t, m.lip_y);
      r.add(lip);
    }

    CheckResult e;
    e.name = fmt::format("line{}.uniform_ellipticity", i);
    const double a_min = l.vol.min_on(0.0, T);
    e.value = a_min;
    e.passed = a_min > 0.0;
    e.detail = fmt::format("min a = {:.6g}", a_min);
    r.quantities.emplace_back(fmt::format("line{}.a_min", i), a_min);
    r.add(e);
  }
  CheckResult s;
  s.name = "sigma_uniform_ellipticity";
  s.value = cfg.market.sigma.min_on(0.0, T);
  s.passed = *s.value > 0.0;
  s.detail = fmt::format("min sigma = {:.6g}", *s.value);
  r.add(s);
  return r;
}

}  // namespace cshock

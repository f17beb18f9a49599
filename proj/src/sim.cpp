#include "cshock/sim.hpp"

#include "cshock/parallel.hpp"
#include "cshock/strategy.hpp"
#include "cshock/types.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace cshock {

namespace {

// Largest exponent handled without overflow in e^{-gamma X_T}.
constexpr double kLogCeiling = 700.0;

std::uint64_t substream(const SimConfig& sim, int which) { return 4 * sim.stream + std::uint64_t(which); }

// Strategy-independent per-interval integrals.
struct Weights {
  VectorXd B;             // B(t_n, T)
  VectorXd B_mid;         // B at the interval midpoint
  VectorXd drift_excess;  // trapezoid of B(s, T)(mu - r)(s)
  VectorXd vol;           // sqrt(int sigma^2)
  VectorXd log_drift;     // int (mu - sigma^2 / 2)
};

Weights weights(const ModelConfig& cfg, const VectorXd& times) {
  const Eigen::Index n = times.size() - 1;
  const double T = times(n);
  const auto& m = cfg.market;
  Weights w;
  w.B.resize(n + 1);
  w.B_mid.resize(n);
  w.drift_excess.resize(n);
  w.vol.resize(n);
  w.log_drift.resize(n);
  for (Eigen::Index i = 0; i <= n; ++i) w.B(i) = accumulation_factor(cfg, times(i), T);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = times(i), b = times(i + 1);
    w.B_mid(i) = accumulation_factor(cfg, 0.5 * (a + b), T);
    w.drift_excess(i) = 0.5 * (b - a) * (w.B(i) * (m.mu(a) - m.r(a)) + w.B(i + 1) * (m.mu(b) - m.r(b)));
    const double var = m.sigma.integral_of_square(a, b);
    w.vol(i) = std::sqrt(var);
    w.log_drift(i) = m.mu.integral(a, b) - 0.5 * var;
  }
  return w;
}

double interpolate(const VectorXd& times, const VectorXd& v, double t) {
  const Eigen::Index n = times.size() - 1;
  const double h = times(n) / double(n);
  auto i = static_cast<Eigen::Index>(t / h);
  i = std::clamp<Eigen::Index>(i, 0, n - 1);
  const double s = (t - times(i)) / (times(i + 1) - times(i));
  return (1.0 - s) * v(i) + s * v(i + 1);
}

double terminal_wealth(const ModelConfig& cfg, const VectorXd& times, const Weights& wt, const PathNoise& noise,
                       const ControlLaw& strategy, VectorXd* x) {
  const Eigen::Index n = times.size() - 1;
  const double T = times(n);
  const auto& l1 = cfg.line(1);
  const auto& l2 = cfg.line(2);
  double acc = cfg.prefs.initial_wealth * wt.B(0);
  if (x) {
    x->resize(n + 1);
    (*x)(0) = cfg.prefs.initial_wealth;
  }
  std::size_t e1 = 0, e2 = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = times(i), b = times(i + 1);
    const double ya1 = noise.y1(i), ya2 = noise.y2(i);
    const double yb1 = noise.y1(i + 1), yb2 = noise.y2(i + 1);
    const Control c = strategy(a, ya1, ya2);
    // premium flows with the retention frozen over the step
    const double fa = l1.c(a, ya1) + l2.c(a, ya2) - l1.q(a, ya1, c.u1) - l2.q(a, ya2, c.u2);
    const double fb = l1.c(b, yb1) + l2.c(b, yb2) - l1.q(b, yb1, c.u1) - l2.q(b, yb2, c.u2);
    acc += 0.5 * (b - a) * (wt.B(i) * fa + wt.B(i + 1) * fb);
    acc += c.w * (wt.drift_excess(i) + wt.B_mid(i) * wt.vol(i) * noise.xi(i));
    const bool last = i + 1 == n;
    while (e1 < noise.events1.size() && (noise.events1[e1].t <= b || last)) {
      const auto& ev = noise.events1[e1++];
      acc -= accumulation_factor(cfg, ev.t, T) * ev.z * c.u1;
    }
    while (e2 < noise.events2.size() && (noise.events2[e2].t <= b || last)) {
      const auto& ev = noise.events2[e2++];
      acc -= accumulation_factor(cfg, ev.t, T) * (ev.z * c.u2 + c.w * cfg.market.K(ev.t, ev.z));
    }
    if (x) (*x)(i + 1) = acc / wt.B(i + 1);
  }
  return acc;
}

struct Pairing {
  long units;  // pairs when antithetic, paths otherwise
  int per_unit;
};

Pairing pairing(const SimConfig& sim) {
  if (sim.antithetic) return {(sim.paths + 1) / 2, 2};
  return {sim.paths, 1};
}

PathNoise noise_for(const ModelConfig& cfg, const VectorXd& times, const SimConfig& sim, long unit, int member) {
  return simulate_noise(cfg, times, sim, unit, member == 0 ? 1.0 : -1.0);
}

UtilityEstimate summarise(const std::vector<double>& values, const std::vector<char>& ok, long paths, long excluded) {
  UtilityEstimate e;
  e.excluded = excluded;
  double sum = 0.0;
  long n = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!ok[i]) continue;
    sum += values[i];
    ++n;
  }
  e.n_paths = paths;
  if (n == 0) return e;
  e.mean = sum / double(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (ok[i]) ss += (values[i] - e.mean) * (values[i] - e.mean);
  }
  e.std_error = n > 1 ? std::sqrt(ss / double(n - 1) / double(n)) : 0.0;
  return e;
}

}  // namespace

void SimConfig::check() const {
  if (paths < 1) throw ConfigError(fmt::format("need at least one path, got {}", paths));
  if (steps < 1) throw ConfigError(fmt::format("need at least one step, got {}", steps));
}

namespace control {

ControlLaw constant(Control c) {
  return [c](double, double, double) { return c; };
}

ControlLaw from_field(std::shared_ptr<const StrategyField> field) {
  return [field](double t, double y1, double y2) {
    return Control{field->u1(t, y1), field->u2(t, y2), field->w(t, y2)};
  };
}

ControlLaw pointwise_optimal(const ModelConfig& cfg) {
  return [cfg](double t, double y1, double y2) {
    const auto s = solve_second_line(cfg, t, y2);
    return Control{solve_u1_star(cfg, t, y1).u_star, s.u2_star, s.w_star};
  };
}

ControlLaw perturbed(ControlLaw base, double w_factor, double du1, double du2) {
  return [base = std::move(base), w_factor, du1, du2](double t, double y1, double y2) {
    Control c = base(t, y1, y2);
    c.w *= w_factor;
    c.u1 = std::clamp(c.u1 + du1, 0.0, 1.0);
    c.u2 = std::clamp(c.u2 + du2, 0.0, 1.0);
    return c;
  };
}

}  // namespace control

VectorXd time_grid(const ModelConfig& cfg, int steps) {
  if (steps < 1) throw ConfigError(fmt::format("need at least one step, got {}", steps));
  return VectorXd::LinSpaced(steps + 1, 0.0, cfg.horizon());
}

VectorXd simulate_factor(const InsuranceLine& line, const VectorXd& times, Engine& rng, double sign) {
  std::normal_distribution<double> normal;
  VectorXd y(times.size());
  y(0) = line.y0;
  for (Eigen::Index i = 0; i + 1 < times.size(); ++i) {
    const double a = times(i), b = times(i + 1);
    y(i + 1) = y(i) + line.drift.integral(a, b) + sign * std::sqrt(line.vol.integral_of_square(a, b)) * normal(rng);
  }
  return y;
}

std::vector<Event> simulate_claim_arrivals(const InsuranceLine& line, const VectorXd& times, const VectorXd& factor,
                                           Engine& rng) {
  const double T = times(times.size() - 1);
  const double bound = line.delta.max_on(0.0, T);
  std::vector<Event> events;
  if (!(bound > 0.0)) return events;
  std::exponential_distribution<double> gap(bound);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double t = 0.0;
  while (true) {
    t += gap(rng);
    if (t > T) break;
    // both uniforms are drawn for every proposal so the stream stays aligned
    // across strategies and antithetic partners
    const double accept = unif(rng);
    const double size_u = unif(rng);
    const double y = interpolate(times, factor, t);
    const double lam = line.lambda(t, y);
    const double d = line.delta(t);
    if (lam > d * (1.0 + 1e-12)) {
      throw DominanceError(
          fmt::format("lambda({:.6g}, {:.6g}) = {:.6g} exceeds delta = {:.6g}; raise delta", t, y, lam, d));
    }
    if (accept * bound < lam) events.push_back({t, line.claims.sample_from_uniform(size_u)});
  }
  return events;
}

VectorXd simulate_asset(const ModelConfig& cfg, const VectorXd& times, const VectorXd& xi,
                        const std::vector<Event>& events2) {
  const Eigen::Index n = times.size() - 1;
  const auto& m = cfg.market;
  VectorXd p(n + 1);
  p(0) = m.p0;
  std::size_t e = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = times(i), b = times(i + 1);
    const double var = m.sigma.integral_of_square(a, b);
    double v = p(i) * std::exp(m.mu.integral(a, b) - 0.5 * var + std::sqrt(var) * xi(i));
    while (e < events2.size() && (events2[e].t <= b || i + 1 == n)) {
      const double K = m.K(events2[e].t, events2[e].z);
      if (!(K < 1.0)) {
        throw DomainError(fmt::format("jump K = {:.6g} >= 1 at t = {:.6g} would make the price non-positive", K,
                                      events2[e].t));
      }
      v *= 1.0 - K;
      ++e;
    }
    p(i + 1) = v;
  }
  return p;
}

PathNoise simulate_noise(const ModelConfig& cfg, const VectorXd& times, const SimConfig& sim, long path,
                         double sign) {
  const auto id = static_cast<std::uint64_t>(path);
  PathNoise noise;
  Engine w = make_stream(sim.seed, id, substream(sim, 0));
  std::normal_distribution<double> normal;
  const Eigen::Index n = times.size() - 1;
  noise.xi.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) noise.xi(i) = sign * normal(w);

  Engine f1 = make_stream(sim.seed, id, substream(sim, 1));
  Engine f2 = make_stream(sim.seed, id, substream(sim, 2));
  noise.y1 = simulate_factor(cfg.line(1), times, f1, sign);
  noise.y2 = simulate_factor(cfg.line(2), times, f2, sign);

  // one substream for arrivals and sizes, split per line so line 1's event
  // count never shifts line 2's draws
  Engine claims = make_stream(sim.seed, id, substream(sim, 3));
  Engine c1(claims());
  Engine c2(claims());
  noise.events1 = simulate_claim_arrivals(cfg.line(1), times, noise.y1, c1);
  noise.events2 = simulate_claim_arrivals(cfg.line(2), times, noise.y2, c2);
  noise.price = simulate_asset(cfg, times, noise.xi, noise.events2);
  return noise;
}

FactorPaths simulate_factors(const ModelConfig& cfg, const SimConfig& sim) {
  sim.check();
  FactorPaths out;
  out.times = time_grid(cfg, sim.steps);
  const auto [units, per] = pairing(sim);
  const long rows = units * per;
  out.y1.resize(rows, out.times.size());
  out.y2.resize(rows, out.times.size());
  parallel_for(units, [&](long u) {
    for (int m = 0; m < per; ++m) {
      const double sign = m == 0 ? 1.0 : -1.0;
      Engine f1 = make_stream(sim.seed, std::uint64_t(u), substream(sim, 1));
      Engine f2 = make_stream(sim.seed, std::uint64_t(u), substream(sim, 2));
      out.y1.row(u * per + m) = simulate_factor(cfg.line(1), out.times, f1, sign).transpose();
      out.y2.row(u * per + m) = simulate_factor(cfg.line(2), out.times, f2, sign).transpose();
    }
  });
  return out;
}

double simulate_terminal_wealth(const ModelConfig& cfg, const VectorXd& times, const PathNoise& noise,
                                const ControlLaw& strategy, VectorXd* x) {
  return terminal_wealth(cfg, times, weights(cfg, times), noise, strategy, x);
}

PathBundle simulate_wealth(const ModelConfig& cfg, const ControlLaw& strategy, const SimConfig& sim) {
  sim.check();
  PathBundle bundle;
  bundle.times = time_grid(cfg, sim.steps);
  const auto wt = weights(cfg, bundle.times);
  const auto [units, per] = pairing(sim);
  const long total = units * per;
  bundle.summary.resize(static_cast<std::size_t>(total));
  if (sim.keep_paths) bundle.paths.resize(static_cast<std::size_t>(total));
  const auto& times = bundle.times;
  const Eigen::Index n = times.size() - 1;

  parallel_for(units, [&](long u) {
    for (int m = 0; m < per; ++m) {
      const auto idx = static_cast<std::size_t>(u * per + m);
      PathNoise noise = noise_for(cfg, times, sim, u, m);
      VectorXd x;
      auto& s = bundle.summary[idx];
      s.x_T = terminal_wealth(cfg, times, wt, noise, strategy, sim.keep_paths ? &x : nullptr);
      s.n1 = int(noise.events1.size());
      s.n2 = int(noise.events2.size());
      s.p_T = noise.price(n);
      for (const auto& e : noise.events1) s.claims1 += e.z;
      for (const auto& e : noise.events2) {
        s.claims2 += e.z;
        s.jump_log_return += std::log1p(-cfg.market.K(e.t, e.z));
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        const double h = times(i + 1) - times(i);
        s.int_lambda1 += 0.5 * h * (cfg.line(1).lambda(times(i), noise.y1(i)) +
                                    cfg.line(1).lambda(times(i + 1), noise.y1(i + 1)));
        s.int_lambda2 += 0.5 * h * (cfg.line(2).lambda(times(i), noise.y2(i)) +
                                    cfg.line(2).lambda(times(i + 1), noise.y2(i + 1)));
      }
      if (sim.keep_paths) bundle.paths[idx] = PathRecord{std::move(noise), std::move(x)};
    }
  });
  return bundle;
}

PairedEstimate estimate_utility_paired(const ModelConfig& cfg, const std::vector<ControlLaw>& strategies,
                                       const SimConfig& sim) {
  sim.check();
  if (strategies.empty()) throw ConfigError("no strategies to estimate");
  const VectorXd times = time_grid(cfg, sim.steps);
  const auto wt = weights(cfg, times);
  const auto [units, per] = pairing(sim);
  const double gamma = cfg.prefs.gamma;
  const std::size_t ns = strategies.size();

  // values[s][u]: average of e^{-gamma X_T} over the unit's paths
  std::vector<std::vector<double>> values(ns, std::vector<double>(static_cast<std::size_t>(units)));
  std::vector<std::vector<char>> ok(ns, std::vector<char>(static_cast<std::size_t>(units), 1));
  std::vector<long> excluded_paths(static_cast<std::size_t>(units) * ns, 0);

  parallel_for(units, [&](long u) {
    std::vector<PathNoise> noise;
    for (int m = 0; m < per; ++m) noise.push_back(noise_for(cfg, times, sim, u, m));
    for (std::size_t s = 0; s < ns; ++s) {
      double sum = 0.0;
      for (int m = 0; m < per; ++m) {
        const double log_v = -gamma * terminal_wealth(cfg, times, wt, noise[std::size_t(m)], strategies[s], nullptr);
        if (!(log_v < kLogCeiling)) {
          ok[s][std::size_t(u)] = 0;
          ++excluded_paths[std::size_t(u) * ns + s];
          continue;
        }
        sum += std::exp(log_v);
      }
      values[s][std::size_t(u)] = sum / double(per);
    }
  });

  PairedEstimate out;
  const long paths = units * per;
  for (std::size_t s = 0; s < ns; ++s) {
    long excluded = 0;
    for (long u = 0; u < units; ++u) excluded += excluded_paths[std::size_t(u) * ns + s];
    out.estimates.push_back(summarise(values[s], ok[s], paths, excluded));

    // paired differences against strategy 0 on units valid for both
    std::vector<double> diff;
    for (long u = 0; u < units; ++u) {
      const auto i = std::size_t(u);
      if (ok[s][i] && ok[0][i]) diff.push_back(values[s][i] - values[0][i]);
    }
    const double n = double(diff.size());
    double mean = 0.0, ss = 0.0;
    for (double d : diff) mean += d;
    mean = diff.empty() ? 0.0 : mean / n;
    for (double d : diff) ss += (d - mean) * (d - mean);
    out.diff_mean.push_back(mean);
    out.diff_std_error.push_back(diff.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0);
  }
  return out;
}

UtilityEstimate estimate_utility(const ModelConfig& cfg, const ControlLaw& strategy, const SimConfig& sim) {
  return estimate_utility_paired(cfg, {strategy}, sim).estimates.front();
}

void PathBundle::write_summary_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << "path,X_T,N1,N2,P_T\n";
  for (std::size_t i = 0; i < summary.size(); ++i) {
    const auto& s = summary[i];
    out << fmt::format("{},{:.12g},{},{},{:.12g}\n", i, s.x_T, s.n1, s.n2, s.p_T);
  }
}

nlohmann::json UtilityEstimate::to_json() const {
  return {{"mean_exp_neg_gamma_X", mean},
          {"std_error", std_error},
          {"n_paths", n_paths},
          {"excluded_paths", excluded},
          {"expected_utility", expected_utility()}};
}

}  // namespace cshock

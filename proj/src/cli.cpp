#include "cshock/cli.hpp"

#include "cshock/config_json.hpp"
#include "cshock/parallel.hpp"
#include "cshock/pde.hpp"
#include "cshock/presets.hpp"
#include "cshock/strategy.hpp"
#include "cshock/strategy_field.hpp"
#include "cshock/validation.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fmt/core.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <regex>

#ifndef CSHOCK_VERSION
#define CSHOCK_VERSION "unknown"
#endif

namespace cshock::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Command c) {
  switch (c) {
    case Command::solve: return "solve";
    case Command::simulate: return "simulate";
    case Command::verify: return "verify";
    case Command::compare: return "compare";
    case Command::sweep: return "sweep";
  }
  return "?";
}

Command command_from_string(const std::string& s) {
  for (auto c : {Command::solve, Command::simulate, Command::verify, Command::compare, Command::sweep}) {
    if (to_string(c) == s) return c;
  }
  throw ConfigError(fmt::format("unknown subcommand '{}'", s));
}

GridSpec parse_grid(const std::string& s) {
  static const std::regex re(R"(\s*(\d+)\s*[xX]\s*(\d+)\s*)");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw ConfigError(fmt::format("grid '{}' is not of the form MxN", s));
  GridSpec g{std::stol(m[1]), std::stol(m[2])};
  if (g.M < 2 || g.N < 2) throw ConfigError(fmt::format("grid '{}' needs M, N >= 2", s));
  return g;
}

void ExperimentSpec::check() const {
  if (preset == "custom") {
    if (!config) throw ConfigError("preset 'custom' needs --config");
    if (!fs::exists(*config)) throw ConfigError(fmt::format("config file '{}' does not exist", config->string()));
  } else {
    if (config) throw ConfigError("--config and a named preset are mutually exclusive");
    const auto names = presets::names();
    if (std::find(names.begin(), names.end(), preset) == names.end()) {
      throw ConfigError(fmt::format("unknown preset '{}'", preset));
    }
  }
  if (grid.M < 2 || grid.N < 2) throw ConfigError("grid needs M, N >= 2");
  if (field_nt < 2 || field_ny < 2) throw ConfigError("strategy field needs at least 2 nodes per axis");
  sim.check();
  if (strategy != "optimal" && strategy != "no-shock" && strategy != "no-reinsurance") {
    throw ConfigError(fmt::format("unknown strategy '{}' (optimal, no-shock, no-reinsurance)", strategy));
  }
  if (sweep_param != "k" && sweep_param != "theta_r" && sweep_param != "lambda0" && sweep_param != "gamma") {
    throw ConfigError(fmt::format("unknown sweep parameter '{}' (k, theta_r, lambda0, gamma)", sweep_param));
  }
}

ModelConfig resolve_model(const ExperimentSpec& spec) {
  ModelConfig cfg = spec.preset == "custom" ? load_model(*spec.config) : presets::by_name(spec.preset);
  cfg.check();
  return cfg;
}

namespace {

bool is_figure_preset(const std::string& p) { return p == "fig1" || p == "fig2"; }

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << j.dump(2) << '\n';
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  return out;
}

std::string num(double v) { return fmt::format("{:.12g}", v); }

struct Context {
  const ExperimentSpec& spec;
  const ModelConfig& cfg;
  std::ostream& log;
  json& manifest;

  fs::path file(const std::string& name) const {
    manifest["artifacts"].push_back(name);
    return spec.out / name;
  }
};

std::shared_ptr<const StrategyField> optimal_field(const Context& c, const ModelConfig& cfg) {
  return std::make_shared<StrategyField>(StrategyField::tabulate(cfg, c.spec.field_nt, c.spec.field_ny));
}

// w -> H~(0, y, u, w) for u in {0, 0.5, 1}, with the three roots.
void figure1(const Context& c) {
  const auto& cfg = c.cfg;
  const double y = cfg.line(2).y0;
  const std::array<double, 3> us{0.0, 0.5, 1.0};
  std::array<double, 3> roots{};
  for (std::size_t i = 0; i < 3; ++i) roots[i] = solve_w_tilde(cfg, 0.0, y, us[i]);
  const double lo_root = *std::min_element(roots.begin(), roots.end());
  const double hi_root = *std::max_element(roots.begin(), roots.end());
  const double pad = std::max(hi_root - lo_root, 0.5);

  auto out = open_csv(c.file("fig1_h_tilde.csv"));
  out << fmt::format("# H~(0, {}, u, w); roots w~(u=0) = {}, w~(u=0.5) = {}, w~(u=1) = {}\n", num(y), num(roots[0]),
                     num(roots[1]), num(roots[2]));
  out << "w,h_tilde_u0,h_tilde_u0.5,h_tilde_u1\n";
  const int n = 401;
  for (int k = 0; k < n; ++k) {
    const double w = lo_root - pad + (hi_root - lo_root + 2.0 * pad) * k / (n - 1);
    out << num(w);
    for (double u : us) {
      double h = std::numeric_limits<double>::infinity();
      try {
        h = H_tilde(cfg, 0.0, y, u, w);
      } catch (const DivergenceError&) {
      }
      out << ',' << num(h);
    }
    out << '\n';
  }
  const bool ordered = roots[2] < roots[1] && roots[1] < roots[0];
  json j = {{"t", 0.0}, {"y", y}, {"ordered_u1_lt_u05_lt_u0", ordered}, {"roots", json::array()}};
  for (std::size_t i = 0; i < 3; ++i) {
    j["roots"].push_back({{"u", us[i]}, {"w_tilde", roots[i]}, {"h_tilde", H_tilde(cfg, 0.0, y, us[i], roots[i])}});
  }
  write_json(c.file("fig1_roots.json"), j);
  c.log << fmt::format("fig1: roots u=1 {:.6g} < u=0.5 {:.6g} < u=0 {:.6g}: {}\n", roots[2], roots[1], roots[0],
                       ordered ? "yes" : "NO");
}

// phi -> h(0, phi) = E[Z e^{g phi Z}] against the level (1 + theta_R) E[Z].
void figure2(const Context& c) {
  const auto& cfg = c.cfg;
  const auto& claims = cfg.line(2).claims;
  const double g = effective_risk_aversion(cfg, 0.0);
  const double theta_r = cfg.line(2).premium.theta_r;
  const double level = (1.0 + theta_r) * claims.mean();
  const double phi_star = solve_phi_star(claims, g, theta_r);

  auto out = open_csv(c.file("fig2_h.csv"));
  out << fmt::format("# h(0, phi) = E[Z exp(g phi Z)], g = {}; level (1 + theta_R) E[Z] = {}; phi* = {}\n", num(g),
                     num(level), num(phi_star));
  out << "phi,h\n";
  const int n = 401;
  int crossings = 0;
  bool increasing = true;
  double prev = 0.0;
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * phi_star * k / (n - 1);
    const double h = claims.tilted_moment(g * phi, 1);
    if (k > 0) {
      increasing = increasing && h > prev;
      if ((prev - level) * (h - level) < 0.0 || h == level) ++crossings;
    }
    prev = h;
    out << num(phi) << ',' << num(h) << '\n';
  }
  write_json(c.file("fig2_crossing.json"), {{"g", g},
                                            {"level", level},
                                            {"phi_star", phi_star},
                                            {"strictly_increasing", increasing},
                                            {"crossings", crossings}});
  c.log << fmt::format("fig2: phi* = {:.10g}, crossings {}, increasing {}\n", phi_star, crossings,
                       increasing ? "yes" : "NO");
}

// Admissibility failures are hard. The existence preconditions are sampled
// sufficient conditions on the whole line and only warn.
ValidationReport admissibility(const Context& c) {
  const auto report = validate_admissibility(c.cfg);
  const auto existence = check_existence_preconditions(c.cfg);
  for (const auto& chk : existence.checks) {
    if (!chk.passed) c.log << "warning: " << chk.name << ": " << chk.detail << '\n';
  }
  write_json(c.file("validation.json"), {{"admissibility", report.to_json()}, {"existence", existence.to_json()}});
  c.manifest["admissible"] = report.ok();
  return report;
}

int do_solve(const Context& c) {
  const auto report = admissibility(c);
  if (!report.ok()) {
    // figure presets reproduce published parameters; their pointwise
    // quantities do not need the admissibility conditions
    if (!is_figure_preset(c.spec.preset)) {
      c.log << report.to_text();
      return Exit::validation_failure;
    }
    c.log << "warning: preset is not admissible; see validation.json\n";
  }
  if (c.spec.preset == "fig1") figure1(c);
  if (c.spec.preset == "fig2") figure2(c);

  const auto field = optimal_field(c, c.cfg);
  field->write_csv(c.file("strategy.csv"));
  const auto vf = solve_value_function(c.cfg, c.spec.grid.M, c.spec.grid.N);
  vf.psi(1).write_csv(c.file("psi1.csv"));
  vf.psi(2).write_csv(c.file("psi2.csv"));
  const double y1 = c.cfg.line(1).y0, y2 = c.cfg.line(2).y0, x0 = c.cfg.prefs.initial_wealth;
  const double v = vf(0.0, y1, y2, x0);
  write_json(c.file("value.json"), {{"t", 0.0},
                                    {"y1", y1},
                                    {"y2", y2},
                                    {"x", x0},
                                    {"psi1", vf.psi(1)(0.0, y1)},
                                    {"psi2", vf.psi(2)(0.0, y2)},
                                    {"value", v}});
  c.log << fmt::format("V(0, {:.6g}, {:.6g}, {:.6g}) = {:.10g}\n", y1, y2, x0, v);
  return Exit::ok;
}

ControlLaw named_strategy(const Context& c) {
  if (c.spec.strategy == "no-shock") return control::from_field(optimal_field(c, without_shock(c.cfg)));
  if (c.spec.strategy == "no-reinsurance") return control::constant({1.0, 1.0, 0.0});
  return control::from_field(optimal_field(c, c.cfg));
}

int do_simulate(const Context& c) {
  const auto report = admissibility(c);
  if (!report.ok()) {
    c.log << report.to_text();
    return Exit::validation_failure;
  }
  const auto law = named_strategy(c);
  const auto bundle = simulate_wealth(c.cfg, law, c.spec.sim);
  bundle.write_summary_csv(c.file("paths_summary.csv"));
  const auto est = estimate_utility(c.cfg, law, c.spec.sim);
  json j = est.to_json();
  j["strategy"] = c.spec.strategy;
  write_json(c.file("utility.json"), j);
  c.log << fmt::format("{}: E[exp(-gamma X_T)] = {:.8g} +- {:.2g} ({} paths, {} excluded)\n", c.spec.strategy,
                       est.mean, est.std_error, est.n_paths, est.excluded);
  return Exit::ok;
}

int do_verify(const Context& c) {
  const auto report = admissibility(c);
  if (!report.ok()) {
    c.log << report.to_text();
    return Exit::validation_failure;
  }
  const auto opt = control::from_field(optimal_field(c, c.cfg));
  struct Perturbation {
    const char* name;
    double w_factor, du1, du2;
  };
  const std::vector<Perturbation> perturbations{
      {"w*0.9", 0.9, 0, 0},       {"w*1.1", 1.1, 0, 0},       {"u1+0.1", 1, 0.1, 0},        {"u1-0.1", 1, -0.1, 0},
      {"u2+0.1", 1, 0, 0.1},      {"u2-0.1", 1, 0, -0.1},     {"u1,u2+0.1", 1, 0.1, 0.1},   {"u1,u2-0.1", 1, -0.1, -0.1}};
  std::vector<ControlLaw> laws{opt};
  for (const auto& p : perturbations) laws.push_back(control::perturbed(opt, p.w_factor, p.du1, p.du2));
  const auto paired = estimate_utility_paired(c.cfg, laws, c.spec.sim);

  bool all = true;
  json checks = json::array();
  for (std::size_t i = 0; i < perturbations.size(); ++i) {
    const double d = paired.diff_mean[i + 1], se = paired.diff_std_error[i + 1];
    const bool pass = d >= -2.0 * se && paired.estimates[i + 1].excluded == 0;
    all = all && pass;
    checks.push_back({{"name", fmt::format("optimal_vs_{}", perturbations[i].name)},
                      {"passed", pass},
                      {"diff_mean", d},
                      {"diff_std_error", se}});
    c.log << fmt::format("{} optimal vs {}: diff {:.3e} (stderr {:.2e})\n", pass ? "PASS" : "FAIL",
                         perturbations[i].name, d, se);
  }

  const auto vf = solve_value_function(c.cfg, c.spec.grid.M, c.spec.grid.N);
  const double v = vf(0.0, c.cfg.line(1).y0, c.cfg.line(2).y0, c.cfg.prefs.initial_wealth);
  const auto& mc = paired.estimates.front();
  const bool consistent = std::abs(mc.mean - v) <= 3.0 * mc.std_error && mc.excluded == 0;
  all = all && consistent;
  checks.push_back({{"name", "pde_vs_monte_carlo"},
                    {"passed", consistent},
                    {"pde_value", v},
                    {"mc_mean", mc.mean},
                    {"mc_std_error", mc.std_error},
                    {"excluded_paths", mc.excluded}});
  c.log << fmt::format("{} PDE {:.8g} vs MC {:.8g} +- {:.2g}\n", consistent ? "PASS" : "FAIL", v, mc.mean,
                       mc.std_error);
  write_json(c.file("verify.json"), {{"passed", all}, {"checks", checks}});
  return all ? Exit::ok : Exit::property_violation;
}

std::vector<State> comparison_states(const ModelConfig& cfg) {
  std::vector<State> states;
  const double y0 = cfg.line(2).y0;
  for (int j = 0; j < 11; ++j) {
    for (int k = 0; k < 21; ++k) states.push_back({cfg.horizon() * j / 11.0, y0 - 1.0 + 0.1 * k});
  }
  return states;
}

int do_compare(const Context& c) {
  const auto report = admissibility(c);
  if (!report.ok()) {
    c.log << report.to_text();
    return Exit::validation_failure;
  }
  const auto cmp = compare_shock_effect(c.cfg, comparison_states(c.cfg));
  write_json(c.file("comparison.json"), cmp.to_json());
  auto out = open_csv(c.file("comparison.csv"));
  out << "t,y,w_star,w_no,u2_star,u2_no,sign_region,degenerate\n";
  for (const auto& r : cmp.records) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", num(r.t), num(r.y), num(r.w_star), num(r.w_no), num(r.u2_star),
                       num(r.u2_no), to_string(r.sign), r.degenerate ? 1 : 0);
  }
  for (const auto& v : cmp.violations) c.log << "violation: " << v << '\n';
  c.log << fmt::format("compare: {} states, {} violations\n", cmp.records.size(), cmp.violations.size());
  return cmp.violations.empty() ? Exit::ok : Exit::property_violation;
}

void set_parameter(ModelConfig& cfg, const std::string& p, double v) {
  if (p == "k") {
    cfg.market.jump = FinancialMarket::Jump::multiplicative;
    cfg.market.k = v;
  } else if (p == "theta_r") {
    cfg.line(1).premium.theta_r = v;
    cfg.line(2).premium.theta_r = v;
  } else if (p == "lambda0") {
    cfg.line(2).intensity.base = v;
  } else {
    cfg.prefs.gamma = v;
  }
}

std::vector<double> default_sweep(const ModelConfig& cfg, const std::string& p) {
  auto span = [](double lo, double hi) {
    std::vector<double> v(11);
    for (int i = 0; i <= 10; ++i) v[std::size_t(i)] = lo + (hi - lo) * i / 10.0;
    return v;
  };
  if (p == "k") {
    const double k = cfg.market.jump_scale(0.0);
    return span(0.0, k > 0.0 ? 2.0 * k : 0.05);
  }
  if (p == "theta_r") return span(0.05, 0.6);
  if (p == "lambda0") {
    const double b = cfg.line(2).intensity.base(0.0);
    return span(0.5 * b, 2.0 * b);
  }
  return span(0.25, 2.0);
}

int do_sweep(const Context& c) {
  const auto& p = c.spec.sweep_param;
  const auto values = c.spec.sweep_values.empty() ? default_sweep(c.cfg, p) : c.spec.sweep_values;
  const double y1 = c.cfg.line(1).y0, y2 = c.cfg.line(2).y0;
  auto out = open_csv(c.file("sweep.csv"));
  out << fmt::format("{},u1_star,u2_star,w_star,u2_no,w_no,region2,sign_region\n", p);
  std::vector<double> w;
  for (double v : values) {
    ModelConfig cfg = c.cfg;
    set_parameter(cfg, p, v);
    cfg.check();
    const auto s1 = solve_u1_star(cfg, 0.0, y1);
    const auto s2 = solve_second_line(cfg, 0.0, y2);
    const auto no = no_shock_strategy(cfg, 0.0, y1, y2);
    w.push_back(s2.w_star);
    out << fmt::format("{},{},{},{},{},{},{},{}\n", num(v), num(s1.u_star), num(s2.u2_star), num(s2.w_star),
                       num(no.u2_no), num(no.w_no), to_string(s2.region), to_string(s2.sign_region));
  }
  // a larger shock coefficient or catastrophe intensity never raises w*
  bool monotone = true;
  const bool checked = p == "k" || p == "lambda0";
  if (checked) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    for (std::size_t i = 1; i < order.size(); ++i) {
      if (w[order[i]] > w[order[i - 1]] + 1e-10) {
        monotone = false;
        c.log << fmt::format("violation: w* rises from {:.10g} to {:.10g} between {} = {:.6g} and {:.6g}\n",
                             w[order[i - 1]], w[order[i]], p, values[order[i - 1]], values[order[i]]);
      }
    }
  }
  write_json(c.file("sweep.json"),
             {{"parameter", p}, {"values", values}, {"w_star", w}, {"monotone_checked", checked}, {"monotone", monotone}});
  c.log << fmt::format("sweep {}: {} values{}\n", p, values.size(),
                       checked ? (monotone ? ", w* non-increasing" : ", monotonicity VIOLATED") : "");
  return monotone ? Exit::ok : Exit::property_violation;
}

json library_versions() {
  return {{"cshock", CSHOCK_VERSION},
          {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
          {"fmt", fmt::format("{}.{}.{}", FMT_VERSION / 10000, FMT_VERSION / 100 % 100, FMT_VERSION % 100)},
          {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                        NLOHMANN_JSON_VERSION_PATCH)},
          {"boost", BOOST_LIB_VERSION}};
}

}  // namespace

int run(const ExperimentSpec& spec, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  json manifest = {{"command", to_string(spec.command)},
                   {"preset", spec.preset},
                   {"seed", spec.sim.seed},
                   {"paths", spec.sim.paths},
                   {"steps", spec.sim.steps},
                   {"antithetic", spec.sim.antithetic},
                   {"grid", fmt::format("{}x{}", spec.grid.M, spec.grid.N)},
                   {"threads", default_thread_count()},
                   {"versions", library_versions()},
                   {"artifacts", json::array()}};
  if (spec.config) manifest["config_path"] = spec.config->string();

  int code = Exit::ok;
  try {
    fs::create_directories(spec.out);
    spec.check();
    const ModelConfig cfg = resolve_model(spec);
    manifest["config_hash"] = config_hash(cfg);
    Context c{spec, cfg, log, manifest};
    save_model(cfg, c.file("resolved_config.json"));
    switch (spec.command) {
      case Command::solve: code = do_solve(c); break;
      case Command::simulate: code = do_simulate(c); break;
      case Command::verify: code = do_verify(c); break;
      case Command::compare: code = do_compare(c); break;
      case Command::sweep: code = do_sweep(c); break;
    }
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    manifest["error"] = e.what();
    code = Exit::validation_failure;
  } catch (const json::exception& e) {
    log << "error: malformed config: " << e.what() << '\n';
    manifest["error"] = e.what();
    code = Exit::validation_failure;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    manifest["error"] = e.what();
    code = Exit::numerical_failure;
  }

  manifest["exit_code"] = code;
  manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::error_code ec;
  if (fs::is_directory(spec.out, ec)) write_json(spec.out / "manifest.json", manifest);
  return code;
}

}  // namespace cshock::cli

#pragma once

#include "cshock/interp.hpp"
#include "cshock/model.hpp"
#include "cshock/validation.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>

namespace cshock {

// For each line i the factor-only part of the value function solves
//
//   psi_t + b psi_y + a^2 psi_yy / 2 + g(t, y) psi = 0,   psi(T, .) = 1,
//
// where g is the minimised generator term (inf Psi1 or inf Psi2). g does not
// depend on psi, so every time step is one tridiagonal solve.

/// Uniform (t, y) grid with M time steps and N space intervals.
struct Grid1D {
  UniformAxis t;
  UniformAxis y;

  Grid1D() = default;
  Grid1D(double horizon, double y_lo, double y_hi, Eigen::Index M, Eigen::Index N);

  Eigen::Index M() const { return t.n - 1; }
  Eigen::Index N() const { return y.n - 1; }

  /// y0 +- max(6 a_max sqrt(T) + |int b|, half_width) for the given line.
  static Grid1D around(const ModelConfig& cfg, int line, Eigen::Index M = 200, Eigen::Index N = 400,
                       double half_width = 0.0);
};

class PdeSolution {
 public:
  PdeSolution() = default;
  PdeSolution(int line, Grid1D grid, MatrixXd values);

  int line() const { return line_; }
  const Grid1D& grid() const { return grid_; }
  /// values()(j, k) = psi(t_j, y_k).
  const MatrixXd& values() const { return values_; }

  /// Bilinear interpolation; throws DomainError outside the grid.
  double operator()(double t, double y) const;

  void write_csv(const std::filesystem::path& path) const;
  nlohmann::json to_json() const;

 private:
  int line_ = 1;
  Grid1D grid_;
  MatrixXd values_;
};

/// inf over the controls of the line's generator term at (t, y).
double min_generator_term(const ModelConfig& cfg, int line, double t, double y);

/// Reaction coefficient along the y-axis at time t.
using ReactionRow = std::function<void(double t, const UniformAxis& y, VectorXd& out)>;

/// Crank-Nicolson in time (Rannacher start: the first step is two implicit
/// Euler half steps), central differences in y, zero-curvature boundaries.
/// Throws PositivityError if any value is not strictly positive.
PdeSolution solve_reaction_diffusion(int line, const Grid1D& grid, const TimeCoefficient& drift,
                                     const TimeCoefficient& vol, const ReactionRow& reaction);

/// Solves the line's PDE on `grid`. Requires a(t) > 0 on [0, T].
PdeSolution solve_psi_pde(const ModelConfig& cfg, int line, const Grid1D& grid);

/// min_generator_term tabulated on a (t, y) grid; cubic in y, exact at the
/// time nodes.
class ReactionTable {
 public:
  static ReactionTable build(const ModelConfig& cfg, int line, double t0, Eigen::Index time_intervals, double y_lo,
                             double y_hi, Eigen::Index ny);
  /// Table from an explicit function g(t, y).
  static ReactionTable build(const std::function<double(double, double)>& g, double t0, double t1,
                             Eigen::Index time_intervals, double y_lo, double y_hi, Eigen::Index ny);

  const UniformAxis& t_axis() const { return t_; }
  const UniformAxis& y_axis() const { return y_; }
  double at(Eigen::Index j, double y) const { return cubic(y_, values_.row(j).data(), y); }

 private:
  UniformAxis t_;
  UniformAxis y_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> values_;
};

struct FkOptions {
  Eigen::Index steps = 200;  // Simpson panels in time
  Eigen::Index table_ny = 321;
  double table_sd = 8.0;     // table y-range in factor standard deviations
};

struct FkEstimate {
  double estimate = 1.0;
  double std_error = 0.0;
  long n_paths = 0;
};

/// Monte Carlo estimate of E[exp(int_t^T g(s, Y_s) ds)] with Y started at y.
/// Factor increments are exact Gaussians (the coefficients depend on t only),
/// the time integral is Simpson's rule and paths come in antithetic pairs.
FkEstimate feynman_kac_oracle(const ModelConfig& cfg, int line, double t, double y, long n_paths, std::uint64_t seed,
                              const FkOptions& opt = {});

/// Same estimator on a prebuilt table whose time axis ends at T; the path
/// starts at time node `start` (an even index) of the table.
FkEstimate feynman_kac_oracle(const ReactionTable& table, const TimeCoefficient& drift, const TimeCoefficient& vol,
                              Eigen::Index start, double y, long n_paths, std::uint64_t seed);

class ValueFunction {
 public:
  ValueFunction(const ModelConfig& cfg, PdeSolution psi1, PdeSolution psi2);

  /// e^{-gamma x B(t, T)} psi1(t, y1) psi2(t, y2).
  double operator()(double t, double y1, double y2, double x) const;

  const PdeSolution& psi(int line) const { return line == 1 ? psi1_ : psi2_; }

 private:
  ModelConfig cfg_;
  PdeSolution psi1_;
  PdeSolution psi2_;
};

double value_function(const ModelConfig& cfg, const PdeSolution& psi1, const PdeSolution& psi2, double t, double y1,
                      double y2, double x);

/// Both lines on their default grids.
ValueFunction solve_value_function(const ModelConfig& cfg, Eigen::Index M = 200, Eigen::Index N = 400);

/// Grid estimates of boundedness and Lipschitz moduli of c, q, lambda and of
/// uniform ellipticity of a and sigma.
ValidationReport check_existence_preconditions(const ModelConfig& cfg, Eigen::Index nt = 41, Eigen::Index ny = 81);

}  // namespace cshock

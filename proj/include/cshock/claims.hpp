#pragma once

#include <limits>
#include <random>
#include <span>
#include <vector>

namespace cshock {

/// Claim-size law on (0, inf): exponential, exponential truncated to [0, cap],
/// or a finite set of positive atoms.
class ClaimDistribution {
 public:
  enum class Kind { exponential, truncated_exponential, discrete };

  /// Exponential with unit rate.
  ClaimDistribution() = default;

  static ClaimDistribution exponential(double rate);
  static ClaimDistribution truncated_exponential(double rate, double cap);
  static ClaimDistribution discrete(std::vector<double> atoms, std::vector<double> weights);

  Kind kind() const { return kind_; }
  double rate() const { return rate_; }
  double cap() const { return cap_; }
  std::span<const double> atoms() const { return atoms_; }
  std::span<const double> weights() const { return weights_; }

  double mean() const { return mean_; }
  double second_moment() const { return second_moment_; }

  /// Upper end D of the support; +inf for the untruncated exponential.
  double support_bound() const;

  /// Supremum of tilts c for which E[e^{cZ}] is finite (the rate for the
  /// untruncated exponential, +inf otherwise). The moment itself diverges at
  /// the limit.
  double tilt_limit() const;

  /// E[Z^order e^{cZ}] for order in {0, 1, 2}. Throws DivergenceError when the
  /// moment is infinite or not representable in double precision.
  double tilted_moment(double c, int order) const;

  template <class URNG>
  double sample(URNG& rng) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return sample_from_uniform(unif(rng));
  }

  /// Inverse-CDF transform of u in [0, 1).
  double sample_from_uniform(double u) const;

 private:
  void finish();

  Kind kind_ = Kind::exponential;
  double rate_ = 1.0;
  double cap_ = std::numeric_limits<double>::infinity();
  std::vector<double> atoms_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  double mean_ = 1.0;
  double second_moment_ = 2.0;
};

}  // namespace cshock

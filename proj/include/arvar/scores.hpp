#pragma once

// Closed-form scoring rules for Gaussian forecasts: the CRPS and the
// Reliability Score (RS), their derivatives with respect to the forecast
// spread, and their known minimizers.

#include <cstddef>
#include <span>
#include <vector>

namespace arvar {

/// One prediction/observation pair. The spread is validated on construction,
/// so every scoring function downstream can assume sigma > 0.
class ForecastTriple {
 public:
  /// Throws std::domain_error for non-finite inputs or sigma <= 0.
  ForecastTriple(double mu, double sigma, double y_obs);

  double mu() const noexcept { return mu_; }
  double sigma() const noexcept { return sigma_; }
  double y_obs() const noexcept { return y_obs_; }
  /// Signed error y_obs - mu.
  double error() const noexcept { return y_obs_ - mu_; }

 private:
  double mu_;
  double sigma_;
  double y_obs_;
};

/// Relative errors eta_i = eps_i / (sqrt(2) sigma_i) in ascending order.
///
/// When built from errors and spreads, `rank(k)` gives the 1-based position of
/// the k-th input pair in the sorted sequence. Ties keep input order.
class RelativeErrorSet {
 public:
  /// Wraps an already sorted sequence; throws std::invalid_argument if it is
  /// empty or not non-decreasing.
  explicit RelativeErrorSet(std::vector<double> sorted_etas);

  /// Computes and stably sorts eta from paired errors and spreads. Throws
  /// std::domain_error on length mismatch, empty input or sigma <= 0.
  static RelativeErrorSet from_errors(std::span<const double> eps,
                                      std::span<const double> sigmas);

  std::span<const double> etas() const noexcept { return etas_; }
  std::size_t size() const noexcept { return etas_.size(); }
  /// 1-based rank of input index k (identity when built from sorted etas).
  std::size_t rank(std::size_t k) const noexcept { return ranks_[k]; }

 private:
  RelativeErrorSet() = default;
  std::vector<double> etas_;
  std::vector<std::size_t> ranks_;
};

/// Gaussian CRPS, sigma [ (e/sigma) erf(e/(sqrt2 sigma)) + sqrt(2/pi) exp(-e^2/2sigma^2) - 1/sqrt(pi) ].
double crps_gaussian(const ForecastTriple& t);

/// d CRPS / d sigma at fixed error: sqrt(2/pi) exp(-e^2/2sigma^2) - 1/sqrt(pi).
double crps_dsigma(const ForecastTriple& t);

/// Spread minimizing the CRPS for a given error, |eps| / sqrt(log 2).
double crps_sigma_min(double eps) noexcept;

/// Analytic Reliability Score of a sorted set. With `drop_constant` the
/// trailing -sqrt(2/pi)/2 is omitted, which is the form used when fitting.
double reliability_score(const RelativeErrorSet& set, bool drop_constant);

/// d RS_i / d sigma_i for the summand at 1-based `rank` (rank held fixed).
/// Throws std::domain_error if sigma <= 0 or rank is outside [1, n].
double rs_dsigma(std::size_t rank, double eta, double sigma, std::size_t n);

/// Relative errors that minimize RS for n samples: erf_inv((2i-1)/n - 1).
std::vector<double> rs_optimal_etas(std::size_t n);

/// Minimum attainable RS for n samples (RS evaluated at rs_optimal_etas).
double rs_min(std::size_t n, bool drop_constant);

}  // namespace arvar

#include "arvar/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "arvar/special.hpp"

namespace arvar {

namespace {

constexpr double kHalfSqrt2OverPi = 0.5 * kSqrt2OverPi;

}  // namespace

ForecastTriple::ForecastTriple(double mu, double sigma, double y_obs)
    : mu_(mu), sigma_(sigma), y_obs_(y_obs) {
  if (!std::isfinite(mu) || !std::isfinite(sigma) || !std::isfinite(y_obs)) {
    throw std::domain_error("ForecastTriple: non-finite value");
  }
  if (!(sigma > 0.0)) {
    throw std::domain_error("ForecastTriple: sigma must be positive, got " +
                            std::to_string(sigma));
  }
}

RelativeErrorSet::RelativeErrorSet(std::vector<double> sorted_etas)
    : etas_(std::move(sorted_etas)) {
  if (etas_.empty()) {
    throw std::invalid_argument("RelativeErrorSet: empty set");
  }
  if (!std::is_sorted(etas_.begin(), etas_.end())) {
    throw std::invalid_argument("RelativeErrorSet: etas must be sorted ascending");
  }
  ranks_.resize(etas_.size());
  std::iota(ranks_.begin(), ranks_.end(), std::size_t{1});
}

RelativeErrorSet RelativeErrorSet::from_errors(std::span<const double> eps,
                                               std::span<const double> sigmas) {
  if (eps.size() != sigmas.size()) {
    throw std::domain_error("RelativeErrorSet: eps and sigma lengths differ");
  }
  if (eps.empty()) {
    throw std::domain_error("RelativeErrorSet: empty input");
  }
  const std::size_t n = eps.size();
  std::vector<double> raw(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(sigmas[k] > 0.0)) {
      throw std::domain_error("RelativeErrorSet: sigma must be positive");
    }
    raw[k] = eps[k] / (kSqrt2 * sigmas[k]);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });

  RelativeErrorSet set;
  set.etas_.resize(n);
  set.ranks_.resize(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    set.etas_[pos] = raw[order[pos]];
    set.ranks_[order[pos]] = pos + 1;
  }
  return set;
}

double crps_gaussian(const ForecastTriple& t) {
  const double eps = t.error();
  const double sigma = t.sigma();
  const double z = eps / sigma;
  // sigma * (z erf(z/sqrt2)) is written as eps * erf(.) so it stays exact as sigma -> 0.
  return eps * std::erf(z / kSqrt2) +
         sigma * (kSqrt2OverPi * std::exp(-0.5 * z * z) - kInvSqrtPi);
}

double crps_dsigma(const ForecastTriple& t) {
  const double z = t.error() / t.sigma();
  return kSqrt2OverPi * std::exp(-0.5 * z * z) - kInvSqrtPi;
}

double crps_sigma_min(double eps) noexcept {
  return std::abs(eps) / std::sqrt(std::log(2.0));
}

double reliability_score(const RelativeErrorSet& set, bool drop_constant) {
  const auto etas = set.etas();
  const double n = static_cast<double>(etas.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < etas.size(); ++k) {
    const double eta = etas[k];
    const double i = static_cast<double>(k + 1);
    sum += eta / n * (std::erf(eta) + 1.0) - eta * (2.0 * i - 1.0) / (n * n) +
           std::exp(-eta * eta) * kInvSqrtPi / n;
  }
  return drop_constant ? sum : sum - kHalfSqrt2OverPi;
}

double rs_dsigma(std::size_t rank, double eta, double sigma, std::size_t n) {
  if (!(sigma > 0.0)) {
    throw std::domain_error("rs_dsigma: sigma must be positive");
  }
  if (rank < 1 || rank > n) {
    throw std::domain_error("rs_dsigma: rank outside [1, n]");
  }
  const double nn = static_cast<double>(n);
  const double target = (2.0 * static_cast<double>(rank) - 1.0) / nn;
  return eta / (nn * sigma) * (target - std::erf(eta) - 1.0);
}

std::vector<double> rs_optimal_etas(std::size_t n) {
  std::vector<double> etas(n);
  const double nn = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    etas[k] = erf_inv((2.0 * static_cast<double>(k + 1) - 1.0) / nn - 1.0);
  }
  // erf_inv is odd; enforce exact antisymmetry against rounding in the argument.
  for (std::size_t k = 0; k < n / 2; ++k) {
    etas[n - 1 - k] = -etas[k];
  }
  if (n % 2 == 1) etas[n / 2] = 0.0;
  return etas;
}

double rs_min(std::size_t n, bool drop_constant) {
  if (n == 0) {
    throw std::domain_error("rs_min: n must be at least 1");
  }
  const auto etas = rs_optimal_etas(n);
  const double nn = static_cast<double>(n);
  double sum = 0.0;
  for (double eta : etas) {
    sum += std::exp(-eta * eta) * kInvSqrtPi / nn;
  }
  return drop_constant ? sum : sum - kHalfSqrt2OverPi;
}

}  // namespace arvar

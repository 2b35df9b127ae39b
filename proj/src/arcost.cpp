#include "arvar/arcost.hpp"

#include <cmath>
#include <stdexcept>

#include "arvar/scores.hpp"
#include "arvar/special.hpp"

namespace arvar {

namespace {

void check_inputs(std::span<const double> sigmas, std::span<const double> eps) {
  if (sigmas.size() != eps.size()) {
    throw std::domain_error("AR cost: sigma and eps lengths differ");
  }
  if (eps.empty()) {
    throw std::domain_error("AR cost: empty input");
  }
}

double mean_crps(std::span<const double> sigmas, std::span<const double> eps) {
  double sum = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    sum += crps_gaussian(ForecastTriple(0.0, sigmas[i], eps[i]));
  }
  return sum / static_cast<double>(eps.size());
}

}  // namespace

double crps_min_total(std::span<const double> eps) {
  if (eps.empty()) {
    throw std::domain_error("crps_min_total: empty error list");
  }
  double sum = 0.0;
  for (double e : eps) sum += std::abs(e);
  return std::sqrt(std::log(4.0)) / (2.0 * static_cast<double>(eps.size())) * sum;
}

ArWeights compute_beta(std::span<const double> eps, bool drop_constant) {
  ArWeights w;
  w.crps_min_total = crps_min_total(eps);
  w.rs_min_val = rs_min(eps.size(), drop_constant);
  const double denom = w.crps_min_total + w.rs_min_val;
  w.beta = denom > 0.0 ? w.rs_min_val / denom : 0.5;
  return w;
}

ArWeights manual_weights(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::domain_error("manual_weights: beta must lie in [0, 1]");
  }
  ArWeights w;
  w.beta = beta;
  return w;
}

double ar_cost(std::span<const double> sigmas, std::span<const double> eps,
               const ArWeights& weights, bool drop_constant) {
  check_inputs(sigmas, eps);
  const auto set = RelativeErrorSet::from_errors(eps, sigmas);
  return weights.beta * mean_crps(sigmas, eps) +
         (1.0 - weights.beta) * reliability_score(set, drop_constant);
}

std::vector<double> ar_grad(std::span<const double> sigmas, std::span<const double> eps,
                            const ArWeights& weights, bool /*drop_constant*/) {
  check_inputs(sigmas, eps);
  const auto set = RelativeErrorSet::from_errors(eps, sigmas);
  const std::size_t n = eps.size();
  const double nn = static_cast<double>(n);
  std::vector<double> grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t rank = set.rank(i);
    const double eta = set.etas()[rank - 1];
    grad[i] = weights.beta / nn * crps_dsigma(ForecastTriple(0.0, sigmas[i], eps[i])) +
              (1.0 - weights.beta) * rs_dsigma(rank, eta, sigmas[i], n);
  }
  return grad;
}

double ar_cost_log_grad(std::span<const double> sigmas, std::span<const double> eps,
                        const ArWeights& weights, bool drop_constant,
                        std::span<double> grad_log_sigma) {
  check_inputs(sigmas, eps);
  if (grad_log_sigma.size() != eps.size()) {
    throw std::domain_error("AR cost: gradient buffer has wrong length");
  }
  const auto set = RelativeErrorSet::from_errors(eps, sigmas);
  const std::size_t n = eps.size();
  const double nn = static_cast<double>(n);
  const double beta = weights.beta;

  double crps_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sigma = sigmas[i];
    const double e = eps[i];
    const double z = e / sigma;
    const double gauss = std::exp(-0.5 * z * z);
    crps_sum += e * std::erf(z / kSqrt2) + sigma * (kSqrt2OverPi * gauss - kInvSqrtPi);

    const std::size_t rank = set.rank(i);
    const double eta = set.etas()[rank - 1];
    const double target = (2.0 * static_cast<double>(rank) - 1.0) / nn;
    // sigma * dRS_i/dsigma = (eta/N) * ((2i-1)/N - erf(eta) - 1)
    const double rs_part = eta / nn * (target - std::erf(eta) - 1.0);
    const double crps_part = sigma * (kSqrt2OverPi * gauss - kInvSqrtPi) / nn;
    grad_log_sigma[i] = beta * crps_part + (1.0 - beta) * rs_part;
  }
  return beta * crps_sum / nn + (1.0 - beta) * reliability_score(set, drop_constant);
}

}  // namespace arvar

#pragma once

// The Accuracy-Reliability (AR) cost: a scalarization of the mean CRPS and
// the Reliability Score over a set of forecast spreads with fixed errors,
//
//   AR = beta * mean(CRPS) + (1 - beta) * RS,
//   beta = RS_min / (CRPS_min + RS_min).
//
// beta depends only on the errors and their count, so it is computed once per
// dataset and held fixed while the spreads are optimized.

#include <span>
#include <vector>

namespace arvar {

struct ArWeights {
  double beta = 0.5;
  double crps_min_total = 0.0;
  double rs_min_val = 0.0;
};

/// Lower bound of the mean CRPS used for weighting, sqrt(log 4)/(2N) * sum |eps_i|.
/// Absolute errors are summed so the bound is never negative.
/// Throws std::domain_error on an empty list.
double crps_min_total(std::span<const double> eps);

/// beta from the errors. Falls back to 0.5 when both minima vanish.
ArWeights compute_beta(std::span<const double> eps, bool drop_constant = true);

/// A manually chosen beta in [0, 1]; the minima are left at zero.
ArWeights manual_weights(double beta);

/// AR cost for spreads `sigmas` paired with errors `eps`.
/// Throws std::domain_error on length mismatch, empty input or sigma <= 0.
double ar_cost(std::span<const double> sigmas, std::span<const double> eps,
               const ArWeights& weights, bool drop_constant = true);

/// Gradient of ar_cost with respect to each sigma_i, with the sort order of
/// the relative errors treated as locally constant.
std::vector<double> ar_grad(std::span<const double> sigmas, std::span<const double> eps,
                            const ArWeights& weights, bool drop_constant = true);

/// AR cost and its gradient with respect to log sigma_i (that is,
/// sigma_i * dAR/dsigma_i) written into `grad_log_sigma`. This form stays
/// finite when sigma_i is tiny and is what the fitting code uses.
double ar_cost_log_grad(std::span<const double> sigmas, std::span<const double> eps,
                        const ArWeights& weights, bool drop_constant,
                        std::span<double> grad_log_sigma);

}  // namespace arvar

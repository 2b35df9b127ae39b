#pragma once

// Homoskedastic Gaussian-process regression with a squared-exponential
// kernel. It only supplies the mean function f(x) whose residuals feed the
// variance fits.

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>

#include "arvar/optim.hpp"

namespace arvar {

/// sigma_f^2 exp(-|xi - xj|^2 / (2 ell^2)). Throws std::domain_error if
/// ell <= 0 or the dimensions differ.
double se_kernel(std::span<const double> xi, std::span<const double> xj, double sigma_f,
                 double ell);

struct GpHyperparameters {
  double sigma_f = 1.0;
  double ell = 1.0;
  double noise_var = 0.0;
};

class GpModel {
 public:
  /// Conditions on the training set (rows of `inputs`). Adds diagonal jitter
  /// from 1e-10 up to 1e-6 if the kernel matrix is not numerically positive
  /// definite; throws std::runtime_error beyond that.
  GpModel(Eigen::MatrixXd inputs, Eigen::VectorXd targets, GpHyperparameters hyper);

  const GpHyperparameters& hyperparameters() const noexcept { return hyper_; }
  double jitter() const noexcept { return jitter_; }
  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(inputs_.cols()); }
  const Eigen::MatrixXd& inputs() const noexcept { return inputs_; }
  const Eigen::VectorXd& targets() const noexcept { return targets_; }

  double predict_mean(std::span<const double> x) const;
  /// Posterior variance of f(x) plus the noise variance.
  double predict_variance(std::span<const double> x) const;

 private:
  Eigen::VectorXd kernel_column(std::span<const double> x) const;

  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  GpHyperparameters hyper_;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
};

/// Negative log marginal likelihood and its gradient with respect to
/// (log sigma_f, log ell, log noise_var). Returns +inf if the kernel matrix
/// cannot be factorized.
double gp_negative_log_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                  const GpHyperparameters& hyper, Eigen::Vector3d* grad = nullptr);

struct GpFitOptions {
  int restarts = 3;
  std::uint64_t seed = 0;
  /// When set, the noise variance is held at this value instead of learned.
  std::optional<double> fixed_noise_var;
  OptimOptions optim{1e-6, 300, 10};
};

struct GpFitResult {
  GpModel model;
  double cost;  ///< NLL at the returned hyperparameters
  OptimTrace trace;
};

/// Fits the hyperparameters by minimizing the NLL from several seeded
/// starting points. Throws std::domain_error for fewer than two samples.
GpFitResult gp_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                   const GpFitOptions& opts = {});

double gp_predict_mean(const GpModel& model, std::span<const double> x);

}  // namespace arvar

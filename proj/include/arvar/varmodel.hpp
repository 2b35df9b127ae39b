#pragma once

// Parameterizations of the forecast spread sigma(x) and their fits by
// minimizing the AR cost over the training errors.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "arvar/arcost.hpp"
#include "arvar/optim.hpp"

namespace arvar {

/// An input point and the signed error eps = y_obs - mu observed there.
struct ErrorSample {
  std::vector<double> x;
  double eps = 0.0;
};

/// Input dimension shared by all samples. Throws std::domain_error for an
/// empty list, inconsistent dimensions or non-finite values.
std::size_t checked_dimension(std::span<const ErrorSample> data);

std::vector<double> errors_of(std::span<const ErrorSample> data);

/// Root-mean-square error, the initial spread used by every fit (1 if all
/// errors are zero).
double initial_sigma(std::span<const double> eps);

struct CostGradient {
  double value = 0.0;
  Vector grad;
};

// --------------------------------------------------------------------------
// Free per-point spreads
// --------------------------------------------------------------------------

class PerPointModel {
 public:
  PerPointModel() = default;
  explicit PerPointModel(std::vector<double> log_sigmas);

  std::span<const double> log_sigmas() const noexcept { return log_sigmas_; }
  std::size_t size() const noexcept { return log_sigmas_.size(); }

 private:
  std::vector<double> log_sigmas_;
};

/// sigma of training point `index`. Throws std::out_of_range.
double predict_sigma(const PerPointModel& model, std::size_t index);

struct FitOptions {
  OptimOptions optim;
  bool drop_constant = true;
};

struct PerPointFit {
  PerPointModel model;
  ArWeights weights;
  double cost = 0.0;
  OptimTrace trace;
};

/// Minimizes AR directly over log sigma_i. Needs at least one sample.
/// Throws OptimError if the optimizer stops away from a stationary point.
PerPointFit fit_per_point(std::span<const double> eps, const FitOptions& opts = {});

CostGradient param_grad(const PerPointModel& model, std::span<const double> eps,
                        const ArWeights& weights, bool drop_constant = true);

// --------------------------------------------------------------------------
// Polynomial in one input
// --------------------------------------------------------------------------

inline constexpr double kSigmaFloor = 1e-3;

/// Keeps a raw polynomial value positive: identity above 3*floor, and a C1
/// exponential blend down to the floor below it.
double positivity_guard(double p) noexcept;
double positivity_guard_derivative(double p) noexcept;

/// sigma(x) = guard(sum_l theta_l (x / x_scale)^l), order at most 10.
class PolynomialModel {
 public:
  static constexpr int kMaxOrder = 10;

  PolynomialModel() : thetas_{1.0} {}
  /// Throws std::invalid_argument if thetas is empty, longer than 11, or
  /// x_scale is not positive.
  explicit PolynomialModel(std::vector<double> thetas, double x_scale = 1.0);

  std::span<const double> thetas() const noexcept { return thetas_; }
  int order() const noexcept { return static_cast<int>(thetas_.size()) - 1; }
  double x_scale() const noexcept { return x_scale_; }
  /// Unguarded polynomial value.
  double raw(double x) const noexcept;

 private:
  std::vector<double> thetas_;
  double x_scale_ = 1.0;
};

double predict_sigma(const PolynomialModel& model, double x);
/// Throws std::domain_error unless x is one-dimensional.
double predict_sigma(const PolynomialModel& model, std::span<const double> x);

struct PolyFitOptions {
  double tol = 1e-6;
  OptimOptions optim;
  bool drop_constant = true;
};

struct PolyFit {
  PolynomialModel model;
  ArWeights weights;
  double cost = 0.0;
  /// AR after each step of the escalation; entry 0 is the constant start.
  std::vector<double> ar_history;
  /// True when escalation ended because the warm start was already stationary.
  bool stopped_at_warm_start = false;
};

/// Order-escalating polynomial fit: starting from the constant RMS error,
/// each round appends a zero coefficient, warm-starts BFGS from the previous
/// solution and stops once the AR change falls to `tol` or order 10 is reached.
/// Throws std::domain_error for non-1-D input or fewer than two samples.
PolyFit fit_polynomial(std::span<const ErrorSample> data, const PolyFitOptions& opts = {});

CostGradient param_grad(const PolynomialModel& model, std::span<const ErrorSample> data,
                        const ArWeights& weights, bool drop_constant = true);

// --------------------------------------------------------------------------
// Two-hidden-layer network
// --------------------------------------------------------------------------

/// d -> 20 (tanh) -> 5 (symmetric saturating linear) -> 1 (exp(-z^2)).
///
/// Inputs are mapped affinely by (x - offset) / scale before the first layer,
/// and the unit-bounded output is multiplied by `output_scale`.
class MlpModel {
 public:
  static constexpr int kHidden1 = 20;
  static constexpr int kHidden2 = 5;

  MlpModel() : MlpModel(1) {}
  /// All weights zero, identity input map, output scale 1.
  explicit MlpModel(std::size_t input_dim);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t num_parameters() const noexcept;

  /// Packed as W1 (row-major), b1, W2 (row-major), b2, w3, b3.
  Vector parameters() const;
  void set_parameters(const Vector& params);

  const Vector& input_offset() const noexcept { return input_offset_; }
  const Vector& input_scale() const noexcept { return input_scale_; }
  void set_input_map(Vector offset, Vector scale);
  double output_scale() const noexcept { return output_scale_; }
  void set_output_scale(double s);

  /// Output-layer pre-activation z for one input.
  double pre_activation(std::span<const double> x) const;

  /// Batched sigma for the rows of `x` (N x d); optionally also z.
  std::vector<double> sigmas(const Eigen::MatrixXd& x, std::vector<double>* z = nullptr) const;

  /// Backpropagates dL/dlog(sigma_i) to the packed parameter gradient.
  Vector backprop_log_sigma(const Eigen::MatrixXd& x, std::span<const double> dlog_sigma) const;

  /// Mean of the squared weights and biases.
  double mean_squared_weights() const;

 private:
  Eigen::MatrixXd normalize(const Eigen::MatrixXd& x) const;

  std::size_t input_dim_;
  Eigen::MatrixXd w1_;
  Vector b1_;
  Eigen::MatrixXd w2_;
  Vector b2_;
  Vector w3_;
  double b3_ = 0.0;
  Vector input_offset_;
  Vector input_scale_;
  double output_scale_ = 1.0;
};

double satlins(double a) noexcept;

/// Throws std::domain_error on dimension mismatch.
double predict_sigma(const MlpModel& model, std::span<const double> x);

/// How the weight penalty enters the training cost.
///  kShareOfTotal: lambda is reset at every evaluation so the penalty is
///    exactly a share r of the total, i.e. the cost is AR / (1 - r).
///  kFixedWeight: (1 - r) * AR + r * mean(w^2).
enum class MlpPenalty { kShareOfTotal, kFixedWeight };

struct MlpFitOptions {
  OptimOptions optim{1e-6, 2000, 10};
  int restarts = 5;
  double train_fraction = 0.7;
  /// Share r of the total training cost given to the weight penalty.
  double regularization = 0.2;
  MlpPenalty penalty = MlpPenalty::kShareOfTotal;
  double output_scale = 1.0;
  bool drop_constant = true;
};

struct MlpFit {
  MlpModel model;
  ArWeights weights;           ///< computed from the training-split errors
  double cost = 0.0;           ///< regularized training cost of the returned network
  std::vector<double> restart_costs;
  std::size_t best_restart = 0;
  OptimTrace trace;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> validation_indices;
};

/// Random 70/30 split, then `restarts` seeded initializations trained by BFGS
/// on the penalized AR cost with validation early stopping; returns the
/// network with the lowest training cost. Throws std::domain_error for fewer
/// than 10 samples.
MlpFit fit_mlp(std::span<const ErrorSample> data, const MlpFitOptions& opts, std::uint64_t seed);

/// Trains one network from the given initial parameters on a fixed split.
MlpFit train_mlp(std::span<const ErrorSample> data, std::span<const std::size_t> train,
                 std::span<const std::size_t> validation, const MlpFitOptions& opts,
                 const Vector& init_params);

/// Glorot-uniform parameters for a network of the given input dimension.
Vector mlp_initial_parameters(std::size_t input_dim, std::uint64_t seed);

/// AR cost and its gradient with respect to the packed parameters.
CostGradient param_grad(const MlpModel& model, std::span<const ErrorSample> data,
                        const ArWeights& weights, bool drop_constant = true);

// --------------------------------------------------------------------------

using VarianceModel = std::variant<PerPointModel, PolynomialModel, MlpModel>;

Eigen::MatrixXd input_matrix(std::span<const ErrorSample> data);

}  // namespace arvar

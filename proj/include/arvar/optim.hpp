#pragma once

// Quasi-Newton (BFGS) minimization with a strong-Wolfe cubic line search, and
// a seeded multi-restart driver. Every fitting path in the library goes
// through `minimize`.

#include <Eigen/Core>

#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <type_traits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace arvar {

using Vector = Eigen::VectorXd;

/// Returns f(x) and writes the gradient into `grad` (already sized).
/// Returning a non-finite value marks x as infeasible; the line search backs off.
using ObjectiveFn = std::function<double(const Vector& x, Vector& grad)>;
using ValidationFn = std::function<double(const Vector& x)>;

struct OptimOptions {
  double gtol = 1e-6;    ///< stop when the max-norm of the gradient drops below
  int max_iter = 500;
  int patience = 10;     ///< accepted iterations without validation improvement
  double ls_c1 = 1e-4;
  double ls_c2 = 0.9;
  int max_ls_trials = 25;

  /// Throws std::invalid_argument unless 0 < c1 < c2 < 1, patience >= 1,
  /// max_iter >= 0 and gtol >= 0.
  void validate() const;
};

enum class Termination {
  GradientTolerance,
  MaxIterations,
  LineSearchFailure,
  EarlyStopping,
};

const char* to_string(Termination reason) noexcept;

struct IterationRecord {
  double objective = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  double validation = std::numeric_limits<double>::quiet_NaN();
};

struct OptimTrace {
  std::vector<IterationRecord> iterations;  ///< one entry per accepted step
  Termination reason = Termination::MaxIterations;
  int evaluations = 0;
  double initial_objective = 0.0;
};

struct OptimResult {
  Vector x;
  double objective = 0.0;
  double grad_norm = 0.0;
  OptimTrace trace;
};

class OptimError : public std::runtime_error {
 public:
  OptimError(const std::string& what, OptimTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const OptimTrace& trace() const noexcept { return trace_; }

 private:
  OptimTrace trace_;
};

/// BFGS from x0. With a validation callable, training stops once the
/// validation value has not improved for `opts.patience` consecutive accepted
/// iterations and the best-validation iterate is returned.
///
/// Throws OptimError if the objective or gradient is non-finite at x0.
OptimResult minimize(const ObjectiveFn& objective, Vector x0, const OptimOptions& opts,
                     const ValidationFn& validation = {});

template <class R>
concept HasCost = requires(const R& r) {
  { r.cost } -> std::convertible_to<double>;
};

template <class R>
struct RestartResult {
  R best;
  std::size_t best_index = 0;
  std::vector<double> costs;  ///< per seed; +inf for failed restarts
};

class RestartError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs `fit(seed)` for each seed in order and keeps the lowest-cost result
/// (first one wins ties). Individual failures are tolerated; if every restart
/// throws, a RestartError lists all the messages.
template <class Fit>
  requires HasCost<std::invoke_result_t<Fit&, std::uint64_t>>
auto multi_restart(Fit&& fit, std::span<const std::uint64_t> seeds)
    -> RestartResult<std::invoke_result_t<Fit&, std::uint64_t>> {
  using R = std::invoke_result_t<Fit&, std::uint64_t>;
  if (seeds.empty()) {
    throw std::invalid_argument("multi_restart: need at least one seed");
  }
  std::vector<double> costs;
  std::vector<std::string> failures;
  std::optional<R> best;
  std::size_t best_index = 0;
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    try {
      R candidate = fit(seeds[k]);
      const double cost = static_cast<double>(candidate.cost);
      costs.push_back(cost);
      if (!best || cost < static_cast<double>(best->cost)) {
        best = std::move(candidate);
        best_index = k;
      }
    } catch (const std::exception& e) {
      costs.push_back(std::numeric_limits<double>::infinity());
      failures.push_back("seed " + std::to_string(seeds[k]) + ": " + e.what());
    }
  }
  if (!best) {
    std::string msg = "multi_restart: all restarts failed";
    for (const auto& f : failures) msg += "\n  " + f;
    throw RestartError(msg);
  }
  return RestartResult<R>{std::move(*best), best_index, std::move(costs)};
}

}  // namespace arvar

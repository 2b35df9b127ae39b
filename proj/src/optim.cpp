#include "arvar/optim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace arvar {

void OptimOptions::validate() const {
  if (!(ls_c1 > 0.0 && ls_c1 < ls_c2 && ls_c2 < 1.0)) {
    throw std::invalid_argument("OptimOptions: require 0 < c1 < c2 < 1");
  }
  if (patience < 1) throw std::invalid_argument("OptimOptions: patience must be >= 1");
  if (max_iter < 0) throw std::invalid_argument("OptimOptions: max_iter must be >= 0");
  if (!(gtol >= 0.0)) throw std::invalid_argument("OptimOptions: gtol must be >= 0");
  if (max_ls_trials < 1) throw std::invalid_argument("OptimOptions: max_ls_trials must be >= 1");
}

const char* to_string(Termination reason) noexcept {
  switch (reason) {
    case Termination::GradientTolerance: return "gradient-tolerance";
    case Termination::MaxIterations: return "max-iterations";
    case Termination::LineSearchFailure: return "line-search-failure";
    case Termination::EarlyStopping: return "early-stopping";
  }
  return "unknown";
}

namespace {

struct LinePoint {
  double alpha = 0.0;
  double phi = 0.0;
  double dphi = 0.0;
  Vector x;
  Vector g;
};

/// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db); NaN when
/// the cubic has no usable minimizer.
double cubic_minimizer(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double denom = db - da + 2.0 * d2;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return b - (b - a) * (db + d2 - d1) / denom;
}

class LineSearch {
 public:
  LineSearch(const ObjectiveFn& f, const Vector& x, const Vector& p, double phi0, double dphi0,
             const OptimOptions& opts, int& evaluations)
      : f_(f), x_(x), p_(p), phi0_(phi0), dphi0_(dphi0), opts_(opts), evals_(evaluations) {}

  /// Strong-Wolfe step, or nullopt when none was found within the trial budget.
  std::optional<LinePoint> run(double alpha_init) {
    LinePoint prev{0.0, phi0_, dphi0_, x_, Vector()};
    double alpha = alpha_init;
    for (int i = 0; trials_ < opts_.max_ls_trials; ++i) {
      LinePoint cur = eval(alpha);
      if (!std::isfinite(cur.phi) || cur.phi > phi0_ + opts_.ls_c1 * alpha * dphi0_ ||
          (i > 0 && cur.phi >= prev.phi)) {
        return zoom(prev, cur);
      }
      if (std::abs(cur.dphi) <= -opts_.ls_c2 * dphi0_) return cur;
      if (cur.dphi >= 0.0) return zoom(cur, prev);
      // Extrapolate, keeping the new trial within [2, 8] times the current step.
      double next = cubic_minimizer(prev.alpha, prev.phi, prev.dphi, cur.alpha, cur.phi, cur.dphi);
      if (!std::isfinite(next) || next < 2.0 * alpha || next > 8.0 * alpha) next = 4.0 * alpha;
      prev = std::move(cur);
      alpha = next;
    }
    return std::nullopt;
  }

 private:
  LinePoint eval(double alpha) {
    ++trials_;
    ++evals_;
    LinePoint pt;
    pt.alpha = alpha;
    pt.x = x_ + alpha * p_;
    pt.g = Vector::Zero(x_.size());
    pt.phi = f_(pt.x, pt.g);
    if (!std::isfinite(pt.phi) || !pt.g.allFinite()) {
      pt.phi = std::numeric_limits<double>::infinity();
      pt.dphi = std::numeric_limits<double>::quiet_NaN();
    } else {
      pt.dphi = pt.g.dot(p_);
    }
    return pt;
  }

  std::optional<LinePoint> zoom(LinePoint lo, LinePoint hi) {
    while (trials_ < opts_.max_ls_trials) {
      const double width = hi.alpha - lo.alpha;
      if (std::abs(width) <= 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
      double alpha = std::numeric_limits<double>::quiet_NaN();
      if (std::isfinite(hi.phi)) {
        alpha = cubic_minimizer(lo.alpha, lo.phi, lo.dphi, hi.alpha, hi.phi, hi.dphi);
      }
      const double a = std::min(lo.alpha, hi.alpha);
      const double b = std::max(lo.alpha, hi.alpha);
      const double margin = 0.1 * (b - a);
      // Bisection safeguard when the cubic step is unusable or too close to an end.
      if (!std::isfinite(alpha) || alpha < a + margin || alpha > b - margin) {
        alpha = 0.5 * (lo.alpha + hi.alpha);
      }
      LinePoint cur = eval(alpha);
      if (!std::isfinite(cur.phi) || cur.phi > phi0_ + opts_.ls_c1 * alpha * dphi0_ ||
          cur.phi >= lo.phi) {
        hi = std::move(cur);
      } else {
        if (std::abs(cur.dphi) <= -opts_.ls_c2 * dphi0_) return cur;
        if (cur.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = std::move(lo);
        lo = std::move(cur);
      }
    }
    return std::nullopt;
  }

  const ObjectiveFn& f_;
  const Vector& x_;
  const Vector& p_;
  double phi0_;
  double dphi0_;
  const OptimOptions& opts_;
  int& evals_;
  int trials_ = 0;
};

}  // namespace

OptimResult minimize(const ObjectiveFn& objective, Vector x0, const OptimOptions& opts,
                     const ValidationFn& validation) {
  opts.validate();
  const Eigen::Index n = x0.size();
  OptimTrace trace;

  Vector x = std::move(x0);
  Vector g = Vector::Zero(n);
  double fx = objective(x, g);
  ++trace.evaluations;
  trace.initial_objective = fx;
  if (!std::isfinite(fx) || !g.allFinite()) {
    throw OptimError("minimize: objective or gradient is not finite at the starting point",
                     std::move(trace));
  }

  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
  bool hinv_is_identity = true;
  bool scaled = false;

  double best_val = std::numeric_limits<double>::infinity();
  Vector best_x = x;
  double best_f = fx;
  int stall = 0;
  if (validation) best_val = validation(x);

  trace.reason = Termination::MaxIterations;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const double gnorm = g.lpNorm<Eigen::Infinity>();
    if (gnorm <= opts.gtol) {
      trace.reason = Termination::GradientTolerance;
      break;
    }

    Vector p = -hinv * g;
    double dphi0 = g.dot(p);
    if (!(dphi0 < 0.0)) {
      hinv.setIdentity();
      hinv_is_identity = true;
      p = -g;
      dphi0 = g.dot(p);
    }
    // Without curvature information the first trial moves the largest
    // coordinate by one unit, independent of the objective's scale.
    double alpha_init = 1.0;
    if (hinv_is_identity && !scaled) alpha_init = 1.0 / gnorm;

    std::optional<LinePoint> step =
        LineSearch(objective, x, p, fx, dphi0, opts, trace.evaluations).run(alpha_init);
    if (!step && !hinv_is_identity) {
      // Retry once along steepest descent before giving up.
      hinv.setIdentity();
      hinv_is_identity = true;
      scaled = false;
      p = -g;
      dphi0 = g.dot(p);
      step = LineSearch(objective, x, p, fx, dphi0, opts, trace.evaluations)
                 .run(1.0 / gnorm);
    }
    if (!step) {
      trace.reason = Termination::LineSearchFailure;
      break;
    }

    const Vector s = step->x - x;
    const Vector y = step->g - g;
    x = std::move(step->x);
    g = std::move(step->g);
    fx = step->phi;

    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      if (!scaled) {
        hinv = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Vector hy = hinv * y;
      const double yhy = y.dot(hy);
      hinv -= rho * (hy * s.transpose() + s * hy.transpose());
      hinv += (rho * rho * yhy + rho) * (s * s.transpose());
      hinv_is_identity = false;
    }

    IterationRecord rec;
    rec.objective = fx;
    rec.grad_norm = g.lpNorm<Eigen::Infinity>();
    rec.step = step->alpha;
    if (validation) {
      rec.validation = validation(x);
      if (rec.validation < best_val) {
        best_val = rec.validation;
        best_x = x;
        best_f = fx;
        stall = 0;
      } else {
        ++stall;
      }
    }
    trace.iterations.push_back(rec);
    if (validation && stall >= opts.patience) {
      trace.reason = Termination::EarlyStopping;
      break;
    }
  }

  OptimResult result;
  if (validation) {
    result.x = std::move(best_x);
    result.objective = best_f;
    Vector gb = Vector::Zero(n);
    objective(result.x, gb);
    result.grad_norm = gb.lpNorm<Eigen::Infinity>();
  } else {
    result.x = std::move(x);
    result.objective = fx;
    result.grad_norm = g.lpNorm<Eigen::Infinity>();
  }
  result.trace = std::move(trace);
  return result;
}

}  // namespace arvar

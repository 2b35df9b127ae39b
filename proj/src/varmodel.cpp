#include "arvar/varmodel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "arvar/rng.hpp"

namespace arvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Accepts an optimizer stop as converged unless the line search gave up far
/// from a stationary point.
void require_converged(const OptimResult& res, const char* who) {
  if (res.trace.reason == Termination::LineSearchFailure && res.grad_norm > 1e-4) {
    throw OptimError(std::string(who) + ": line search failed with gradient norm " +
                         std::to_string(res.grad_norm),
                     res.trace);
  }
}

bool all_positive_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double s) { return s > 0.0 && std::isfinite(s); });
}

}  // namespace

std::size_t checked_dimension(std::span<const ErrorSample> data) {
  if (data.empty()) throw std::domain_error("error samples: empty data");
  const std::size_t d = data.front().x.size();
  if (d == 0) throw std::domain_error("error samples: zero-dimensional input");
  for (const auto& s : data) {
    if (s.x.size() != d) throw std::domain_error("error samples: inconsistent input dimension");
    if (!std::isfinite(s.eps)) throw std::domain_error("error samples: non-finite error");
    for (double v : s.x) {
      if (!std::isfinite(v)) throw std::domain_error("error samples: non-finite input");
    }
  }
  return d;
}

std::vector<double> errors_of(std::span<const ErrorSample> data) {
  std::vector<double> eps(data.size());
  std::transform(data.begin(), data.end(), eps.begin(), [](const ErrorSample& s) { return s.eps; });
  return eps;
}

double initial_sigma(std::span<const double> eps) {
  if (eps.empty()) return 1.0;
  double ss = 0.0;
  for (double e : eps) ss += e * e;
  const double rms = std::sqrt(ss / static_cast<double>(eps.size()));
  return rms > 0.0 ? rms : 1.0;
}

Eigen::MatrixXd input_matrix(std::span<const ErrorSample> data) {
  const std::size_t d = checked_dimension(data);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i].x[j];
    }
  }
  return x;
}

// --------------------------------------------------------------------------
// Per-point
// --------------------------------------------------------------------------

PerPointModel::PerPointModel(std::vector<double> log_sigmas) : log_sigmas_(std::move(log_sigmas)) {
  for (double v : log_sigmas_) {
    if (!std::isfinite(v)) throw std::domain_error("PerPointModel: non-finite log sigma");
  }
}

double predict_sigma(const PerPointModel& model, std::size_t index) {
  if (index >= model.size()) throw std::out_of_range("PerPointModel: index out of range");
  return std::exp(model.log_sigmas()[index]);
}

CostGradient param_grad(const PerPointModel& model, std::span<const double> eps,
                        const ArWeights& weights, bool drop_constant) {
  const std::size_t n = eps.size();
  if (model.size() != n) throw std::domain_error("param_grad: model/data size mismatch");
  std::vector<double> sigmas(n);
  for (std::size_t i = 0; i < n; ++i) sigmas[i] = std::exp(model.log_sigmas()[i]);
  CostGradient out;
  out.grad = Vector::Zero(static_cast<Eigen::Index>(n));
  out.value = ar_cost_log_grad(sigmas, eps, weights, drop_constant,
                               std::span<double>(out.grad.data(), n));
  return out;
}

PerPointFit fit_per_point(std::span<const double> eps, const FitOptions& opts) {
  const std::size_t n = eps.size();
  if (n == 0) throw std::domain_error("fit_per_point: need at least one sample");
  for (double e : eps) {
    if (!std::isfinite(e)) throw std::domain_error("fit_per_point: non-finite error");
  }
  const ArWeights weights = compute_beta(eps, opts.drop_constant);
  std::vector<double> sigmas(n);

  ObjectiveFn objective = [&](const Vector& v, Vector& grad) {
    for (std::size_t i = 0; i < n; ++i) sigmas[i] = std::exp(v[static_cast<Eigen::Index>(i)]);
    if (!all_positive_finite(sigmas)) return kInf;
    return ar_cost_log_grad(sigmas, eps, weights, opts.drop_constant,
                            std::span<double>(grad.data(), n));
  };

  const Vector x0 = Vector::Constant(static_cast<Eigen::Index>(n), std::log(initial_sigma(eps)));
  OptimResult res = minimize(objective, x0, opts.optim);
  require_converged(res, "fit_per_point");

  PerPointFit fit;
  fit.model = PerPointModel(std::vector<double>(res.x.data(), res.x.data() + n));
  fit.weights = weights;
  fit.cost = res.objective;
  fit.trace = std::move(res.trace);
  return fit;
}

// --------------------------------------------------------------------------
// Polynomial
// --------------------------------------------------------------------------

double positivity_guard(double p) noexcept {
  constexpr double knee = 3.0 * kSigmaFloor;
  if (p >= knee) return p;
  return kSigmaFloor + 2.0 * kSigmaFloor * std::exp((p - knee) / (2.0 * kSigmaFloor));
}

double positivity_guard_derivative(double p) noexcept {
  constexpr double knee = 3.0 * kSigmaFloor;
  if (p >= knee) return 1.0;
  return std::exp((p - knee) / (2.0 * kSigmaFloor));
}

PolynomialModel::PolynomialModel(std::vector<double> thetas, double x_scale)
    : thetas_(std::move(thetas)), x_scale_(x_scale) {
  if (thetas_.empty() || thetas_.size() > static_cast<std::size_t>(kMaxOrder + 1)) {
    throw std::invalid_argument("PolynomialModel: need between 1 and 11 coefficients");
  }
  if (!(x_scale_ > 0.0) || !std::isfinite(x_scale_)) {
    throw std::invalid_argument("PolynomialModel: x_scale must be positive");
  }
}

double PolynomialModel::raw(double x) const noexcept {
  const double t = x / x_scale_;
  double acc = 0.0;
  for (auto it = thetas_.rbegin(); it != thetas_.rend(); ++it) acc = acc * t + *it;
  return acc;
}

double predict_sigma(const PolynomialModel& model, double x) {
  return positivity_guard(model.raw(x));
}

double predict_sigma(const PolynomialModel& model, std::span<const double> x) {
  if (x.size() != 1) throw std::domain_error("PolynomialModel: input must be one-dimensional");
  return predict_sigma(model, x[0]);
}

namespace {

/// AR over polynomial coefficients for fixed scaled inputs t_i.
class PolyObjective {
 public:
  PolyObjective(std::vector<double> t, std::vector<double> eps, ArWeights w, bool drop)
      : t_(std::move(t)), eps_(std::move(eps)), w_(w), drop_(drop),
        sigmas_(t_.size()), raw_(t_.size()), glog_(t_.size()) {}

  double operator()(const Vector& theta, Vector& grad) {
    const std::size_t n = t_.size();
    const Eigen::Index m = theta.size();
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (Eigen::Index l = m - 1; l >= 0; --l) acc = acc * t_[i] + theta[l];
      raw_[i] = acc;
      sigmas_[i] = positivity_guard(acc);
    }
    if (!all_positive_finite(sigmas_)) return kInf;
    const double value = ar_cost_log_grad(sigmas_, eps_, w_, drop_, glog_);
    grad.setZero();
    for (std::size_t i = 0; i < n; ++i) {
      const double ds = glog_[i] / sigmas_[i] * positivity_guard_derivative(raw_[i]);
      double tp = 1.0;
      for (Eigen::Index l = 0; l < m; ++l) {
        grad[l] += ds * tp;
        tp *= t_[i];
      }
    }
    return value;
  }

 private:
  std::vector<double> t_;
  std::vector<double> eps_;
  ArWeights w_;
  bool drop_;
  std::vector<double> sigmas_;
  std::vector<double> raw_;
  std::vector<double> glog_;
};

std::vector<double> scaled_inputs(std::span<const ErrorSample> data, double scale) {
  std::vector<double> t(data.size());
  std::transform(data.begin(), data.end(), t.begin(),
                 [scale](const ErrorSample& s) { return s.x[0] / scale; });
  return t;
}

}  // namespace

CostGradient param_grad(const PolynomialModel& model, std::span<const ErrorSample> data,
                        const ArWeights& weights, bool drop_constant) {
  if (checked_dimension(data) != 1) {
    throw std::domain_error("param_grad: polynomial model needs 1-D inputs");
  }
  PolyObjective objective(scaled_inputs(data, model.x_scale()), errors_of(data), weights,
                          drop_constant);
  const auto th = model.thetas();
  const Vector theta = Eigen::Map<const Vector>(th.data(), static_cast<Eigen::Index>(th.size()));
  CostGradient out;
  out.grad = Vector::Zero(theta.size());
  out.value = objective(theta, out.grad);
  return out;
}

PolyFit fit_polynomial(std::span<const ErrorSample> data, const PolyFitOptions& opts) {
  if (checked_dimension(data) != 1) {
    throw std::domain_error("fit_polynomial: polynomial fits support 1-D inputs only");
  }
  if (data.size() < 2) throw std::domain_error("fit_polynomial: need at least two samples");

  double scale = 0.0;
  for (const auto& s : data) scale = std::max(scale, std::abs(s.x[0]));
  if (scale == 0.0) scale = 1.0;

  const std::vector<double> eps = errors_of(data);
  PolyFit fit;
  fit.weights = compute_beta(eps, opts.drop_constant);
  PolyObjective objective(scaled_inputs(data, scale), eps, fit.weights, opts.drop_constant);
  ObjectiveFn fn = [&objective](const Vector& th, Vector& g) { return objective(th, g); };

  Vector theta = Vector::Constant(1, initial_sigma(eps));
  Vector scratch = Vector::Zero(1);
  double ar_old = objective(theta, scratch);
  fit.ar_history.push_back(ar_old);

  int p = 0;
  double err = kInf;
  do {
    ++p;
    Vector guess = Vector::Zero(p + 1);
    guess.head(p) = theta;
    OptimResult res = minimize(fn, guess, opts.optim);
    require_converged(res, "fit_polynomial");
    if (res.trace.iterations.empty()) {
      // Warm start is already stationary for the higher order.
      fit.stopped_at_warm_start = true;
      break;
    }
    theta = res.x;
    err = std::abs(ar_old - res.objective);
    ar_old = res.objective;
    fit.ar_history.push_back(ar_old);
  } while (p < PolynomialModel::kMaxOrder && err > opts.tol);

  fit.model = PolynomialModel(std::vector<double>(theta.data(), theta.data() + theta.size()), scale);
  fit.cost = ar_old;
  return fit;
}

// --------------------------------------------------------------------------
// MLP
// --------------------------------------------------------------------------

double satlins(double a) noexcept { return std::clamp(a, -1.0, 1.0); }

MlpModel::MlpModel(std::size_t input_dim)
    : input_dim_(input_dim),
      w1_(Eigen::MatrixXd::Zero(kHidden1, static_cast<Eigen::Index>(input_dim))),
      b1_(Vector::Zero(kHidden1)),
      w2_(Eigen::MatrixXd::Zero(kHidden2, kHidden1)),
      b2_(Vector::Zero(kHidden2)),
      w3_(Vector::Zero(kHidden2)),
      input_offset_(Vector::Zero(static_cast<Eigen::Index>(input_dim))),
      input_scale_(Vector::Ones(static_cast<Eigen::Index>(input_dim))) {
  if (input_dim == 0) throw std::invalid_argument("MlpModel: input dimension must be positive");
}

std::size_t MlpModel::num_parameters() const noexcept {
  return static_cast<std::size_t>(kHidden1) * (input_dim_ + 1) + kHidden2 * (kHidden1 + 1) +
         kHidden2 + 1;
}

Vector MlpModel::parameters() const {
  Vector p(static_cast<Eigen::Index>(num_parameters()));
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < w1_.rows(); ++r)
    for (Eigen::Index c = 0; c < w1_.cols(); ++c) p[k++] = w1_(r, c);
  for (Eigen::Index r = 0; r < b1_.size(); ++r) p[k++] = b1_[r];
  for (Eigen::Index r = 0; r < w2_.rows(); ++r)
    for (Eigen::Index c = 0; c < w2_.cols(); ++c) p[k++] = w2_(r, c);
  for (Eigen::Index r = 0; r < b2_.size(); ++r) p[k++] = b2_[r];
  for (Eigen::Index r = 0; r < w3_.size(); ++r) p[k++] = w3_[r];
  p[k] = b3_;
  return p;
}

void MlpModel::set_parameters(const Vector& p) {
  if (static_cast<std::size_t>(p.size()) != num_parameters()) {
    throw std::invalid_argument("MlpModel: wrong parameter count");
  }
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < w1_.rows(); ++r)
    for (Eigen::Index c = 0; c < w1_.cols(); ++c) w1_(r, c) = p[k++];
  for (Eigen::Index r = 0; r < b1_.size(); ++r) b1_[r] = p[k++];
  for (Eigen::Index r = 0; r < w2_.rows(); ++r)
    for (Eigen::Index c = 0; c < w2_.cols(); ++c) w2_(r, c) = p[k++];
  for (Eigen::Index r = 0; r < b2_.size(); ++r) b2_[r] = p[k++];
  for (Eigen::Index r = 0; r < w3_.size(); ++r) w3_[r] = p[k++];
  b3_ = p[k];
}

void MlpModel::set_input_map(Vector offset, Vector scale) {
  if (static_cast<std::size_t>(offset.size()) != input_dim_ ||
      static_cast<std::size_t>(scale.size()) != input_dim_) {
    throw std::invalid_argument("MlpModel: input map has wrong dimension");
  }
  if (!((scale.array() > 0.0).all())) {
    throw std::invalid_argument("MlpModel: input scales must be positive");
  }
  input_offset_ = std::move(offset);
  input_scale_ = std::move(scale);
}

void MlpModel::set_output_scale(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("MlpModel: output scale must be positive");
  }
  output_scale_ = s;
}

Eigen::MatrixXd MlpModel::normalize(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim_) {
    throw std::domain_error("MlpModel: input dimension mismatch");
  }
  // d x N, one column per sample
  Eigen::MatrixXd t = x.transpose();
  t.colwise() -= input_offset_;
  t.array().colwise() /= input_scale_.array();
  return t;
}

double MlpModel::pre_activation(std::span<const double> x) const {
  if (x.size() != input_dim_) throw std::domain_error("MlpModel: input dimension mismatch");
  Eigen::MatrixXd row(1, static_cast<Eigen::Index>(input_dim_));
  for (std::size_t j = 0; j < input_dim_; ++j) row(0, static_cast<Eigen::Index>(j)) = x[j];
  std::vector<double> z;
  sigmas(row, &z);
  return z[0];
}

std::vector<double> MlpModel::sigmas(const Eigen::MatrixXd& x, std::vector<double>* z_out) const {
  const Eigen::MatrixXd t = normalize(x);
  Eigen::MatrixXd h1 = (w1_ * t).colwise() + b1_;
  h1 = h1.array().tanh();
  Eigen::MatrixXd h2 = (w2_ * h1).colwise() + b2_;
  h2 = h2.array().max(-1.0).min(1.0);
  const Eigen::RowVectorXd z = (w3_.transpose() * h2).array() + b3_;
  std::vector<double> out(static_cast<std::size_t>(z.size()));
  if (z_out) z_out->resize(out.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    out[static_cast<std::size_t>(i)] = output_scale_ * std::exp(-z[i] * z[i]);
    if (z_out) (*z_out)[static_cast<std::size_t>(i)] = z[i];
  }
  return out;
}

Vector MlpModel::backprop_log_sigma(const Eigen::MatrixXd& x,
                                    std::span<const double> dlog_sigma) const {
  const Eigen::MatrixXd t = normalize(x);
  const Eigen::Index n = t.cols();
  if (static_cast<std::size_t>(n) != dlog_sigma.size()) {
    throw std::invalid_argument("MlpModel: gradient length mismatch");
  }
  const Eigen::MatrixXd a1 = (w1_ * t).colwise() + b1_;
  const Eigen::MatrixXd h1 = a1.array().tanh();
  const Eigen::MatrixXd a2 = (w2_ * h1).colwise() + b2_;
  const Eigen::MatrixXd h2 = a2.array().max(-1.0).min(1.0);
  const Eigen::RowVectorXd z = (w3_.transpose() * h2).array() + b3_;

  // log sigma = log(scale) - z^2
  Eigen::RowVectorXd dz(n);
  for (Eigen::Index i = 0; i < n; ++i) dz[i] = -2.0 * z[i] * dlog_sigma[static_cast<std::size_t>(i)];

  const Vector g_w3 = h2 * dz.transpose();
  const double g_b3 = dz.sum();
  Eigen::MatrixXd da2 = w3_ * dz;
  da2.array() *= (a2.array().abs() < 1.0).cast<double>();
  const Eigen::MatrixXd g_w2 = da2 * h1.transpose();
  const Vector g_b2 = da2.rowwise().sum();
  Eigen::MatrixXd da1 = w2_.transpose() * da2;
  da1.array() *= 1.0 - h1.array().square();
  const Eigen::MatrixXd g_w1 = da1 * t.transpose();
  const Vector g_b1 = da1.rowwise().sum();

  Vector g(static_cast<Eigen::Index>(num_parameters()));
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < g_w1.rows(); ++r)
    for (Eigen::Index c = 0; c < g_w1.cols(); ++c) g[k++] = g_w1(r, c);
  for (Eigen::Index r = 0; r < g_b1.size(); ++r) g[k++] = g_b1[r];
  for (Eigen::Index r = 0; r < g_w2.rows(); ++r)
    for (Eigen::Index c = 0; c < g_w2.cols(); ++c) g[k++] = g_w2(r, c);
  for (Eigen::Index r = 0; r < g_b2.size(); ++r) g[k++] = g_b2[r];
  for (Eigen::Index r = 0; r < g_w3.size(); ++r) g[k++] = g_w3[r];
  g[k] = g_b3;
  return g;
}

double MlpModel::mean_squared_weights() const {
  return parameters().squaredNorm() / static_cast<double>(num_parameters());
}

double predict_sigma(const MlpModel& model, std::span<const double> x) {
  const double z = model.pre_activation(x);
  return model.output_scale() * std::exp(-z * z);
}

namespace {

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& x, std::span<const std::size_t> idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(idx[k]));
  return out;
}

std::vector<double> pick(std::span<const double> v, std::span<const std::size_t> idx) {
  std::vector<double> out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = v[idx[k]];
  return out;
}

/// AR of a network on (x, eps); NaN-free: returns +inf if some sigma underflows.
double mlp_ar(const MlpModel& model, const Eigen::MatrixXd& x, std::span<const double> eps,
              const ArWeights& w, bool drop, std::vector<double>* glog) {
  const std::vector<double> sig = model.sigmas(x);
  if (!all_positive_finite(sig)) return kInf;
  if (glog) {
    glog->resize(sig.size());
    return ar_cost_log_grad(sig, eps, w, drop, *glog);
  }
  return ar_cost(sig, eps, w, drop);
}

}  // namespace

CostGradient param_grad(const MlpModel& model, std::span<const ErrorSample> data,
                        const ArWeights& weights, bool drop_constant) {
  const Eigen::MatrixXd x = input_matrix(data);
  const std::vector<double> eps = errors_of(data);
  std::vector<double> glog;
  CostGradient out;
  out.value = mlp_ar(model, x, eps, weights, drop_constant, &glog);
  if (!std::isfinite(out.value)) throw std::domain_error("param_grad: network output underflowed");
  out.grad = model.backprop_log_sigma(x, glog);
  return out;
}

Vector mlp_initial_parameters(std::size_t input_dim, std::uint64_t seed) {
  MlpModel shape(input_dim);
  std::mt19937_64 rng(seed);
  const auto fill = [&rng](Eigen::Index count, double fan_in, double fan_out, Vector& p,
                           Eigen::Index& k) {
    const double r = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-r, r);
    for (Eigen::Index i = 0; i < count; ++i) p[k++] = u(rng);
  };
  Vector p(static_cast<Eigen::Index>(shape.num_parameters()));
  Eigen::Index k = 0;
  const double d = static_cast<double>(input_dim);
  const double h1 = MlpModel::kHidden1;
  const double h2 = MlpModel::kHidden2;
  fill(static_cast<Eigen::Index>(h1 * d), d, h1, p, k);       // W1
  fill(MlpModel::kHidden1, d, h1, p, k);                      // b1
  fill(static_cast<Eigen::Index>(h2 * h1), h1, h2, p, k);     // W2
  fill(MlpModel::kHidden2, h1, h2, p, k);                     // b2
  fill(MlpModel::kHidden2, h2, 1.0, p, k);                    // w3
  fill(1, h2, 1.0, p, k);                                     // b3
  return p;
}

namespace {

MlpModel network_for(std::span<const ErrorSample> data, const MlpFitOptions& opts) {
  const std::size_t d = checked_dimension(data);
  MlpModel model(d);
  Vector lo = Vector::Constant(static_cast<Eigen::Index>(d), kInf);
  Vector hi = Vector::Constant(static_cast<Eigen::Index>(d), -kInf);
  for (const auto& s : data) {
    for (std::size_t j = 0; j < d; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      lo[jj] = std::min(lo[jj], s.x[j]);
      hi[jj] = std::max(hi[jj], s.x[j]);
    }
  }
  // Map the training range of each input onto [-1, 1].
  Vector offset = 0.5 * (lo + hi);
  Vector scale = 0.5 * (hi - lo);
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    if (!(scale[j] > 0.0)) scale[j] = 1.0;
  }
  model.set_input_map(std::move(offset), std::move(scale));
  model.set_output_scale(opts.output_scale);
  return model;
}

}  // namespace

MlpFit train_mlp(std::span<const ErrorSample> data, std::span<const std::size_t> train,
                 std::span<const std::size_t> validation, const MlpFitOptions& opts,
                 const Vector& init_params) {
  if (!(opts.regularization >= 0.0 && opts.regularization < 1.0)) {
    throw std::invalid_argument("fit_mlp: regularization share must lie in [0, 1)");
  }
  const Eigen::MatrixXd x_all = input_matrix(data);
  const std::vector<double> eps_all = errors_of(data);
  const Eigen::MatrixXd x_train = rows_of(x_all, train);
  const std::vector<double> eps_train = pick(eps_all, train);
  const Eigen::MatrixXd x_val = rows_of(x_all, validation);
  const std::vector<double> eps_val = pick(eps_all, validation);

  MlpFit fit;
  fit.model = network_for(data, opts);
  fit.weights = compute_beta(eps_train, opts.drop_constant);
  const ArWeights val_weights =
      eps_val.empty() ? fit.weights : compute_beta(eps_val, opts.drop_constant);

  const double r = opts.regularization;
  const double n_params = static_cast<double>(fit.model.num_parameters());
  MlpModel work = fit.model;
  std::vector<double> glog;

  ObjectiveFn objective = [&](const Vector& p, Vector& grad) {
    work.set_parameters(p);
    const double ar = mlp_ar(work, x_train, eps_train, fit.weights, opts.drop_constant, &glog);
    if (!std::isfinite(ar)) return kInf;
    if (opts.penalty == MlpPenalty::kShareOfTotal) {
      // lambda * |w|^2 = r / (1 - r) * AR, so the total is AR / (1 - r).
      grad = work.backprop_log_sigma(x_train, glog) / (1.0 - r);
      return ar / (1.0 - r);
    }
    grad = (1.0 - r) * work.backprop_log_sigma(x_train, glog) + (2.0 * r / n_params) * p;
    return (1.0 - r) * ar + r * p.squaredNorm() / n_params;
  };
  ValidationFn val_fn;
  if (!eps_val.empty()) {
    MlpModel val_work = fit.model;
    val_fn = [&, val_work](const Vector& p) mutable {
      val_work.set_parameters(p);
      return mlp_ar(val_work, x_val, eps_val, val_weights, opts.drop_constant, nullptr);
    };
  }

  OptimResult res = minimize(objective, init_params, opts.optim, val_fn);
  fit.model.set_parameters(res.x);
  fit.cost = res.objective;
  fit.trace = std::move(res.trace);
  fit.train_indices.assign(train.begin(), train.end());
  fit.validation_indices.assign(validation.begin(), validation.end());
  return fit;
}

MlpFit fit_mlp(std::span<const ErrorSample> data, const MlpFitOptions& opts, std::uint64_t seed) {
  const std::size_t d = checked_dimension(data);
  const std::size_t n = data.size();
  if (n < 10) throw std::domain_error("fit_mlp: need at least 10 samples for a train/validation split");
  if (opts.restarts < 1) throw std::invalid_argument("fit_mlp: restarts must be >= 1");
  if (!(opts.train_fraction > 0.0 && opts.train_fraction < 1.0)) {
    throw std::invalid_argument("fit_mlp: train fraction must lie in (0, 1)");
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(derive_seed(seed, 0));
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::lround(opts.train_fraction * static_cast<double>(n)));
  if (n_train < 2 || n_train >= n) throw std::domain_error("fit_mlp: too few samples to split");
  std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> val(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());

  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(opts.restarts));
  for (std::size_t k = 0; k < seeds.size(); ++k) seeds[k] = derive_seed(seed, k + 1);

  auto outcome = multi_restart(
      [&](std::uint64_t s) { return train_mlp(data, train, val, opts, mlp_initial_parameters(d, s)); },
      seeds);
  MlpFit best = std::move(outcome.best);
  best.restart_costs = std::move(outcome.costs);
  best.best_restart = outcome.best_index;
  return best;
}

}  // namespace arvar

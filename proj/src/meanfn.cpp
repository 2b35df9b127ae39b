#include "arvar/meanfn.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "arvar/rng.hpp"

namespace arvar {

namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-6;

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd d2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d2(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d2(i, j) = d2(j, i) = (x.row(i) - x.row(j)).squaredNorm();
    }
  }
  return d2;
}

/// Cholesky of K + noise I with escalating jitter; nullopt if it never succeeds.
std::optional<Eigen::LLT<Eigen::MatrixXd>> factorize(const Eigen::MatrixXd& k, double noise,
                                                      double* jitter_used) {
  const Eigen::Index n = k.rows();
  for (double jitter = 0.0; jitter <= kJitterMax;
       jitter = jitter == 0.0 ? kJitterStart : jitter * 10.0) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += noise + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = jitter;
      return llt;
    }
  }
  (void)n;
  return std::nullopt;
}

}  // namespace

double se_kernel(std::span<const double> xi, std::span<const double> xj, double sigma_f,
                 double ell) {
  if (!(ell > 0.0)) throw std::domain_error("se_kernel: length scale must be positive");
  if (xi.size() != xj.size()) throw std::domain_error("se_kernel: dimension mismatch");
  double d2 = 0.0;
  for (std::size_t k = 0; k < xi.size(); ++k) {
    const double d = xi[k] - xj[k];
    d2 += d * d;
  }
  return sigma_f * sigma_f * std::exp(-d2 / (2.0 * ell * ell));
}

GpModel::GpModel(Eigen::MatrixXd inputs, Eigen::VectorXd targets, GpHyperparameters hyper)
    : inputs_(std::move(inputs)), targets_(std::move(targets)), hyper_(hyper) {
  if (inputs_.rows() != targets_.size() || inputs_.rows() == 0) {
    throw std::domain_error("GpModel: inputs and targets must be non-empty and aligned");
  }
  if (!(hyper_.ell > 0.0) || !(hyper_.sigma_f > 0.0) || !(hyper_.noise_var >= 0.0)) {
    throw std::domain_error("GpModel: invalid hyperparameters");
  }
  const Eigen::MatrixXd d2 = squared_distances(inputs_);
  const Eigen::MatrixXd k =
      hyper_.sigma_f * hyper_.sigma_f * (-d2.array() / (2.0 * hyper_.ell * hyper_.ell)).exp();
  auto llt = factorize(k, hyper_.noise_var, &jitter_);
  if (!llt) {
    throw std::runtime_error("GpModel: kernel matrix is ill-conditioned even with jitter 1e-6");
  }
  chol_ = std::move(*llt);
  alpha_ = chol_.solve(targets_);
}

Eigen::VectorXd GpModel::kernel_column(std::span<const double> x) const {
  if (x.size() != input_dim()) throw std::domain_error("GpModel: input dimension mismatch");
  const Eigen::Map<const Eigen::RowVectorXd> xr(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd kx(inputs_.rows());
  const double inv = 1.0 / (2.0 * hyper_.ell * hyper_.ell);
  const double sf2 = hyper_.sigma_f * hyper_.sigma_f;
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
    kx[i] = sf2 * std::exp(-(inputs_.row(i) - xr).squaredNorm() * inv);
  }
  return kx;
}

double GpModel::predict_mean(std::span<const double> x) const {
  return kernel_column(x).dot(alpha_);
}

double GpModel::predict_variance(std::span<const double> x) const {
  const Eigen::VectorXd kx = kernel_column(x);
  const Eigen::VectorXd v = chol_.matrixL().solve(kx);
  const double var_f = hyper_.sigma_f * hyper_.sigma_f - v.squaredNorm();
  return std::max(var_f, 0.0) + hyper_.noise_var;
}

double gp_predict_mean(const GpModel& model, std::span<const double> x) {
  return model.predict_mean(x);
}

double gp_negative_log_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                  const GpHyperparameters& hyper, Eigen::Vector3d* grad) {
  const Eigen::Index n = inputs.rows();
  const Eigen::MatrixXd d2 = squared_distances(inputs);
  const double ell2 = hyper.ell * hyper.ell;
  const Eigen::MatrixXd k =
      hyper.sigma_f * hyper.sigma_f * (-d2.array() / (2.0 * ell2)).exp();
  auto llt = factorize(k, hyper.noise_var, nullptr);
  if (!llt) return std::numeric_limits<double>::infinity();

  const Eigen::VectorXd alpha = llt->solve(targets);
  const Eigen::MatrixXd l = llt->matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const double nll = 0.5 * targets.dot(alpha) + 0.5 * log_det +
                     0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  if (grad) {
    // dNLL/dtheta = -0.5 tr((alpha alpha^T - K^-1) dK/dtheta)
    const Eigen::MatrixXd kinv = llt->solve(Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd w = alpha * alpha.transpose() - kinv;
    const Eigen::MatrixXd dk_sf = 2.0 * k;                          // d/dlog sigma_f
    const Eigen::MatrixXd dk_ell = k.cwiseProduct(d2) / ell2;       // d/dlog ell
    (*grad)[0] = -0.5 * w.cwiseProduct(dk_sf).sum();
    (*grad)[1] = -0.5 * w.cwiseProduct(dk_ell).sum();
    (*grad)[2] = -0.5 * hyper.noise_var * w.trace();                // d/dlog noise
  }
  return nll;
}

GpFitResult gp_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                   const GpFitOptions& opts) {
  if (inputs.rows() < 2 || inputs.rows() != targets.size()) {
    throw std::domain_error("gp_fit: need at least two aligned samples");
  }
  if (opts.fixed_noise_var && !(*opts.fixed_noise_var >= 0.0)) {
    throw std::domain_error("gp_fit: fixed noise variance must be non-negative");
  }
  const double mean = targets.mean();
  const double var_y = std::max((targets.array() - mean).square().mean(), 1e-12);
  double span = 0.0;
  for (Eigen::Index j = 0; j < inputs.cols(); ++j) {
    span = std::max(span, inputs.col(j).maxCoeff() - inputs.col(j).minCoeff());
  }
  if (!(span > 0.0)) span = 1.0;

  const bool learn_noise = !opts.fixed_noise_var.has_value();
  const Eigen::Index dim = learn_noise ? 3 : 2;
  // Keep the learned noise variance above this floor so the optimizer cannot
  // drive it to an ill-conditioned zero.
  const double noise_floor = 1e-8 * var_y;

  auto unpack = [&](const Vector& p) {
    GpHyperparameters h;
    h.sigma_f = std::exp(p[0]);
    h.ell = std::exp(p[1]);
    h.noise_var = learn_noise ? std::exp(p[2]) + noise_floor : *opts.fixed_noise_var;
    return h;
  };
  ObjectiveFn objective = [&](const Vector& p, Vector& g) {
    if (!p.allFinite() || p.cwiseAbs().maxCoeff() > 50.0) {
      return std::numeric_limits<double>::infinity();
    }
    const GpHyperparameters h = unpack(p);
    Eigen::Vector3d g3;
    const double v = gp_negative_log_likelihood(inputs, targets, h, &g3);
    g[0] = g3[0];
    g[1] = g3[1];
    if (learn_noise) g[2] = g3[2] * (h.noise_var - noise_floor) / h.noise_var;
    return v;
  };

  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(std::max(opts.restarts, 1)));
  for (std::size_t k = 0; k < seeds.size(); ++k) seeds[k] = derive_seed(opts.seed, k);

  struct Candidate {
    Vector p;
    double cost;
    OptimTrace trace;
  };
  auto outcome = multi_restart(
      [&](std::uint64_t s) {
        std::mt19937_64 rng(s);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Vector p0(dim);
        p0[0] = 0.5 * std::log(var_y) + std::log(0.5 + u(rng));
        p0[1] = std::log(span * (0.05 + 0.45 * u(rng)));
        if (learn_noise) p0[2] = std::log(var_y * (0.02 + 0.3 * u(rng)));
        OptimResult res = minimize(objective, p0, opts.optim);
        return Candidate{res.x, res.objective, std::move(res.trace)};
      },
      seeds);

  GpHyperparameters best = unpack(outcome.best.p);
  return GpFitResult{GpModel(inputs, targets, best), outcome.best.cost,
                     std::move(outcome.best.trace)};
}

}  // namespace arvar

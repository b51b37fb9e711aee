#include "bayesqp/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bayesqp/chol.hpp"
#include "bayesqp/rng.hpp"

namespace bayesqp {

namespace {

constexpr double kLogLengthscaleLower = -6.907755278982137;  // log(1e-3)

struct MllEval {
  double value;
  Vector grad;  // w.r.t. (log l_1, ..., log l_d, log sf2)
};

Matrix gram_or_throw(const Matrix& X, const KernelHyperparameters& hyper,
                     Matrix* L_out, double* jitter_out) {
  Matrix K = gram_matrix(X, hyper);
  CholeskyResult chol = cholesky_with_jitter(K);
  if (!chol.ok) {
    throw ModelError(
        "surrogate: Gram matrix not positive definite after jitter ladder "
        "(0, 1e-10, 1e-8, 1e-6)");
  }
  *L_out = std::move(chol.L);
  *jitter_out = chol.jitter;
  return K;
}

double mll_from_chol(const Matrix& L, const Vector& y_std,
                     const Vector& alpha) {
  const double n = static_cast<double>(y_std.size());
  return -0.5 * y_std.dot(alpha) - L.diagonal().array().log().sum() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

/// MLL and its gradient in log-hyperparameters, for the Learn-mode ascent.
MllEval mll_with_grad(const Matrix& X, const Vector& y_std,
                      const KernelHyperparameters& hyper) {
  const Index n = X.cols();
  const Index d = X.rows();
  Matrix L;
  double jitter = 0.0;
  Matrix K = gram_or_throw(X, hyper, &L, &jitter);
  const Vector alpha =
      L.transpose().triangularView<Eigen::Upper>().solve(
          L.triangularView<Eigen::Lower>().solve(y_std));

  MllEval eval;
  eval.value = mll_from_chol(L, y_std, alpha);

  Matrix Kinv = Matrix::Identity(n, n);
  L.triangularView<Eigen::Lower>().solveInPlace(Kinv);
  L.transpose().triangularView<Eigen::Upper>().solveInPlace(Kinv);
  // dMLL/dtheta = 1/2 tr((alpha alpha^T - K^{-1}) dK/dtheta)
  const Matrix A = alpha * alpha.transpose() - Kinv;
  const Matrix Kf = K - hyper.noise_variance * Matrix::Identity(n, n);
  const Matrix AKf = A.cwiseProduct(Kf);

  eval.grad.resize(d + 1);
  for (Index i = 0; i < d; ++i) {
    const auto xi = X.row(i);
    double acc = 0.0;
    for (Index b = 0; b < n; ++b) {
      for (Index a = 0; a < n; ++a) {
        const double diff = xi[a] - xi[b];
        acc += AKf(a, b) * diff * diff;
      }
    }
    // dK/dlog l_i = Kf .* D_i / l_i^2
    eval.grad[i] = 0.5 * acc / (hyper.lengthscales[i] * hyper.lengthscales[i]);
  }
  eval.grad[d] = 0.5 * AKf.sum();  // dK/dlog sf2 = Kf
  return eval;
}

KernelHyperparameters hyper_from_log(const Vector& theta, double noise) {
  KernelHyperparameters h;
  h.lengthscales = theta.head(theta.size() - 1).array().exp();
  h.output_scale = std::exp(theta[theta.size() - 1]);
  h.noise_variance = noise;
  return h;
}

/// Projected Adam ascent on (log lengthscales, log output scale).
/// Returns the best hyperparameters seen across all restarts.
KernelHyperparameters optimize_mll(const Matrix& X, const Vector& y_std,
                                   const FitConfig& config) {
  const Index d = X.rows();
  const double log_l_upper = std::log(2.0 * static_cast<double>(d));
  const auto project = [&](Vector& theta) {
    for (Index i = 0; i < d; ++i) {
      theta[i] = std::clamp(theta[i], kLogLengthscaleLower, log_l_upper);
    }
    theta[d] = std::clamp(theta[d], -20.0, 20.0);
  };

  Vector base = Vector::Zero(d + 1);
  base.head(d).setConstant(0.5 * std::log(static_cast<double>(d)));  // sqrt(d)
  project(base);

  double best_value = -std::numeric_limits<double>::infinity();
  Vector best_theta = base;

  Rng rng(Rng::mix(config.seed, 0x5fa7));
  for (int start = 0; start < std::max(1, config.restarts); ++start) {
    Vector theta = base;
    if (start > 0) {
      for (Index i = 0; i <= d; ++i) theta[i] += rng.uniform(-1.0, 1.0);
      project(theta);
    }

    Vector m = Vector::Zero(d + 1);
    Vector v = Vector::Zero(d + 1);
    constexpr double lr = 0.1, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    double previous = -std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int it = 1; it <= config.max_iterations; ++it) {
      MllEval eval;
      try {
        eval = mll_with_grad(X, y_std, hyper_from_log(theta, config.noise_variance));
      } catch (const ModelError&) {
        break;  // abandoned start; another restart may still succeed
      }
      if (eval.value > best_value) {
        best_value = eval.value;
        best_theta = theta;
      }
      if (std::abs(eval.value - previous) <
          1e-9 * std::max(1.0, std::abs(eval.value))) {
        if (++stalled >= 3) break;
      } else {
        stalled = 0;
      }
      previous = eval.value;

      m = beta1 * m + (1.0 - beta1) * eval.grad;
      v = beta2 * v.array() + (1.0 - beta2) * eval.grad.array().square();
      const double bc1 = 1.0 - std::pow(beta1, it);
      const double bc2 = 1.0 - std::pow(beta2, it);
      theta.array() +=
          lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
      project(theta);
    }
  }

  if (!std::isfinite(best_value)) {
    throw ModelError("surrogate: marginal likelihood ascent never produced a "
                     "positive definite Gram matrix");
  }
  return hyper_from_log(best_theta, config.noise_variance);
}

}  // namespace

void Dataset::append(const Vector& x, double y) {
  if (inputs.cols() == 0 && inputs.rows() == 0) inputs.resize(x.size(), 0);
  inputs.conservativeResize(Eigen::NoChange, inputs.cols() + 1);
  inputs.col(inputs.cols() - 1) = x;
  targets.conservativeResize(targets.size() + 1);
  targets[targets.size() - 1] = y;
}

Standardization Standardization::from_targets(const Vector& y) {
  Standardization s;
  const Index n = y.size();
  if (n == 0) return s;
  s.mean = y.mean();
  if (n == 1) {
    s.stddev = 1.0;
    return s;
  }
  const double ss = (y.array() - s.mean).square().sum() /
                    static_cast<double>(n - 1);
  s.stddev = std::max(std::sqrt(ss), 1e-8);
  return s;
}

FitConfig FitConfig::frozen_isotropic(Index dim, double lengthscale,
                                      double output_scale,
                                      double noise_variance) {
  FitConfig config;
  config.mode = HyperMode::Frozen;
  config.frozen = KernelHyperparameters::isotropic(dim, lengthscale,
                                                   output_scale,
                                                   noise_variance);
  config.noise_variance = noise_variance;
  return config;
}

FittedGP FittedGP::prior(const KernelHyperparameters& hyper) {
  FittedGP gp;
  gp.data = Dataset(hyper.dim());
  gp.hyper = hyper;
  gp.gram_cholesky.resize(0, 0);
  gp.alpha.resize(0);
  return gp;
}

FittedGP fit(const Dataset& dataset, const FitConfig& config) {
  if (dataset.size() == 0) {
    throw std::invalid_argument("fit: dataset is empty");
  }
  FittedGP gp;
  gp.data = dataset;
  gp.standardization = Standardization::from_targets(dataset.targets);
  const Vector y_std = (dataset.targets.array() - gp.standardization.mean) /
                       gp.standardization.stddev;

  if (config.mode == HyperMode::Frozen) {
    if (config.frozen.dim() != dataset.dim()) {
      throw std::invalid_argument("fit: frozen hyperparameter dimension "
                                  "does not match the dataset");
    }
    gp.hyper = config.frozen;
  } else {
    gp.hyper = optimize_mll(dataset.inputs, y_std, config);
  }
  gp.hyper.validate();

  Matrix L;
  gram_or_throw(dataset.inputs, gp.hyper, &L, &gp.jitter);
  gp.gram_cholesky = std::move(L);
  gp.alpha = gp.gram_cholesky.transpose()
                 .triangularView<Eigen::Upper>()
                 .solve(gp.gram_cholesky.triangularView<Eigen::Lower>().solve(
                     y_std));
  return gp;
}

double log_marginal_likelihood(const Dataset& dataset,
                               const KernelHyperparameters& hyper) {
  const Standardization s = Standardization::from_targets(dataset.targets);
  const Vector y_std = (dataset.targets.array() - s.mean) / s.stddev;
  return log_marginal_likelihood_std(dataset.inputs, y_std, hyper);
}

double log_marginal_likelihood_std(const Matrix& inputs, const Vector& y_std,
                                   const KernelHyperparameters& hyper) {
  Matrix L;
  double jitter = 0.0;
  gram_or_throw(inputs, hyper, &L, &jitter);
  const Vector alpha = L.transpose().triangularView<Eigen::Upper>().solve(
      L.triangularView<Eigen::Lower>().solve(y_std));
  return mll_from_chol(L, y_std, alpha);
}

std::pair<double, double> posterior_f(const FittedGP& gp, const Vector& x) {
  if (gp.size() == 0) return {0.0, gp.hyper.output_scale};
  const Vector kx = kernel_row(x, gp.data.inputs, gp.hyper);
  const double mu = kx.dot(gp.alpha);
  const Vector v = gp.gram_cholesky.triangularView<Eigen::Lower>().solve(kx);
  const double var = gp.hyper.output_scale - v.squaredNorm();
  return {mu, std::max(var, 0.0)};
}

JointPosterior posterior_joint(const FittedGP& gp, const Vector& x) {
  const Index d = gp.dim();
  JointPosterior post;
  post.mu_grad = Vector::Zero(d);
  post.cov_grad_f = Vector::Zero(d);
  post.mu_hess = Matrix::Zero(d, d);

  if (gp.size() == 0) {
    post.mu_f = 0.0;
    post.var_f = gp.hyper.output_scale;
    post.cov_grad = cross_hess_k(x, x, gp.hyper);
    return post;
  }

  const Vector kx = kernel_row(x, gp.data.inputs, gp.hyper);
  const Matrix G = grad_k_stack(x, gp.data.inputs, gp.hyper);  // d x n

  post.mu_f = kx.dot(gp.alpha);
  post.mu_grad = G * gp.alpha;

  const auto lower = gp.gram_cholesky.triangularView<Eigen::Lower>();
  const Vector v = lower.solve(kx);                 // L^{-1} k(X,x)
  const Matrix B = lower.solve(G.transpose());      // L^{-1} G^T, n x d
  post.var_f = std::max(gp.hyper.output_scale - v.squaredNorm(), 0.0);
  post.cov_grad = cross_hess_k(x, x, gp.hyper) - B.transpose() * B;
  post.cov_grad = 0.5 * (post.cov_grad + post.cov_grad.transpose()).eval();
  post.cov_grad_f = -B.transpose() * v;

  for (Index j = 0; j < gp.size(); ++j) {
    post.mu_hess += gp.alpha[j] * hess_k(x, gp.data.inputs.col(j), gp.hyper);
  }
  post.mu_hess = 0.5 * (post.mu_hess + post.mu_hess.transpose()).eval();

  // The stacked [var_f, cov_grad_f^T; cov_grad_f, cov_grad] block must be
  // factorizable for the downstream cone constraints.
  Matrix stacked(d + 1, d + 1);
  stacked(0, 0) = post.var_f;
  stacked.block(1, 0, d, 1) = post.cov_grad_f;
  stacked.block(0, 1, 1, d) = post.cov_grad_f.transpose();
  stacked.block(1, 1, d, d) = post.cov_grad;
  if (!cholesky_with_jitter(stacked).ok) {
    throw ModelError(
        "surrogate: joint (f, grad f) covariance not positive semidefinite "
        "after jitter ladder");
  }
  return post;
}

std::pair<Vector, Matrix> posterior_f_batch(const FittedGP& gp,
                                            const Matrix& Xq) {
  const Index nq = Xq.cols();
  KernelHyperparameters noise_free = gp.hyper;
  noise_free.noise_variance = 0.0;
  Matrix prior = gram_matrix(Xq, noise_free);
  if (gp.size() == 0) return {Vector::Zero(nq), std::move(prior)};

  Matrix Kxq(gp.size(), nq);
  for (Index j = 0; j < nq; ++j) {
    Kxq.col(j) = kernel_row(Xq.col(j), gp.data.inputs, gp.hyper);
  }
  const Vector mu = Kxq.transpose() * gp.alpha;
  const Matrix V =
      gp.gram_cholesky.triangularView<Eigen::Lower>().solve(Kxq);
  Matrix cov = prior - V.transpose() * V;
  cov = 0.5 * (cov + cov.transpose()).eval();
  return {mu, std::move(cov)};
}

}  // namespace bayesqp

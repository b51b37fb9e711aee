#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "bayesqp/kernel.hpp"
#include "bayesqp/types.hpp"

namespace bayesqp {

/// Training data in normalized coordinates; targets are raw observations.
struct Dataset {
  Matrix inputs;   // d x n, one point per column, entries in [0, 1]
  Vector targets;  // length n

  Dataset() = default;
  explicit Dataset(Index dim) : inputs(dim, 0), targets(0) {}

  Index dim() const { return inputs.rows(); }
  Index size() const { return inputs.cols(); }

  void append(const Vector& x, double y);
};

/// Output transform applied before fitting: y_std = (y - mean) / stddev.
struct Standardization {
  double mean = 0.0;
  double stddev = 1.0;

  double to_standardized(double y) const { return (y - mean) / stddev; }
  double to_raw(double y_std) const { return mean + stddev * y_std; }

  /// Sample mean/std with (n-1) divisor; n == 1 uses stddev = 1 and the
  /// result is clamped below at 1e-8.
  static Standardization from_targets(const Vector& y);
};

enum class HyperMode { Frozen, Learn };

struct FitConfig {
  HyperMode mode = HyperMode::Learn;
  KernelHyperparameters frozen;   // used verbatim when mode == Frozen
  double noise_variance = 1e-4;   // fixed (not learned) in Learn mode
  int max_iterations = 100;       // per restart of the MLL ascent
  int restarts = 4;               // sqrt(d) init plus perturbed starts
  std::uint64_t seed = 0;         // for the perturbed restarts

  static FitConfig frozen_isotropic(Index dim, double lengthscale,
                                    double output_scale = 1.0,
                                    double noise_variance = 1e-4);
};

/// Thrown when a covariance stays indefinite through the whole jitter ladder.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Conditioned GP. Immutable after construction; cheap to query.
struct FittedGP {
  Dataset data;
  KernelHyperparameters hyper;
  Standardization standardization;
  Matrix gram_cholesky;  // L with L L^T = k(X,X) + sigma^2 I (+ jitter)
  Vector alpha;          // K^{-1} y_std
  double jitter = 0.0;

  Index dim() const { return hyper.dim(); }
  Index size() const { return data.size(); }

  /// Data-free prior, valid to query with the posterior functions.
  static FittedGP prior(const KernelHyperparameters& hyper);
};

/// Posterior moments at one query point, in standardized output units.
/// cov_grad_f is Cov[grad f, f].
struct JointPosterior {
  double mu_f = 0.0;
  double var_f = 0.0;
  Vector mu_grad;
  Matrix cov_grad;
  Vector cov_grad_f;
  Matrix mu_hess;
};

FittedGP fit(const Dataset& dataset, const FitConfig& config);

/// Log marginal likelihood of the standardized targets under the given
/// hyperparameters: -1/2 y^T K^{-1} y - 1/2 log det K - n/2 log 2pi.
double log_marginal_likelihood(const Dataset& dataset,
                               const KernelHyperparameters& hyper);

/// Same quantity with caller-supplied, already-standardized targets.
double log_marginal_likelihood_std(const Matrix& inputs, const Vector& y_std,
                                   const KernelHyperparameters& hyper);

/// Marginal posterior of f at x: (mean, variance), variance clamped at 0.
std::pair<double, double> posterior_f(const FittedGP& gp, const Vector& x);

/// Joint posterior over (f, grad f) plus the Hessian posterior mean.
/// Verifies that the stacked (d+1) x (d+1) covariance factorizes within the
/// jitter ladder and throws ModelError otherwise.
JointPosterior posterior_joint(const FittedGP& gp, const Vector& x);

/// Posterior of f over a batch of query points (columns of Xq): mean vector
/// and full covariance matrix, standardized units. Used by the line search.
std::pair<Vector, Matrix> posterior_f_batch(const FittedGP& gp,
                                            const Matrix& Xq);

}  // namespace bayesqp

#pragma once

#include "bayesqp/types.hpp"

namespace bayesqp {

/// Hyperparameters of the ARD squared-exponential kernel
///   k(x, x') = output_scale * exp(-1/2 sum_i (x_i - x'_i)^2 / l_i^2).
struct KernelHyperparameters {
  Vector lengthscales;      // l_i, one per input dimension
  double output_scale = 1.0;     // signal variance sigma_s^2
  double noise_variance = 1e-4;  // observation noise sigma^2

  Index dim() const { return lengthscales.size(); }

  /// All lengthscales equal; the usual constructor for isotropic setups.
  static KernelHyperparameters isotropic(Index d, double lengthscale,
                                         double output_scale = 1.0,
                                         double noise_variance = 1e-4);

  /// Throws std::invalid_argument when a field is out of range
  /// (lengthscales outside [1e-3, 2d], nonpositive output scale, negative
  /// noise).
  void validate() const;
};

double eval_k(const Vector& x, const Vector& x2,
              const KernelHyperparameters& hyper);

/// Derivative of eval_k with respect to the first argument:
/// -k(x,x2) * Lambda^{-1} (x - x2), Lambda = diag(l_i^2).
Vector grad_k(const Vector& x, const Vector& x2,
              const KernelHyperparameters& hyper);

/// Mixed second derivative d^2 k / dx dx' = Cov[grad f(x), grad f(x')]:
/// k * [Lambda^{-1} - Lambda^{-1} dd^T Lambda^{-1}], d = x - x2.
Matrix cross_hess_k(const Vector& x, const Vector& x2,
                    const KernelHyperparameters& hyper);

/// Second derivative with respect to the first argument twice:
/// k * [Lambda^{-1} dd^T Lambda^{-1} - Lambda^{-1}]; equals -cross_hess_k at
/// x = x2.
Matrix hess_k(const Vector& x, const Vector& x2,
              const KernelHyperparameters& hyper);

// Batch forms used by the surrogate; X holds one point per column (d x n).

/// k(x, X) as an n-vector.
Vector kernel_row(const Vector& x, const Matrix& X,
                  const KernelHyperparameters& hyper);

/// d x n stack whose column j is grad_k(x, X.col(j)).
Matrix grad_k_stack(const Vector& x, const Matrix& X,
                    const KernelHyperparameters& hyper);

/// k(X, X) + noise_variance * I.
Matrix gram_matrix(const Matrix& X, const KernelHyperparameters& hyper);

}  // namespace bayesqp

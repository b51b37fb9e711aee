#include "bayesqp/kernel.hpp"

#include <cmath>
#include <stdexcept>

#include "bayesqp/simd/simd.hpp"

namespace bayesqp {

namespace {

void check_dims(const Vector& x, const Vector& x2,
                const KernelHyperparameters& hyper) {
  if (x.size() != hyper.dim() || x2.size() != hyper.dim()) {
    throw std::invalid_argument("kernel: input dimension mismatch");
  }
}

}  // namespace

KernelHyperparameters KernelHyperparameters::isotropic(Index d,
                                                       double lengthscale,
                                                       double output_scale,
                                                       double noise_variance) {
  KernelHyperparameters h;
  h.lengthscales = Vector::Constant(d, lengthscale);
  h.output_scale = output_scale;
  h.noise_variance = noise_variance;
  return h;
}

void KernelHyperparameters::validate() const {
  const double upper = 2.0 * static_cast<double>(dim());
  for (Index i = 0; i < dim(); ++i) {
    const double l = lengthscales[i];
    if (!(l >= 1e-3 && l <= upper)) {
      throw std::invalid_argument("kernel: lengthscale out of [0.001, 2d]");
    }
  }
  if (!(output_scale > 0.0)) {
    throw std::invalid_argument("kernel: output_scale must be positive");
  }
  if (!(noise_variance >= 0.0)) {
    throw std::invalid_argument("kernel: noise_variance must be nonnegative");
  }
}

double eval_k(const Vector& x, const Vector& x2,
              const KernelHyperparameters& hyper) {
  check_dims(x, x2, hyper);
  const Vector scaled = (x - x2).cwiseQuotient(hyper.lengthscales);
  return hyper.output_scale * std::exp(-0.5 * scaled.squaredNorm());
}

Vector grad_k(const Vector& x, const Vector& x2,
              const KernelHyperparameters& hyper) {
  const double k = eval_k(x, x2, hyper);
  return -k * (x - x2).cwiseQuotient(hyper.lengthscales.cwiseAbs2());
}

Matrix cross_hess_k(const Vector& x, const Vector& x2,
                    const KernelHyperparameters& hyper) {
  const double k = eval_k(x, x2, hyper);
  const Vector inv_l2 = hyper.lengthscales.cwiseAbs2().cwiseInverse();
  const Vector u = (x - x2).cwiseProduct(inv_l2);  // Lambda^{-1}(x - x2)
  Matrix result = -k * u * u.transpose();
  result.diagonal() += k * inv_l2;
  return result;
}

Matrix hess_k(const Vector& x, const Vector& x2,
              const KernelHyperparameters& hyper) {
  return -cross_hess_k(x, x2, hyper);
}

Vector kernel_row(const Vector& x, const Matrix& X,
                  const KernelHyperparameters& hyper) {
  const Index d = hyper.dim();
  const Index n = X.cols();
  if (x.size() != d || (n > 0 && X.rows() != d)) {
    throw std::invalid_argument("kernel_row: dimension mismatch");
  }
  Vector out(n);
  if (n == 0) return out;
  const Vector w = 0.5 * hyper.lengthscales.cwiseAbs2().cwiseInverse();
  simd::scaled_sqdist(x.data(), X.data(), w.data(), static_cast<int>(d),
                      static_cast<int>(n), out.data());
  out = -out;
  simd::exp_inplace(out.data(), static_cast<int>(n));
  out *= hyper.output_scale;
  return out;
}

Matrix grad_k_stack(const Vector& x, const Matrix& X,
                    const KernelHyperparameters& hyper) {
  const Vector row = kernel_row(x, X, hyper);
  const Vector inv_l2 = hyper.lengthscales.cwiseAbs2().cwiseInverse();
  Matrix out(hyper.dim(), X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    out.col(j) = -row[j] * (x - X.col(j)).cwiseProduct(inv_l2);
  }
  return out;
}

Matrix gram_matrix(const Matrix& X, const KernelHyperparameters& hyper) {
  const Index n = X.cols();
  Matrix K(n, n);
  for (Index j = 0; j < n; ++j) {
    // Upper triangle of column j (rows 0..j) via the batch path.
    Vector col = kernel_row(X.col(j), X.leftCols(j + 1), hyper);
    for (Index i = 0; i <= j; ++i) {
      K(i, j) = col[i];
      K(j, i) = col[i];
    }
  }
  K.diagonal().array() += hyper.noise_variance;
  return K;
}

}  // namespace bayesqp

// Reference kernels. These define the semantics; the SIMD variants are tested
// for equivalence against them.

#include <cmath>

#include "bayesqp/simd/simd.hpp"

namespace bayesqp::simd::detail {

namespace {

void scaled_sqdist_scalar(const double* q, const double* X, const double* w,
                          int d, int n, double* out) {
  for (int j = 0; j < n; ++j) {
    const double* x = X + static_cast<long>(j) * d;
    double acc = 0.0;
    for (int i = 0; i < d; ++i) {
      const double diff = q[i] - x[i];
      acc += w[i] * diff * diff;
    }
    out[j] = acc;
  }
}

void exp_inplace_scalar(double* x, int n) {
  for (int i = 0; i < n; ++i) x[i] = std::exp(x[i]);
}

double weighted_cos_sum_scalar(const double* z, const double* w, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += w[i] * std::cos(z[i]);
  return acc;
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{scaled_sqdist_scalar, exp_inplace_scalar,
                         weighted_cos_sum_scalar};
  return k;
}

}  // namespace bayesqp::simd::detail

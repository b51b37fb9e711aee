#pragma once

#include <cmath>

namespace bayesqp {

inline double normal_pdf(double x) {
  static constexpr double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

/// Inverse standard-normal CDF. Acklam's rational approximation refined by one
/// Halley step against erfc; relative error is at machine-precision level over
/// p in (0, 1).
double normal_quantile(double p);

/// q_{1-delta} = Phi^{-1}(1 - delta), computed through the lower tail so that
/// delta = 0.5 maps to exactly 0 (the + 0.0 clears the negative zero).
inline double normal_upper_quantile(double delta) {
  return -normal_quantile(delta) + 0.0;
}

}  // namespace bayesqp

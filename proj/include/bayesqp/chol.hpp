#pragma once

#include <array>

#include "bayesqp/types.hpp"

namespace bayesqp {

/// Diagonal jitter values tried in order until the Cholesky succeeds.
inline constexpr std::array<double, 4> kJitterLadder{0.0, 1e-10, 1e-8, 1e-6};

struct CholeskyResult {
  Matrix L;
  double jitter = 0.0;  // diagonal shift that was applied
  bool ok = false;
};

/// Lower-triangular factorization of a symmetric matrix, climbing the jitter
/// ladder on failure. ok == false means even the largest jitter did not help.
CholeskyResult cholesky_with_jitter(const Matrix& A);

}  // namespace bayesqp

#include "bayesqp/chol.hpp"

namespace bayesqp {

CholeskyResult cholesky_with_jitter(const Matrix& A) {
  CholeskyResult result;
  Matrix work = A;
  for (double jitter : kJitterLadder) {
    work = A;
    work.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(work);
    if (llt.info() == Eigen::Success) {
      result.L = llt.matrixL();
      result.jitter = jitter;
      result.ok = true;
      return result;
    }
  }
  return result;
}

}  // namespace bayesqp

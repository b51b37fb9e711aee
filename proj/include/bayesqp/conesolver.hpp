#pragma once

#include <string>
#include <vector>

#include "bayesqp/types.hpp"

namespace bayesqp {

/// One second-order cone constraint ||A z + b||_2 <= c^T z + d.
struct SocBlock {
  Matrix A;
  Vector b;
  Vector c;
  double d = 0.0;
};

/// minimize 1/2 z^T P z + q^T z
/// subject to lin_G z <= lin_h and every SocBlock.
struct QuadraticConeProgram {
  Matrix P;      // symmetric PSD, n x n
  Vector q;      // n
  Matrix lin_G;  // m_l x n (may be 0 x n)
  Vector lin_h;  // m_l
  std::vector<SocBlock> soc_blocks;

  Index num_vars() const { return q.size(); }
  Index num_lin() const { return lin_h.size(); }

  /// Throws std::invalid_argument on inconsistent dimensions or a P that is
  /// asymmetric / clearly indefinite.
  void validate() const;
};

enum class SolveStatus {
  Optimal,
  Infeasible,
  Unbounded,
  NumericalFailure,
  IterLimit,
};

const char* to_string(SolveStatus status);

struct KktResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
};

struct ConeSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vector z;
  Vector lin_duals;                // >= 0 on Optimal
  std::vector<Vector> soc_duals;   // one per cone, in the dual cone
  double objective = 0.0;
  KktResiduals kkt;
  int iterations = 0;
};

struct SolverSettings {
  int max_iters = 100;
  double tol_feas = 1e-8;   // primal/dual residual target
  double tol_gap = 1e-8;    // relative duality gap target
  double tol_infeas = 1e-9; // certificate sharpness for Infeasible/Unbounded
};

/// Primal-dual interior-point method with Nesterov-Todd scaling over the
/// product cone (nonnegative orthant x second-order cones). The quadratic
/// term is handled natively; search directions come from Mehrotra
/// predictor-corrector steps with the KKT system reduced to normal equations.
/// Deterministic: identical inputs give identical outputs.
ConeSolution solve(const QuadraticConeProgram& program,
                   const SolverSettings& settings = {});

struct KktReport {
  double stationarity = 0.0;      // ||P z + q + G^T y||_inf
  double primal_violation = 0.0;  // worst linear-row / cone violation
  double dual_violation = 0.0;    // worst negative dual / cone-dual violation
  double complementarity = 0.0;   // worst |slack . dual| mismatch

  double max_violation() const;
  bool passes(double tol) const { return max_violation() < tol; }
};

/// Recomputes the KKT conditions of a claimed-Optimal solution from scratch.
KktReport verify_kkt(const QuadraticConeProgram& program,
                     const ConeSolution& solution);

}  // namespace bayesqp

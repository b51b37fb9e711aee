#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "bayesqp/conesolver.hpp"
#include "bayesqp/surrogate.hpp"
#include "bayesqp/types.hpp"

namespace bayesqp {

/// Constraint posterior plus the standardization of its model so that raw
/// feasibility c >= 0 can be expressed in standardized units:
/// threshold_shift = mean / stddev, giving raw c >= 0 <=> c_std >= -shift.
struct ConstraintLocalModel {
  JointPosterior posterior;
  double threshold_shift = 0.0;
};

/// All joint posteriors evaluated at the current iterate.
struct LocalModelSet {
  JointPosterior objective;
  std::vector<ConstraintLocalModel> constraints;

  Index dim() const { return objective.mu_grad.size(); }
  Index num_constraints() const {
    return static_cast<Index>(constraints.size());
  }
};

enum class SubproblemVariant { Robust, ExpectedValue, Slacked,
                               UnconstrainedRobust };

struct SubproblemConfig {
  double delta_f = 0.2;
  double delta_c = 0.2;
  SubproblemVariant variant = SubproblemVariant::Robust;
  double slack_penalty = 100.0;  // rho
  double clip_eps = 1e-5;
  std::optional<double> trust_bound;  // ||p||_inf cap, off by default
};

struct SearchDirection {
  Vector p;
  Vector multipliers;       // duals of the m linearized constraint rows
  Vector slacks;            // zero outside the slacked variant
  double b_f = 0.0;
  Vector b_c;
  SolveStatus status = SolveStatus::NumericalFailure;
  bool used_fallback = false;
};

class SubproblemError : public std::runtime_error {
 public:
  explicit SubproblemError(const std::string& what)
      : std::runtime_error(what) {}
};

/// H_t = mu_hess(f) - sum_i xi_i * mu_hess(c_i); symmetric, not SPD yet.
Matrix lagrangian_hessian(const LocalModelSet& models,
                          const Vector& multipliers);

/// Eigenvalue clipping: every eigenvalue below eps is raised to eps.
Matrix clip_spd(const Matrix& H, double eps);

/// Lower-triangular factor of [var, cov_grad_f'; cov_grad_f, cov_grad] with
/// the [function; gradient] ordering, climbing the jitter ladder.
/// Throws SubproblemError when the ladder is exhausted.
Matrix joint_cholesky(double var, const Vector& cov_grad_f,
                      const Matrix& cov_grad);

/// Build the cone program for the Robust / UnconstrainedRobust /
/// ExpectedValue variants. Variables are ordered (p, b_f, b_c_1..m) for the
/// robust forms and just p for the expected-value QP.
QuadraticConeProgram assemble(const LocalModelSet& models, const Matrix& H,
                              const SubproblemConfig& config);

/// Slack-relaxed robust subproblem over (p, b_f, b_c, s); feasible by
/// construction.
QuadraticConeProgram assemble_slacked(const LocalModelSet& models,
                                      const Matrix& H,
                                      const SubproblemConfig& config);

/// Full pipeline: Lagrangian Hessian -> SPD repair -> assemble -> solve,
/// falling back to the slacked program when the robust one is infeasible or
/// numerically fails. Throws SubproblemError when both solves fail.
SearchDirection solve_direction(const LocalModelSet& models,
                                const Vector& previous_multipliers,
                                const SubproblemConfig& config,
                                const SolverSettings& solver = {});

}  // namespace bayesqp

#include "bayesqp/subproblem.hpp"

#include <cmath>

#include "bayesqp/chol.hpp"
#include "bayesqp/normal.hpp"

namespace bayesqp {

namespace {

struct Layout {
  Index d = 0;
  Index m = 0;
  bool has_b = false;      // b_f and b_c variables present
  bool has_slack = false;  // s variables present
  Index n = 0;

  Index p(Index i) const { return i; }
  Index b_f() const { return d; }
  Index b_c(Index i) const { return d + 1 + i; }
  Index s(Index i) const { return d + 1 + m + i; }
};

Layout make_layout(const LocalModelSet& models, SubproblemVariant variant) {
  Layout lay;
  lay.d = models.dim();
  lay.m = variant == SubproblemVariant::UnconstrainedRobust
              ? 0
              : models.num_constraints();
  lay.has_b = variant != SubproblemVariant::ExpectedValue;
  lay.has_slack = variant == SubproblemVariant::Slacked;
  lay.n = lay.d + (lay.has_b ? 1 + lay.m : 0) + (lay.has_slack ? lay.m : 0);
  return lay;
}

SocBlock make_cone(const Layout& lay, const JointPosterior& post,
                   Index b_index) {
  const Index d = lay.d;
  const Matrix Lt =
      joint_cholesky(post.var_f, post.cov_grad_f, post.cov_grad).transpose();
  SocBlock blk;
  blk.A = Matrix::Zero(d + 1, lay.n);
  blk.A.leftCols(d) = Lt.rightCols(d);  // L^T applied to the p part of (1, p)
  blk.b = Lt.col(0);                    // L^T applied to the leading 1
  blk.c = Vector::Zero(lay.n);
  blk.c[b_index] = 1.0;
  blk.d = 0.0;
  return blk;
}

void append_trust_rows(const Layout& lay, const SubproblemConfig& config,
                       std::vector<Vector>* rows, std::vector<double>* rhs) {
  if (!config.trust_bound) return;
  for (Index i = 0; i < lay.d; ++i) {
    Vector row = Vector::Zero(lay.n);
    row[i] = 1.0;
    rows->push_back(row);
    rhs->push_back(*config.trust_bound);
    rows->push_back(-row);
    rhs->push_back(*config.trust_bound);
  }
}

// At delta = 0.5 the quantile is 0 and the b variables become zero-cost rays
// of the optimal face (the degeneracy behind the expected-value equivalence);
// a small positive cost keeps the dual strictly feasible and the central
// path bounded so the interior-point solve stays well posed. The objective
// perturbation is at most ~1e-6, an order below the 1e-5 equivalence
// tolerance this case is held to.
constexpr double kDegenerateRayCost = 1e-7;

QuadraticConeProgram assemble_impl(const LocalModelSet& models,
                                   const Matrix& H,
                                   const SubproblemConfig& config,
                                   SubproblemVariant variant) {
  const Layout lay = make_layout(models, variant);
  const double q_f = normal_upper_quantile(config.delta_f);
  const double q_c = normal_upper_quantile(config.delta_c);

  QuadraticConeProgram program;
  program.P = Matrix::Zero(lay.n, lay.n);
  program.P.topLeftCorner(lay.d, lay.d) = H;
  program.q = Vector::Zero(lay.n);
  program.q.head(lay.d) = models.objective.mu_grad;
  if (lay.has_b) {
    program.q[lay.b_f()] = std::max(q_f, kDegenerateRayCost);
    for (Index i = 0; i < lay.m; ++i) {
      if (q_c <= 0.0) program.q[lay.b_c(i)] = kDegenerateRayCost;
    }
  }
  if (lay.has_slack) {
    for (Index i = 0; i < lay.m; ++i) {
      program.q[lay.s(i)] = config.slack_penalty;
    }
  }

  std::vector<Vector> rows;
  std::vector<double> rhs;
  // Linearized chance constraints: -mu_grad_c' p + q_c b_c (- s) <= mu_c,
  // with mu_c shifted so that raw feasibility c >= 0 is the threshold.
  for (Index i = 0; i < lay.m; ++i) {
    const ConstraintLocalModel& cm = models.constraints[i];
    Vector row = Vector::Zero(lay.n);
    row.head(lay.d) = -cm.posterior.mu_grad;
    if (lay.has_b) row[lay.b_c(i)] = q_c;
    if (lay.has_slack) row[lay.s(i)] = -1.0;
    rows.push_back(row);
    rhs.push_back(cm.posterior.mu_f + cm.threshold_shift);
  }
  // b >= 0 (and s >= 0) as explicit rows.
  if (lay.has_b) {
    Vector row = Vector::Zero(lay.n);
    row[lay.b_f()] = -1.0;
    rows.push_back(row);
    rhs.push_back(0.0);
    for (Index i = 0; i < lay.m; ++i) {
      row.setZero();
      row[lay.b_c(i)] = -1.0;
      rows.push_back(row);
      rhs.push_back(0.0);
    }
  }
  if (lay.has_slack) {
    for (Index i = 0; i < lay.m; ++i) {
      Vector row = Vector::Zero(lay.n);
      row[lay.s(i)] = -1.0;
      rows.push_back(row);
      rhs.push_back(0.0);
    }
  }
  append_trust_rows(lay, config, &rows, &rhs);

  program.lin_G.resize(static_cast<Index>(rows.size()), lay.n);
  program.lin_h.resize(static_cast<Index>(rows.size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    program.lin_G.row(static_cast<Index>(r)) = rows[r].transpose();
    program.lin_h[static_cast<Index>(r)] = rhs[r];
  }

  if (lay.has_b) {
    program.soc_blocks.push_back(
        make_cone(lay, models.objective, lay.b_f()));
    for (Index i = 0; i < lay.m; ++i) {
      program.soc_blocks.push_back(
          make_cone(lay, models.constraints[i].posterior, lay.b_c(i)));
    }
  }
  return program;
}

SearchDirection extract_direction(const LocalModelSet& models,
                                  const ConeSolution& sol,
                                  SubproblemVariant variant) {
  const Layout lay = make_layout(models, variant);
  SearchDirection dir;
  dir.p = sol.z.head(lay.d);
  dir.status = sol.status;
  dir.multipliers = Vector::Zero(models.num_constraints());
  for (Index i = 0; i < lay.m; ++i) {
    dir.multipliers[i] = std::max(sol.lin_duals[i], 0.0);
  }
  dir.slacks = Vector::Zero(models.num_constraints());
  if (lay.has_slack) {
    for (Index i = 0; i < lay.m; ++i) {
      dir.slacks[i] = std::max(sol.z[lay.s(i)], 0.0);
    }
  }
  dir.b_c = Vector::Zero(lay.m);
  if (lay.has_b) {
    dir.b_f = sol.z[lay.b_f()];
    for (Index i = 0; i < lay.m; ++i) dir.b_c[i] = sol.z[lay.b_c(i)];
  }
  return dir;
}

}  // namespace

Matrix lagrangian_hessian(const LocalModelSet& models,
                          const Vector& multipliers) {
  if (multipliers.size() != models.num_constraints()) {
    throw std::invalid_argument(
        "lagrangian_hessian: multiplier count does not match constraints");
  }
  Matrix H = models.objective.mu_hess;
  for (Index i = 0; i < models.num_constraints(); ++i) {
    H -= multipliers[i] * models.constraints[i].posterior.mu_hess;
  }
  return H;
}

Matrix clip_spd(const Matrix& H, double eps) {
  const Matrix sym = 0.5 * (H + H.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw SubproblemError("clip_spd: eigendecomposition failed");
  }
  if (eig.eigenvalues().minCoeff() >= eps) return sym;
  const Vector clipped = eig.eigenvalues().cwiseMax(eps);
  Matrix out = eig.eigenvectors() * clipped.asDiagonal() *
               eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Matrix joint_cholesky(double var, const Vector& cov_grad_f,
                      const Matrix& cov_grad) {
  const Index d = cov_grad_f.size();
  Matrix stacked(d + 1, d + 1);
  stacked(0, 0) = var;
  stacked.block(1, 0, d, 1) = cov_grad_f;
  stacked.block(0, 1, 1, d) = cov_grad_f.transpose();
  stacked.block(1, 1, d, d) = 0.5 * (cov_grad + cov_grad.transpose());
  const CholeskyResult chol = cholesky_with_jitter(stacked);
  if (!chol.ok) {
    throw SubproblemError(
        "joint_cholesky: stacked covariance not PSD after jitter ladder");
  }
  return chol.L;
}

QuadraticConeProgram assemble(const LocalModelSet& models, const Matrix& H,
                              const SubproblemConfig& config) {
  SubproblemVariant variant = config.variant;
  if (variant == SubproblemVariant::Slacked) {
    throw std::invalid_argument("assemble: use assemble_slacked");
  }
  return assemble_impl(models, H, config, variant);
}

QuadraticConeProgram assemble_slacked(const LocalModelSet& models,
                                      const Matrix& H,
                                      const SubproblemConfig& config) {
  if (models.num_constraints() == 0) {
    throw std::invalid_argument("assemble_slacked: no constraints to relax");
  }
  return assemble_impl(models, H, config, SubproblemVariant::Slacked);
}

SearchDirection solve_direction(const LocalModelSet& models,
                                const Vector& previous_multipliers,
                                const SubproblemConfig& config,
                                const SolverSettings& solver) {
  const Matrix H = clip_spd(
      lagrangian_hessian(models, previous_multipliers), config.clip_eps);

  const bool can_fall_back = models.num_constraints() > 0 &&
                             config.variant != SubproblemVariant::Slacked &&
                             config.variant !=
                                 SubproblemVariant::UnconstrainedRobust;

  std::string primary_failure;
  if (config.variant != SubproblemVariant::Slacked) {
    try {
      const QuadraticConeProgram program = assemble(models, H, config);
      const ConeSolution sol = solve(program, solver);
      if (sol.status == SolveStatus::Optimal) {
        return extract_direction(models, sol, config.variant);
      }
      primary_failure = to_string(sol.status);
    } catch (const SubproblemError& err) {
      primary_failure = err.what();
    }
    if (!can_fall_back) {
      throw SubproblemError("solve_direction: subproblem failed (" +
                            primary_failure + ") and no slacked fallback "
                            "applies");
    }
  }

  const QuadraticConeProgram slacked =
      assemble_slacked(models, H, config);
  const ConeSolution sol = solve(slacked, solver);
  if (sol.status != SolveStatus::Optimal) {
    throw SubproblemError(
        "solve_direction: slacked fallback also failed with status " +
        std::string(to_string(sol.status)) +
        (primary_failure.empty() ? "" : " (primary: " + primary_failure + ")"));
  }
  SearchDirection dir =
      extract_direction(models, sol, SubproblemVariant::Slacked);
  dir.used_fallback = config.variant != SubproblemVariant::Slacked;
  return dir;
}

}  // namespace bayesqp

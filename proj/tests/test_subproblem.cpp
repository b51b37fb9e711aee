#include <doctest.h>

#include <cmath>

#include "bayesqp/normal.hpp"
#include "bayesqp/rng.hpp"
#include "bayesqp/subproblem.hpp"

using namespace bayesqp;

namespace {

JointPosterior make_posterior(double mu_f, const Vector& mu_grad, double var_f,
                              const Vector& cov_grad_f,
                              const Matrix& cov_grad, const Matrix& mu_hess) {
  JointPosterior post;
  post.mu_f = mu_f;
  post.mu_grad = mu_grad;
  post.var_f = var_f;
  post.cov_grad_f = cov_grad_f;
  post.cov_grad = cov_grad;
  post.mu_hess = mu_hess;
  return post;
}

/// Random posterior whose stacked (f, grad f) covariance is PSD by
/// construction (factor times its transpose). Draws are sequenced explicitly
/// so the instances do not depend on argument evaluation order.
JointPosterior random_posterior(Index d, Rng& rng) {
  Matrix S = Matrix::NullaryExpr(d + 1, d + 1, [&]() { return rng.normal(); });
  Matrix C = S * S.transpose() + 1e-8 * Matrix::Identity(d + 1, d + 1);
  Matrix A = Matrix::NullaryExpr(d, d, [&]() { return rng.normal(); });
  const double mu_f = rng.normal();
  const Vector mu_grad =
      Vector::NullaryExpr(d, [&]() { return rng.normal(); });
  return make_posterior(mu_f, mu_grad, C(0, 0), C.block(1, 0, d, 1),
                        C.block(1, 1, d, d), 0.5 * (A + A.transpose()));
}

LocalModelSet random_models(Index d, Index m, Rng& rng,
                            bool keep_origin_feasible) {
  LocalModelSet models;
  models.objective = random_posterior(d, rng);
  for (Index i = 0; i < m; ++i) {
    ConstraintLocalModel cm;
    cm.posterior = random_posterior(d, rng);
    if (keep_origin_feasible) {
      // p = 0 stays feasible for the chance-constrained row down to
      // delta_c = 0.05: mu_c >= q_{0.95} * sigma_c + margin
      cm.posterior.mu_f = std::abs(cm.posterior.mu_f) + 0.1 +
                          1.6449 * std::sqrt(cm.posterior.var_f);
      cm.threshold_shift = 0.0;
    } else {
      cm.threshold_shift = rng.normal();
    }
    models.constraints.push_back(std::move(cm));
  }
  return models;
}

/// Well-conditioned SPD matrix for the program-equivalence properties, where
/// the claim is about the assembled programs rather than Hessian repair.
Matrix random_spd(Index d, Rng& rng) {
  Matrix S = Matrix::NullaryExpr(d, d, [&]() { return rng.normal(); });
  return S * S.transpose() / static_cast<double>(d) +
         0.5 * Matrix::Identity(d, d);
}

LocalModelSet unconstrained_fixture() {
  LocalModelSet models;
  models.objective = make_posterior(
      0.0, Vector::Ones(1), 1.0, Vector::Zero(1), Matrix::Ones(1, 1),
      Matrix::Ones(1, 1));
  return models;
}

}  // namespace

TEST_CASE("lagrangian hessian") {
  Rng rng(1);
  SUBCASE("no constraints: the objective Hessian mean") {
    LocalModelSet models;
    models.objective = random_posterior(3, rng);
    const Matrix H = lagrangian_hessian(models, Vector::Zero(0));
    CHECK((H - models.objective.mu_hess).norm() == 0.0);
  }
  SUBCASE("zero multipliers leave the objective Hessian") {
    LocalModelSet models = random_models(3, 2, rng, true);
    const Matrix H = lagrangian_hessian(models, Vector::Zero(2));
    CHECK((H - models.objective.mu_hess).norm() == 0.0);
  }
  SUBCASE("identity fixture") {
    LocalModelSet models;
    models.objective = make_posterior(0.0, Vector::Zero(2), 1.0,
                                      Vector::Zero(2), Matrix::Identity(2, 2),
                                      Matrix::Identity(2, 2));
    ConstraintLocalModel cm;
    cm.posterior = make_posterior(0.0, Vector::Zero(2), 1.0, Vector::Zero(2),
                                  Matrix::Identity(2, 2),
                                  Matrix::Identity(2, 2));
    models.constraints.push_back(cm);
    const Matrix H =
        lagrangian_hessian(models, Vector::Constant(1, 2.0));
    CHECK((H + Matrix::Identity(2, 2)).norm() == 0.0);
  }
  SUBCASE("length mismatch throws") {
    LocalModelSet models = random_models(2, 1, rng, true);
    CHECK_THROWS_AS(lagrangian_hessian(models, Vector::Zero(2)),
                    std::invalid_argument);
  }
}

TEST_CASE("clip_spd") {
  Matrix H(2, 2);
  H << 2.0, 0.0, 0.0, 1.0;
  CHECK((clip_spd(H, 1e-5) - H).norm() == 0.0);

  H << 1.0, 0.0, 0.0, -3.0;
  const Matrix clipped = clip_spd(H, 1e-5);
  CHECK(clipped(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(clipped(1, 1) == doctest::Approx(1e-5).epsilon(1e-9));

  const Matrix zero_case = clip_spd(Matrix::Zero(3, 3), 1e-5);
  CHECK((zero_case - 1e-5 * Matrix::Identity(3, 3)).norm() <= 1e-16);

  SUBCASE("idempotence and eigenvalue floor on random matrices") {
    Rng rng(4);
    for (int rep = 0; rep < 20; ++rep) {
      const Index d = 1 + static_cast<Index>(rng.uniform() * 6);
      Matrix A = Matrix::NullaryExpr(d, d, [&]() { return rng.normal(); });
      const Matrix once = clip_spd(A, 1e-5);
      const Matrix twice = clip_spd(once, 1e-5);
      CHECK((twice - once).lpNorm<Eigen::Infinity>() <= 1e-10);
      Eigen::SelfAdjointEigenSolver<Matrix> eig(once);
      CHECK(eig.eigenvalues().minCoeff() >= 1e-5 - 1e-10);
    }
  }
}

TEST_CASE("joint cholesky") {
  SUBCASE("identity covariance") {
    const Matrix L = joint_cholesky(1.0, Vector::Zero(2),
                                    Matrix::Identity(2, 2));
    CHECK((L - Matrix::Identity(3, 3)).norm() <= 1e-12);
  }
  SUBCASE("hand-computed 2x2 factor") {
    const Matrix L = joint_cholesky(4.0, Vector::Constant(1, 1.0),
                                    Matrix::Ones(1, 1));
    CHECK(L(0, 0) == doctest::Approx(2.0));
    CHECK(L(1, 0) == doctest::Approx(0.5));
    CHECK(L(1, 1) == doctest::Approx(std::sqrt(0.75)));
    CHECK(L(0, 1) == 0.0);
  }
  SUBCASE("quadratic form identity") {
    Rng rng(9);
    const Index d = 4;
    const JointPosterior post = random_posterior(d, rng);
    const Matrix L =
        joint_cholesky(post.var_f, post.cov_grad_f, post.cov_grad);
    for (int rep = 0; rep < 100; ++rep) {
      const Vector p = Vector::NullaryExpr(d, [&]() { return rng.normal(); });
      Vector one_p(d + 1);
      one_p[0] = 1.0;
      one_p.tail(d) = p;
      const double via_chol = (L.transpose() * one_p).squaredNorm();
      const double direct = post.var_f + p.dot(post.cov_grad * p) +
                            2.0 * p.dot(post.cov_grad_f);
      CHECK(std::abs(via_chol - direct) <=
            1e-10 * std::max(1.0, std::abs(direct)));
    }
  }
}

TEST_CASE("assemble: unconstrained robust fixture") {
  LocalModelSet models = unconstrained_fixture();
  SubproblemConfig config;
  config.variant = SubproblemVariant::UnconstrainedRobust;

  SUBCASE("delta_f = 0.5 collapses onto the quadratic") {
    config.delta_f = 0.5;
    const auto program = assemble(models, Matrix::Ones(1, 1), config);
    const ConeSolution sol = solve(program);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.z[0] == doctest::Approx(-1.0).epsilon(1e-7));
    CHECK(sol.objective == doctest::Approx(-0.5).epsilon(1e-7));
  }

  SUBCASE("delta_f = 0.2 shrinks the step") {
    config.delta_f = 0.2;
    const auto program = assemble(models, Matrix::Ones(1, 1), config);
    const ConeSolution sol = solve(program);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const double p = sol.z[0];
    CHECK(p < 0.0);
    CHECK(std::abs(p) < 1.0);

    // dense grid over p as the independent oracle; b_f collapses to the cone
    // boundary ||L'(1,p)|| = sqrt(1 + p^2) at any optimum
    const double q = normal_upper_quantile(0.2);
    double best = 1e100, best_p = 0.0;
    for (int i = 0; i <= 200000; ++i) {
      const double pc = -2.0 + 4.0 * i / 200000.0;
      const double value =
          0.5 * pc * pc + pc + q * std::sqrt(1.0 + pc * pc);
      if (value < best) {
        best = value;
        best_p = pc;
      }
    }
    CHECK(p == doctest::Approx(best_p).epsilon(1e-4));
    CHECK(sol.objective == doctest::Approx(best).epsilon(1e-6));
  }
}

TEST_CASE("assemble: infeasible linearization forces p past the boundary") {
  // mu_c = -1 at the iterate, gradient (1): the row reads -p + 0*b <= -1.
  LocalModelSet models;
  models.objective = make_posterior(0.0, Vector::Zero(1), 1.0,
                                    Vector::Zero(1), Matrix::Identity(1, 1),
                                    Matrix::Identity(1, 1));
  ConstraintLocalModel cm;
  cm.posterior = make_posterior(-1.0, Vector::Ones(1), 1e-10,
                                Vector::Zero(1), 1e-10 * Matrix::Ones(1, 1),
                                Matrix::Zero(1, 1));
  models.constraints.push_back(cm);
  SubproblemConfig config;
  config.delta_c = 0.5;
  config.delta_f = 0.5;
  const auto program = assemble(models, Matrix::Identity(1, 1), config);
  const ConeSolution sol = solve(program);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.z[0] >= 1.0 - 1e-6);
}

TEST_CASE("assemble_slacked") {
  Rng rng(12);
  SUBCASE("zero slacks reproduce the robust optimum on feasible instances") {
    int compared = 0;
    for (int rep = 0; rep < 10; ++rep) {
      LocalModelSet models = random_models(3, 2, rng, true);
      const Matrix H = random_spd(3, rng);
      SubproblemConfig config;
      const ConeSolution robust = solve(assemble(models, H, config));
      const ConeSolution slacked =
          solve(assemble_slacked(models, H, config));
      REQUIRE(slacked.status == SolveStatus::Optimal);
      if (robust.status != SolveStatus::Optimal) {
        continue;  // degenerate endgame; the slacked fallback covers it
      }
      CHECK(slacked.objective ==
            doctest::Approx(robust.objective).epsilon(1e-5));
      ++compared;
    }
    CHECK(compared >= 7);
  }

  SUBCASE("contradictory row costs exactly the penalty") {
    LocalModelSet models;
    models.objective = make_posterior(0.0, Vector::Zero(1), 1e-10,
                                      Vector::Zero(1),
                                      1e-10 * Matrix::Ones(1, 1),
                                      Matrix::Identity(1, 1));
    ConstraintLocalModel cm;
    cm.posterior = make_posterior(-1.0, Vector::Zero(1), 1e-12,
                                  Vector::Zero(1),
                                  1e-12 * Matrix::Ones(1, 1),
                                  Matrix::Zero(1, 1));
    models.constraints.push_back(cm);
    SubproblemConfig config;
    config.delta_c = 0.5;
    config.delta_f = 0.5;
    const auto program =
        assemble_slacked(models, Matrix::Identity(1, 1), config);
    const ConeSolution sol = solve(program);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(100.0).epsilon(1e-5));
  }

  SUBCASE("large penalty drives slacks to zero on feasible instances") {
    LocalModelSet models = random_models(2, 1, rng, true);
    const Matrix H = Matrix::Identity(2, 2);
    SubproblemConfig config;
    config.slack_penalty = 1e6;
    const auto program = assemble_slacked(models, H, config);
    const ConeSolution sol = solve(program);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.z[2 + 1 + 1] < 1e-6);  // slack variable: layout (p, b_f, b_c, s)
  }
}

TEST_CASE("solve_direction basics") {
  SubproblemConfig config;
  SUBCASE("unconstrained quadratic") {
    config.variant = SubproblemVariant::UnconstrainedRobust;
    config.delta_f = 0.5;
    const SearchDirection dir =
        solve_direction(unconstrained_fixture(), Vector::Zero(0), config);
    CHECK(dir.p[0] == doctest::Approx(-1.0).epsilon(1e-7));
    CHECK_FALSE(dir.used_fallback);
    CHECK(dir.status == SolveStatus::Optimal);
  }

  SUBCASE("infeasible linearization falls back to the slacked program") {
    LocalModelSet models;
    models.objective = make_posterior(0.0, Vector::Zero(1), 1e-8,
                                      Vector::Zero(1),
                                      1e-8 * Matrix::Ones(1, 1),
                                      Matrix::Identity(1, 1));
    ConstraintLocalModel cm;
    cm.posterior = make_posterior(-1.0, Vector::Zero(1), 1e-10,
                                  Vector::Zero(1),
                                  1e-10 * Matrix::Ones(1, 1),
                                  Matrix::Zero(1, 1));
    models.constraints.push_back(cm);
    config.variant = SubproblemVariant::Robust;
    const SearchDirection dir =
        solve_direction(models, Vector::Zero(1), config);
    CHECK(dir.used_fallback);
    CHECK(dir.slacks[0] == doctest::Approx(1.0).epsilon(1e-4));
    // relaxed row satisfied by substitution
    const double row = -models.constraints[0].posterior.mu_grad.dot(dir.p) +
                       normal_upper_quantile(config.delta_c) * dir.b_c[0] -
                       dir.slacks[0];
    CHECK(row <= models.constraints[0].posterior.mu_f + 1e-6);
  }
}

TEST_CASE("tangential constraint: uncertainty pushes the step inward") {
  // Quadratic constraint linearized at its boundary: mu_c = 0 and the
  // constraint gradient points along +y; the objective pulls toward -x, -y.
  LocalModelSet models;
  models.objective = make_posterior(
      0.0, Vector::Ones(2), 1e-6, Vector::Zero(2),
      1e-6 * Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  ConstraintLocalModel cm;
  Vector grad_c(2);
  grad_c << 0.0, 1.0;
  cm.posterior = make_posterior(0.0, grad_c, 0.04, Vector::Zero(2),
                                0.04 * Matrix::Identity(2, 2),
                                Matrix::Zero(2, 2));
  models.constraints.push_back(cm);

  SubproblemConfig config;
  config.delta_f = 0.5;

  config.delta_c = 0.5;
  const SearchDirection tangent =
      solve_direction(models, Vector::Zero(1), config);
  CHECK(std::abs(tangent.p.dot(grad_c)) <= 1e-8);
  CHECK(tangent.p[0] == doctest::Approx(-1.0).epsilon(1e-6));

  config.delta_c = 0.05;
  const SearchDirection inward =
      solve_direction(models, Vector::Zero(1), config);
  CHECK(inward.p.dot(grad_c) > 0.0);
}

TEST_CASE("corollary: delta = 0.5 recovers the expected-value program") {
  Rng rng(2025);
  int checked = 0;
  while (checked < 50) {
    const Index d = 1 + static_cast<Index>(rng.uniform() * 6);
    const Index m = static_cast<Index>(rng.uniform() * 4);
    LocalModelSet models = random_models(d, m, rng, true);
    const Matrix H = random_spd(d, rng);

    SubproblemConfig robust_config;
    robust_config.delta_f = 0.5;
    robust_config.delta_c = 0.5;
    robust_config.variant = m > 0 ? SubproblemVariant::Robust
                                  : SubproblemVariant::UnconstrainedRobust;
    const ConeSolution robust = solve(assemble(models, H, robust_config));

    SubproblemConfig ev_config = robust_config;
    ev_config.variant = SubproblemVariant::ExpectedValue;
    const ConeSolution ev = solve(assemble(models, H, ev_config));

    REQUIRE(robust.status == SolveStatus::Optimal);
    REQUIRE(ev.status == SolveStatus::Optimal);
    CHECK(std::abs(robust.objective - ev.objective) < 1e-5);
    ++checked;
  }
}

TEST_CASE("decreasing delta_c never improves the optimum") {
  Rng rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    LocalModelSet models = random_models(3, 2, rng, true);
    const Matrix H = random_spd(3, rng);
    SubproblemConfig config;
    config.delta_f = 0.2;
    double previous = -1e300;
    for (double delta_c : {0.5, 0.2, 0.05}) {
      config.delta_c = delta_c;
      const ConeSolution sol = solve(assemble(models, H, config));
      REQUIRE(sol.status == SolveStatus::Optimal);
      // tolerance covers solver accuracy and the degenerate-ray cost
      CHECK(sol.objective >= previous - 1e-5);
      previous = sol.objective;
    }
  }
}

TEST_CASE("slacked program is always solvable") {
  Rng rng(64);
  for (int rep = 0; rep < 100; ++rep) {
    const Index d = 1 + static_cast<Index>(rng.uniform() * 6);
    const Index m = 1 + static_cast<Index>(rng.uniform() * 3);
    LocalModelSet models = random_models(d, m, rng, false);
    // adversarial corners: wildly infeasible rows, blown-up gradients
    if (rep % 7 == 0) {
      models.constraints[0].posterior.mu_f = -1e4;
      models.constraints[0].posterior.mu_grad.setZero();
    }
    if (rep % 11 == 0) {
      models.objective.mu_grad *= 30.0;
    }
    const Matrix H =
        clip_spd(lagrangian_hessian(models, Vector::Zero(m)), 1e-5);
    SubproblemConfig config;
    const ConeSolution sol = solve(assemble_slacked(models, H, config));
    CHECK(sol.status == SolveStatus::Optimal);
  }
}

TEST_CASE("multipliers are nonnegative and complementary") {
  Rng rng(90);
  for (int rep = 0; rep < 20; ++rep) {
    LocalModelSet models = random_models(3, 2, rng, true);
    SubproblemConfig config;
    const SearchDirection dir =
        solve_direction(models, Vector::Zero(2), config);
    REQUIRE(dir.status == SolveStatus::Optimal);
    const double q_c = normal_upper_quantile(config.delta_c);
    for (Index i = 0; i < 2; ++i) {
      CHECK(dir.multipliers[i] >= 0.0);
      const auto& cm = models.constraints[i];
      // row slack, with the relaxation term active after a fallback solve
      const double slack = cm.posterior.mu_f + cm.threshold_shift -
                           (-cm.posterior.mu_grad.dot(dir.p) +
                            q_c * dir.b_c[i] - dir.slacks[i]);
      CHECK(std::abs(slack * dir.multipliers[i]) <= 1e-5);
    }
  }
}

#include <doctest.h>

#include <cmath>
#include <cstring>

#include "bayesqp/conesolver.hpp"
#include "bayesqp/rng.hpp"

using namespace bayesqp;

namespace {

// ---------------------------------------------------------------------------
// Brute-force oracle: projected-gradient descent where the projection onto
// the feasible set runs Dykstra's alternating projections in the lifted
// space v = (z, w), w = A z + b stacked under w_0 = c'z + d. Every individual
// projection (affine coupling, second-order cone, halfspace) is closed-form.
// Independent of the interior-point implementation.
// ---------------------------------------------------------------------------

struct LiftedOracle {
  const QuadraticConeProgram* program;
  Index n;       // z block
  Index k1 = 0;  // w block (cone dimension + 1), 0 when there is no cone
  Matrix T;      // w = T z + t
  Vector t;
  Eigen::LLT<Matrix> coupling;  // of (I + T'T)

  explicit LiftedOracle(const QuadraticConeProgram& p)
      : program(&p), n(p.num_vars()) {
    if (!p.soc_blocks.empty()) {
      const SocBlock& blk = p.soc_blocks.front();
      const Index k = blk.A.rows();
      k1 = k + 1;
      T.resize(k1, n);
      T.row(0) = blk.c.transpose();
      T.bottomRows(k) = blk.A;
      t.resize(k1);
      t[0] = blk.d;
      t.tail(k) = blk.b;
      coupling.compute(Matrix::Identity(n, n) + T.transpose() * T);
    }
  }

  static Vector project_soc(const Vector& s) {
    const double norm1 = s.tail(s.size() - 1).norm();
    if (norm1 <= s[0]) return s;
    if (norm1 <= -s[0]) return Vector::Zero(s.size());
    const double beta = 0.5 * (s[0] + norm1);
    Vector out(s.size());
    out[0] = beta;
    out.tail(s.size() - 1) = (beta / norm1) * s.tail(s.size() - 1);
    return out;
  }

  // Exact projections in the lifted space v = (z, w). The affine coupling is
  // a subspace (no Dykstra correction needed); the SOC and the halfspaces
  // carry corrections.
  Vector project_affine(const Vector& v) const {
    if (k1 == 0) return v;
    Vector out(v.size());
    const Vector z = v.head(n);
    const Vector w = v.tail(k1);
    out.head(n) = coupling.solve(z + T.transpose() * (w - t));
    out.tail(k1) = T * out.head(n) + t;
    return out;
  }

  Vector project_feasible(const Vector& v0, int passes = 300) const {
    const Index m_l = program->num_lin();
    if (k1 == 0 && m_l == 0) return v0;
    Vector v = v0;
    Vector soc_corr = Vector::Zero(k1);
    Matrix half_corr = Matrix::Zero(std::max<Index>(m_l, 1), n);
    for (int pass = 0; pass < passes; ++pass) {
      Vector before = v;
      v = project_affine(v);
      if (k1 > 0) {
        const Vector arg = v.tail(k1) + soc_corr;
        const Vector proj = project_soc(arg);
        soc_corr = arg - proj;
        v.tail(k1) = proj;
      }
      for (Index i = 0; i < m_l; ++i) {
        const Vector g = program->lin_G.row(i).transpose();
        const Vector arg = v.head(n) + half_corr.row(i).transpose();
        const double slack = g.dot(arg) - program->lin_h[i];
        Vector proj = arg;
        if (slack > 0.0) proj -= (slack / g.squaredNorm()) * g;
        half_corr.row(i) = (arg - proj).transpose();
        v.head(n) = proj;
      }
      if (pass > 10 &&
          (v - before).lpNorm<Eigen::Infinity>() < 1e-14) {
        break;
      }
    }
    return project_affine(v);
  }

  double objective(const Vector& v) const {
    const Vector z = v.head(n);
    return 0.5 * z.dot(program->P * z) + program->q.dot(z);
  }

  Vector lift(const Vector& z) const {
    Vector v(n + k1);
    v.head(n) = z;
    if (k1 > 0) v.tail(k1) = T * z + t;
    return v;
  }

  double minimize(const Vector& start, long max_iters = 1000000) const {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(program->P);
    const double lipschitz = std::max(eig.eigenvalues().maxCoeff(), 1e-3);
    const double step = 1.0 / lipschitz;
    Vector v = project_feasible(lift(start));
    double best = objective(v);
    int stalled = 0;
    for (long it = 0; it < max_iters; ++it) {
      Vector g = Vector::Zero(v.size());
      g.head(n) = program->P * v.head(n) + program->q;
      v = project_feasible(v - step * g);
      const double value = objective(v);
      if (value < best - 1e-14 * std::max(1.0, std::abs(best))) {
        best = value;
        stalled = 0;
      } else if (++stalled > 50) {
        break;
      }
    }
    return best;
  }
};

QuadraticConeProgram random_feasible_program(Rng& rng) {
  const Index n = 2 + static_cast<Index>(rng.uniform() * 3);  // 2..4
  QuadraticConeProgram p;
  Matrix A = Matrix::NullaryExpr(n, n, [&]() { return rng.normal(); });
  p.P = A.transpose() * A + 0.3 * Matrix::Identity(n, n);
  p.q = Vector::NullaryExpr(n, [&]() { return rng.normal(); });

  const Vector interior = Vector::NullaryExpr(n, [&]() { return rng.normal(); });

  const Index m_l = static_cast<Index>(rng.uniform() * 4);  // 0..3
  p.lin_G.resize(m_l, n);
  p.lin_h.resize(m_l);
  for (Index i = 0; i < m_l; ++i) {
    const Vector g = Vector::NullaryExpr(n, [&]() { return rng.normal(); });
    p.lin_G.row(i) = g.transpose();
    p.lin_h[i] = g.dot(interior) + rng.uniform(0.3, 1.5);
  }

  const Index k = 1 + static_cast<Index>(rng.uniform() * 2);  // rows 1..2
  SocBlock blk;
  blk.A = Matrix::NullaryExpr(k, n, [&]() { return rng.normal(); });
  blk.b = Vector::NullaryExpr(k, [&]() { return rng.normal(); });
  blk.c = Vector::NullaryExpr(n, [&]() { return rng.normal(); });
  blk.d = (blk.A * interior + blk.b).norm() - blk.c.dot(interior) +
          rng.uniform(0.3, 1.5);
  p.soc_blocks.push_back(std::move(blk));
  return p;
}

QuadraticConeProgram quad_fixture() {
  QuadraticConeProgram p;
  p.P = Matrix::Ones(1, 1);
  p.q = Vector::Ones(1);
  p.lin_G.resize(0, 1);
  p.lin_h.resize(0);
  return p;
}

QuadraticConeProgram disk_fixture() {
  QuadraticConeProgram p;
  p.P = Matrix::Zero(2, 2);
  p.q = Vector::Ones(2);
  p.lin_G.resize(0, 2);
  p.lin_h.resize(0);
  SocBlock blk;
  blk.A = Matrix::Identity(2, 2);
  blk.b = Vector::Zero(2);
  blk.c = Vector::Zero(2);
  blk.d = 1.0;
  p.soc_blocks.push_back(std::move(blk));
  return p;
}

QuadraticConeProgram lp_fixture() {
  QuadraticConeProgram p;
  p.P = Matrix::Zero(1, 1);
  p.q = -Vector::Ones(1);
  p.lin_G = Matrix::Ones(1, 1);
  p.lin_h = 2.0 * Vector::Ones(1);
  return p;
}

}  // namespace

TEST_CASE("unconstrained quadratic fixture") {
  const ConeSolution sol = solve(quad_fixture());
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.z[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(sol.objective == doctest::Approx(-0.5).epsilon(1e-9));
}

TEST_CASE("disk fixture: linear objective over the unit ball") {
  const ConeSolution sol = solve(disk_fixture());
  REQUIRE(sol.status == SolveStatus::Optimal);
  const double r2 = std::sqrt(2.0) / 2.0;
  CHECK(sol.z[0] == doctest::Approx(-r2).epsilon(1e-7));
  CHECK(sol.z[1] == doctest::Approx(-r2).epsilon(1e-7));
  CHECK(sol.objective == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-8));
}

TEST_CASE("active linear bound fixture") {
  const ConeSolution sol = solve(lp_fixture());
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.z[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(sol.lin_duals[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("verify_kkt on the fixtures and on a perturbed point") {
  for (const QuadraticConeProgram& p :
       {quad_fixture(), disk_fixture(), lp_fixture()}) {
    const ConeSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const KktReport report = verify_kkt(p, sol);
    CHECK(report.max_violation() < 1e-7);
  }

  const QuadraticConeProgram p = quad_fixture();
  ConeSolution sol = solve(p);
  sol.z[0] += 0.1;
  const KktReport report = verify_kkt(p, sol);
  CHECK(report.stationarity > 0.05);
}

TEST_CASE("verify_kkt on the zero program") {
  QuadraticConeProgram p;
  p.P = Matrix::Zero(1, 1);
  p.q = Vector::Zero(1);
  p.lin_G.resize(0, 1);
  p.lin_h.resize(0);
  ConeSolution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.z[0] == 0.0);
  CHECK(verify_kkt(p, sol).max_violation() == 0.0);
}

TEST_CASE("objective agreement with the projected-gradient oracle") {
  Rng rng(2024);
  int solved = 0;
  while (solved < 20) {
    const QuadraticConeProgram p = random_feasible_program(rng);
    const ConeSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const LiftedOracle oracle(p);
    const double brute = oracle.minimize(Vector::Zero(p.num_vars()));
    CHECK(sol.objective ==
          doctest::Approx(brute).epsilon(1e-4).scale(1.0));
    ++solved;
  }
}

TEST_CASE("duals are nonnegative and complementary on random programs") {
  Rng rng(77);
  for (int rep = 0; rep < 25; ++rep) {
    const QuadraticConeProgram p = random_feasible_program(rng);
    const ConeSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    for (Index i = 0; i < sol.lin_duals.size(); ++i) {
      CHECK(sol.lin_duals[i] >= -1e-9);
    }
    CHECK(verify_kkt(p, sol).max_violation() < 1e-6);
  }
}

TEST_CASE("bitwise determinism") {
  Rng rng(5);
  const QuadraticConeProgram p = random_feasible_program(rng);
  const ConeSolution a = solve(p);
  const ConeSolution b = solve(p);
  REQUIRE(a.z.size() == b.z.size());
  CHECK(std::memcmp(a.z.data(), b.z.data(),
                    sizeof(double) * a.z.size()) == 0);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("primal infeasibility is certified") {
  QuadraticConeProgram p;
  p.P = Matrix::Identity(1, 1);
  p.q = Vector::Zero(1);
  p.lin_G = Matrix::Zero(1, 1);
  p.lin_h = -Vector::Ones(1);  // 0 <= -1
  CHECK(solve(p).status == SolveStatus::Infeasible);

  // contradictory pair x <= 0, -x <= -1
  QuadraticConeProgram p2;
  p2.P = Matrix::Zero(1, 1);
  p2.q = Vector::Ones(1);
  p2.lin_G.resize(2, 1);
  p2.lin_G << 1.0, -1.0;
  p2.lin_h.resize(2);
  p2.lin_h << 0.0, -1.0;
  CHECK(solve(p2).status == SolveStatus::Infeasible);
}

TEST_CASE("dual infeasibility (unboundedness) is certified") {
  QuadraticConeProgram p;
  p.P = Matrix::Zero(1, 1);
  p.q = -Vector::Ones(1);
  p.lin_G = -Matrix::Ones(1, 1);
  p.lin_h = Vector::Zero(1);  // x >= 0, minimize -x
  CHECK(solve(p).status == SolveStatus::Unbounded);
}

TEST_CASE("iteration limit is reported") {
  SolverSettings settings;
  settings.max_iters = 1;
  CHECK(solve(disk_fixture(), settings).status == SolveStatus::IterLimit);
}

TEST_CASE("program validation") {
  QuadraticConeProgram p = quad_fixture();
  p.P = Matrix::Zero(2, 2);  // wrong size
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

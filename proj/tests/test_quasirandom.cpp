#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bayesqp/normal.hpp"
#include "bayesqp/quasirandom.hpp"
#include "bayesqp/rng.hpp"

using namespace bayesqp;

namespace {

// Star-discrepancy estimate anchored at the sample points themselves
// (a standard lower-bound estimator; used only to compare point sets).
double star_discrepancy_estimate(const Matrix& points) {
  const Index d = points.rows();
  const Index n = points.cols();
  double worst = 0.0;
  for (Index a = 0; a < n; ++a) {
    double volume = 1.0;
    for (Index i = 0; i < d; ++i) volume *= points(i, a);
    Index inside = 0;
    for (Index b = 0; b < n; ++b) {
      bool in = true;
      for (Index i = 0; i < d; ++i) {
        if (points(i, b) >= points(i, a)) {
          in = false;
          break;
        }
      }
      if (in) ++inside;
    }
    worst = std::max(
        worst, std::abs(static_cast<double>(inside) / n - volume));
  }
  return worst;
}

}  // namespace

TEST_CASE("one-dimensional Sobol prefix") {
  SobolStream stream(1);
  CHECK(stream.next()[0] == 0.0);  // index 0
  CHECK(stream.next()[0] == doctest::Approx(0.5));
  CHECK(stream.next()[0] == doctest::Approx(0.75));
  CHECK(stream.next()[0] == doctest::Approx(0.25));
}

TEST_CASE("index zero is the origin in any dimension") {
  SobolStream stream(2);
  CHECK(stream.next().norm() == 0.0);
}

TEST_CASE("frozen reference points (Joe-Kuo direction numbers)") {
  // Cross-checked against a published Joe-Kuo D(6) implementation
  // (scipy.stats.qmc.Sobol, scramble=False), exact binary values.
  SobolStream s6(6, 5);
  const Vector p5 = s6.next();
  const double expected5[6] = {0.875, 0.875, 0.125, 0.375, 0.875, 0.625};
  for (Index i = 0; i < 6; ++i) CHECK(p5[i] == expected5[i]);
  s6.next();  // index 6
  const Vector p7 = s6.next();
  const double expected7[6] = {0.125, 0.625, 0.375, 0.125, 0.125, 0.375};
  for (Index i = 0; i < 6; ++i) CHECK(p7[i] == expected7[i]);

  SobolStream s128(128, 9);
  const Vector p9 = s128.next();
  CHECK(p9[125] == 0.6875);
  CHECK(p9[126] == 0.0625);
  CHECK(p9[127] == 0.5625);
}

TEST_CASE("determinism and cloning") {
  SobolStream a(5);
  SobolStream b(5);
  for (int i = 0; i < 40; ++i) CHECK((a.next() - b.next()).norm() == 0.0);
  SobolStream c = a.clone();
  CHECK((a.next() - c.next()).norm() == 0.0);
  CHECK(a.index() == c.index());
}

TEST_CASE("dimension limits") {
  CHECK_THROWS_AS(SobolStream(0), std::invalid_argument);
  CHECK_THROWS_AS(SobolStream(129), std::invalid_argument);
  CHECK_NOTHROW(SobolStream(128));
}

TEST_CASE("Sobol prefixes beat uniform sampling on star discrepancy") {
  Rng rng(123);
  for (int d : {2, 4, 8}) {
    const Index n = 256;
    SobolStream stream(d);
    const Matrix sobol_points = stream.next_points(n);
    const double sobol_disc = star_discrepancy_estimate(sobol_points);

    std::vector<double> uniform_discs;
    for (int trial = 0; trial < 20; ++trial) {
      Matrix u(d, n);
      for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < d; ++i) u(i, j) = rng.uniform();
      }
      uniform_discs.push_back(star_discrepancy_estimate(u));
    }
    std::sort(uniform_discs.begin(), uniform_discs.end());
    const double uniform_median =
        0.5 * (uniform_discs[9] + uniform_discs[10]);
    CHECK(sobol_disc < uniform_median);
  }
}

TEST_CASE("normal transform of Sobol points has standard moments") {
  SobolStream stream(4);
  const Index n = 4096;
  Matrix z(4, n);
  for (Index j = 0; j < n; ++j) {
    const Vector u = stream.next();
    for (Index i = 0; i < 4; ++i) {
      z(i, j) = normal_quantile(u[i] <= 0.0 ? 0x1.0p-53 : u[i]);
    }
  }
  for (Index i = 0; i < 4; ++i) {
    const double mean = z.row(i).mean();
    const double var = (z.row(i).array() - mean).square().sum() / (n - 1);
    CHECK(std::abs(mean) < 0.05);
    CHECK(var > 0.9);
    CHECK(var < 1.1);
  }
}

TEST_CASE("ball samples stay in the ball and the box") {
  const Index d = 3;
  const Vector center = Vector::Constant(d, 0.5);
  const double radius = 0.25;

  SUBCASE("no clipping when the ball fits") {
    SobolStream stream(static_cast<int>(d) + 1);
    const Matrix samples =
        ball_samples(center, radius, 512, Box::unit(d), stream);
    for (Index j = 0; j < samples.cols(); ++j) {
      CHECK((samples.col(j) - center).norm() <= radius + 1e-12);
    }
  }

  SUBCASE("clipping keeps samples inside a tight box") {
    const Box tight{Vector::Constant(d, 0.45), Vector::Constant(d, 0.55)};
    SobolStream stream(static_cast<int>(d) + 1);
    const Matrix samples = ball_samples(center, radius, 256, tight, stream);
    for (Index j = 0; j < samples.cols(); ++j) {
      CHECK((samples.col(j).array() >= 0.45 - 1e-15).all());
      CHECK((samples.col(j).array() <= 0.55 + 1e-15).all());
    }
  }
}

TEST_CASE("one-dimensional ball samples sit at center +- r") {
  const Vector center = Vector::Constant(1, 0.5);
  SobolStream stream(2);
  const Box wide{Vector::Constant(1, -10.0), Vector::Constant(1, 10.0)};
  const Matrix samples = ball_samples(center, 0.3, 128, wide, stream);
  for (Index j = 0; j < samples.cols(); ++j) {
    CHECK(std::abs(samples(0, j) - 0.5) <= 0.3 + 1e-12);
  }
}

TEST_CASE("radius law: uniform-in-ball CDF in three dimensions") {
  const Index d = 3;
  const Vector center = Vector::Zero(d);
  const Box wide{Vector::Constant(d, -10.0), Vector::Constant(d, 10.0)};
  SobolStream stream(static_cast<int>(d) + 1);
  const Matrix samples = ball_samples(center, 1.0, 4096, wide, stream);
  Index within_half = 0;
  for (Index j = 0; j < samples.cols(); ++j) {
    if (samples.col(j).norm() <= 0.5) ++within_half;
  }
  const double fraction = static_cast<double>(within_half) / 4096.0;
  CHECK(fraction == doctest::Approx(0.125).epsilon(0.16));  // 0.125 +- 0.02
}

TEST_CASE("ball sample argument errors") {
  SobolStream stream(3);
  const Vector center = Vector::Constant(2, 0.5);
  CHECK_THROWS_AS(ball_samples(center, 0.1, 0, Box::unit(2), stream),
                  std::invalid_argument);
  CHECK_THROWS_AS(ball_samples(center, -1.0, 4, Box::unit(2), stream),
                  std::invalid_argument);
  SobolStream wrong(2);
  CHECK_THROWS_AS(ball_samples(center, 0.1, 4, Box::unit(2), wrong),
                  std::invalid_argument);
}

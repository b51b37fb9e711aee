#include "bayesqp/problems.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "bayesqp/rng.hpp"
#include "bayesqp/simd/simd.hpp"

namespace bayesqp {

namespace {

using std::numbers::pi;

// Canonical 6-D Hartmann coefficients.
constexpr double kHartmannAlpha[4] = {1.0, 1.2, 3.0, 3.2};
constexpr double kHartmannA[4][6] = {
    {10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
    {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
    {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
    {17.0, 8.0, 0.05, 10.0, 0.1, 14.0},
};
constexpr double kHartmannP[4][6] = {
    {0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
    {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
    {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
    {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381},
};

double hartmann6_value(const Vector& x) {
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 6; ++j) {
      const double diff = x[j] - kHartmannP[i][j];
      inner += kHartmannA[i][j] * diff * diff;
    }
    sum -= kHartmannAlpha[i] * std::exp(-inner);
  }
  return sum;
}

double ackley_value(const Vector& x) {
  const double d = static_cast<double>(x.size());
  const double rms = std::sqrt(x.squaredNorm() / d);
  double cos_mean = 0.0;
  for (Index i = 0; i < x.size(); ++i) cos_mean += std::cos(2.0 * pi * x[i]);
  cos_mean /= d;
  return -20.0 * std::exp(-0.2 * rms) - std::exp(cos_mean) + 20.0 +
         std::numbers::e;
}

double speed_reducer_weight(const Vector& x) {
  const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3], x5 = x[4],
               x6 = x[5], x7 = x[6];
  return 0.7854 * x1 * x2 * x2 *
             (3.3333 * x3 * x3 + 14.9334 * x3 - 43.0934) -
         1.508 * x1 * (x6 * x6 + x7 * x7) +
         7.4777 * (x6 * x6 * x6 + x7 * x7 * x7) +
         0.7854 * (x4 * x6 * x6 + x5 * x7 * x7);
}

// The 11 constraints in the standard g_i(x) <= 0 form; feasibility here is
// c_i = -g_i >= 0.
double speed_reducer_g(const Vector& x, int i) {
  const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3], x5 = x[4],
               x6 = x[5], x7 = x[6];
  switch (i) {
    case 0: return 27.0 / (x1 * x2 * x2 * x3) - 1.0;
    case 1: return 397.5 / (x1 * x2 * x2 * x3 * x3) - 1.0;
    case 2: return 1.93 * x4 * x4 * x4 / (x2 * x3 * std::pow(x6, 4)) - 1.0;
    case 3: return 1.93 * x5 * x5 * x5 / (x2 * x3 * std::pow(x7, 4)) - 1.0;
    case 4: {
      const double t = 745.0 * x4 / (x2 * x3);
      return std::sqrt(t * t + 16.9e6) / (110.0 * x6 * x6 * x6) - 1.0;
    }
    case 5: {
      const double t = 745.0 * x5 / (x2 * x3);
      return std::sqrt(t * t + 157.5e6) / (85.0 * x7 * x7 * x7) - 1.0;
    }
    case 6: return x2 * x3 / 40.0 - 1.0;
    case 7: return 5.0 * x2 / x1 - 1.0;
    case 8: return x1 / (12.0 * x2) - 1.0;
    case 9: return (1.5 * x6 + 1.9) / x4 - 1.0;
    case 10: return (1.1 * x7 + 1.9) / x5 - 1.0;
  }
  throw std::out_of_range("speed_reducer constraint index");
}

}  // namespace

double RFFSample::eval(const Vector& x) const {
  const Vector z = frequencies * x + phases;
  const double scale = std::sqrt(2.0 / static_cast<double>(weights.size()));
  return scale * simd::weighted_cos_sum(z.data(), weights.data(),
                                        static_cast<int>(z.size()));
}

Vector RFFSample::grad(const Vector& x) const {
  const Vector z = frequencies * x + phases;
  const double scale = std::sqrt(2.0 / static_cast<double>(weights.size()));
  const Vector ws = weights.array() * z.array().sin();
  return -scale * frequencies.transpose() * ws;
}

RFFSample RFFSample::draw(Index dim, double lengthscale, Index features,
                          std::uint64_t seed) {
  RFFSample sample;
  sample.lengthscale = lengthscale;
  sample.weights.resize(features);
  sample.frequencies.resize(features, dim);
  sample.phases.resize(features);
  Rng rng(seed);
  for (Index m = 0; m < features; ++m) sample.weights[m] = rng.normal();
  // SE spectral density: theta ~ N(0, 1/l^2) per coordinate.
  for (Index m = 0; m < features; ++m) {
    for (Index i = 0; i < dim; ++i) {
      sample.frequencies(m, i) = rng.normal() / lengthscale;
    }
  }
  for (Index m = 0; m < features; ++m) {
    sample.phases[m] = rng.uniform(0.0, 2.0 * pi);
  }
  return sample;
}

Problem make_within_model(Index dim, std::uint64_t seed, bool constrained,
                          Index features) {
  if (dim < 1) throw std::invalid_argument("make_within_model: dim < 1");
  Problem problem;
  problem.name = constrained ? "within-model-constrained" : "within-model";
  problem.dim = dim;
  problem.bounds = Box::unit(dim);

  auto objective = std::make_shared<RFFSample>(
      RFFSample::draw(dim, 0.1, features, Rng::mix(seed, 0)));
  problem.objective = [objective](const Vector& x) {
    return objective->eval(x);
  };
  if (constrained) {
    auto chat = std::make_shared<RFFSample>(
        RFFSample::draw(dim, 0.1, features, Rng::mix(seed, 1)));
    problem.constraints.push_back(
        [chat](const Vector& x) { return chat->eval(x) - 1.0; });
  }
  return problem;
}

Problem ackley(Index dim, bool constrained) {
  if (dim < 1) throw std::invalid_argument("ackley: dim < 1");
  Problem problem;
  problem.name = constrained ? "ackley-constrained" : "ackley";
  problem.dim = dim;
  problem.bounds =
      Box{Vector::Constant(dim, -5.0), Vector::Constant(dim, 10.0)};
  problem.objective = ackley_value;
  problem.known_optimum = 0.0;
  if (constrained) {
    problem.constraints.push_back([](const Vector& x) { return -x.sum(); });
    problem.constraints.push_back(
        [](const Vector& x) { return 5.0 - x.norm(); });
  }
  return problem;
}

Problem hartmann6(bool constrained) {
  Problem problem;
  problem.name = constrained ? "hartmann6-constrained" : "hartmann6";
  problem.dim = 6;
  problem.bounds = Box::unit(6);
  problem.objective = hartmann6_value;
  problem.known_optimum = -3.322368011391339;
  if (constrained) {
    problem.constraints.push_back(
        [](const Vector& x) { return 1.0 - x.squaredNorm(); });
  }
  return problem;
}

Problem gramacy() {
  Problem problem;
  problem.name = "gramacy";
  problem.dim = 2;
  problem.bounds = Box::unit(2);
  problem.objective = [](const Vector& x) { return x[0] + x[1]; };
  problem.constraints.push_back([](const Vector& x) {
    return -(1.5 - x[0] - 2.0 * x[1] -
             0.5 * std::sin(2.0 * pi * (x[0] * x[0] - 2.0 * x[1])));
  });
  problem.constraints.push_back(
      [](const Vector& x) { return -(x[0] * x[0] + x[1] * x[1] - 1.5); });
  problem.known_optimum = 0.5998;
  return problem;
}

Problem speed_reducer() {
  Problem problem;
  problem.name = "speed-reducer";
  problem.dim = 7;
  problem.bounds = Box{
      (Vector(7) << 2.6, 0.7, 17.0, 7.3, 7.8, 2.9, 5.0).finished(),
      (Vector(7) << 3.6, 0.8, 28.0, 8.3, 8.3, 3.9, 5.5).finished()};
  problem.objective = speed_reducer_weight;
  for (int i = 0; i < 11; ++i) {
    problem.constraints.push_back(
        [i](const Vector& x) { return -speed_reducer_g(x, i); });
  }
  problem.known_optimum = 2996.3482;
  return problem;
}

Problem make_problem(const std::string& name, Index dim, std::uint64_t seed) {
  if (name == "within-model") return make_within_model(dim, seed, false);
  if (name == "within-model-constrained") {
    return make_within_model(dim, seed, true);
  }
  if (name == "ackley") return ackley(dim, false);
  if (name == "ackley-constrained") return ackley(dim, true);
  if (name == "hartmann6") return hartmann6(false);
  if (name == "hartmann6-constrained") return hartmann6(true);
  if (name == "gramacy") return gramacy();
  if (name == "speed-reducer") return speed_reducer();
  throw std::invalid_argument("unknown problem: " + name);
}

std::vector<std::string> problem_registry() {
  return {"within-model",  "within-model-constrained",
          "ackley",        "ackley-constrained",
          "hartmann6",     "hartmann6-constrained",
          "gramacy",       "speed-reducer"};
}

}  // namespace bayesqp

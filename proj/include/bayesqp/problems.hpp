#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bayesqp/quasirandom.hpp"
#include "bayesqp/types.hpp"

namespace bayesqp {

/// A black-box benchmark: objective, constraints with feasibility c_i >= 0,
/// box bounds in raw coordinates.
struct Problem {
  std::string name;
  Index dim = 0;
  std::function<double(const Vector&)> objective;
  std::vector<std::function<double(const Vector&)>> constraints;
  Box bounds;
  double noise_std = 0.0;            // additive Gaussian noise on f
  Vector constraint_noise_std;       // per-constraint; empty means noise-free
  std::optional<double> known_optimum;

  Index num_constraints() const {
    return static_cast<Index>(constraints.size());
  }
};

/// Random-Fourier-feature approximation of a draw from a zero-mean unit-scale
/// GP prior with an isotropic squared-exponential kernel:
///   f(x) = sum_m w_m sqrt(2/M) cos(theta_m' x + tau_m),
/// w_m ~ N(0,1), theta_m ~ N(0, 1/l^2 I) (the SE spectral density),
/// tau_m ~ U[0, 2pi).
struct RFFSample {
  Vector weights;      // M
  Matrix frequencies;  // M x d
  Vector phases;       // M
  double lengthscale = 0.1;

  double eval(const Vector& x) const;
  Vector grad(const Vector& x) const;  // analytic; used by tests

  static RFFSample draw(Index dim, double lengthscale, Index features,
                        std::uint64_t seed);
};

/// Within-model problem on [0,1]^d: RFF objective with l = 0.1 and M = 1028
/// features; constrained mode shifts an independent draw by one,
/// c(x) = c_hat(x) - 1.
Problem make_within_model(Index dim, std::uint64_t seed, bool constrained,
                          Index features = 1028);

/// Ackley (a = 20, b = 0.2, c = 2pi) on [-5, 10]^d; constrained mode adds
/// c1 = -sum x_i and c2 = 5 - ||x||_2.
Problem ackley(Index dim, bool constrained);

/// 6-D Hartmann on [0,1]^6; constrained mode adds c1 = 1 - ||x||^2.
Problem hartmann6(bool constrained);

/// Gramacy toy problem on [0,1]^2: f = x1 + x2 with two nonlinear
/// inequality constraints.
Problem gramacy();

/// 7-D speed reducer weight minimization with 11 mechanical constraints,
/// expressed as c_i(x) >= 0.
Problem speed_reducer();

/// Name-based registry: within-model, within-model-constrained, ackley,
/// ackley-constrained, hartmann6, hartmann6-constrained, gramacy,
/// speed-reducer. dim is ignored by the fixed-dimension problems.
/// Throws std::invalid_argument for unknown names.
Problem make_problem(const std::string& name, Index dim, std::uint64_t seed);

std::vector<std::string> problem_registry();

}  // namespace bayesqp

#pragma once

#include <cstdint>
#include <random>

#include "bayesqp/normal.hpp"

namespace bayesqp {

/// Deterministic random stream. Uniform and normal draws are derived directly
/// from the mt19937_64 output (53-bit mantissa trick + inverse-CDF transform)
/// so that sequences are identical across standard libraries and platforms,
/// unlike std::uniform_real_distribution / std::normal_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via inverse CDF; the argument is kept strictly inside
  /// (0, 1) so the quantile stays finite.
  double normal() {
    double u = uniform();
    if (u <= 0.0) u = 0x1.0p-53;
    return normal_quantile(u);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Derive an independent stream, e.g. one per (iteration, model) pair.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bayesqp

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bayesqp/types.hpp"

namespace bayesqp {

/// Unscrambled Sobol sequence (Joe-Kuo D(6) direction numbers, dimensions up
/// to 128). Points are emitted in Gray-code order; index 0 is the origin.
/// Mutable cursor: single-owner use, clone to fork a parallel consumer.
class SobolStream {
 public:
  explicit SobolStream(int dimension, std::uint64_t start_index = 0);

  int dimension() const { return dim_; }
  std::uint64_t index() const { return index_; }

  /// Next point in [0,1)^dim.
  Vector next();

  /// Next n points as columns of a dim x n matrix.
  Matrix next_points(Index n);

  SobolStream clone() const { return *this; }

  static constexpr int max_dimension() { return 128; }

 private:
  int dim_;
  std::uint64_t index_;
  std::vector<std::uint64_t> state_;                // current XOR state per dim
  std::vector<std::array<std::uint64_t, 64>> dirs_;  // direction integers
};

struct Box {
  Vector lower;
  Vector upper;

  static Box unit(Index d) {
    return Box{Vector::Zero(d), Vector::Ones(d)};
  }
};

/// K samples from the radius-eps ball around center, low-discrepancy:
/// each Sobol point (x~, u) in [0,1]^{d+1} maps through the inverse normal CDF
/// to a direction and through r = eps * u^(1/d) to a radius. Results are
/// clipped into the box componentwise; pre-clipping they lie in the ball.
/// The stream must have dimension d + 1.
Matrix ball_samples(const Vector& center, double radius, Index count,
                    const Box& bounds, SobolStream& stream);

}  // namespace bayesqp

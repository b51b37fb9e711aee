#include "bayesqp/quasirandom.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "bayesqp/normal.hpp"
#include "sobol_joe_kuo_d6.hpp"

namespace bayesqp {

namespace {

constexpr int kMaxBits = 52;  // fits a double mantissa exactly

std::array<std::uint64_t, 64> direction_integers(int dim) {
  std::array<std::uint64_t, 64> v{};
  std::uint64_t m[kMaxBits];
  if (dim == 1) {
    for (int k = 0; k < kMaxBits; ++k) m[k] = 1;
  } else {
    const std::uint32_t p = detail::kSobolPoly[dim - 2];
    const int s = std::bit_width(p) - 1;
    for (int k = 0; k < s; ++k) m[k] = detail::kSobolMinit[dim - 2][k];
    for (int k = s; k < kMaxBits; ++k) {
      std::uint64_t mk = m[k - s] ^ (m[k - s] << s);
      for (int i = 1; i < s; ++i) {
        if ((p >> (s - i)) & 1U) mk ^= m[k - i] << i;
      }
      m[k] = mk;
    }
  }
  for (int k = 0; k < kMaxBits; ++k) {
    v[k] = m[k] << (kMaxBits - 1 - k);
  }
  return v;
}

}  // namespace

SobolStream::SobolStream(int dimension, std::uint64_t start_index)
    : dim_(dimension), index_(0), state_(dimension, 0) {
  if (dimension < 1 || dimension > max_dimension()) {
    throw std::invalid_argument("SobolStream: dimension outside [1, 128]");
  }
  dirs_.reserve(dimension);
  for (int j = 1; j <= dimension; ++j) dirs_.push_back(direction_integers(j));
  while (index_ < start_index) next();
}

Vector SobolStream::next() {
  Vector point(dim_);
  constexpr double scale = 0x1.0p-52;
  for (int j = 0; j < dim_; ++j) {
    point[j] = static_cast<double>(state_[j]) * scale;
  }
  // Advance by the Gray-code rule: flip the direction of the lowest zero bit
  // of the current index.
  const int c = std::countr_one(index_);
  for (int j = 0; j < dim_; ++j) state_[j] ^= dirs_[j][c];
  ++index_;
  return point;
}

Matrix SobolStream::next_points(Index n) {
  Matrix out(dim_, n);
  for (Index i = 0; i < n; ++i) out.col(i) = next();
  return out;
}

Matrix ball_samples(const Vector& center, double radius, Index count,
                    const Box& bounds, SobolStream& stream) {
  const Index d = center.size();
  if (count <= 0) throw std::invalid_argument("ball_samples: count <= 0");
  if (!(radius > 0.0)) throw std::invalid_argument("ball_samples: radius <= 0");
  if (stream.dimension() != d + 1) {
    throw std::invalid_argument("ball_samples: stream dimension must be d+1");
  }

  Matrix out(d, count);
  for (Index s = 0; s < count; ++s) {
    const Vector point = stream.next();
    Vector direction(d);
    for (Index i = 0; i < d; ++i) {
      // Map into (0,1) before the quantile; Sobol emits exact 0 at index 0.
      const double u = point[i] <= 0.0 ? 0x1.0p-53 : point[i];
      direction[i] = normal_quantile(u);
    }
    const double norm = direction.norm();
    if (norm == 0.0) {
      direction.setZero();
      direction[0] = 1.0;  // all-0.5 Sobol point; pick a canonical direction
    } else {
      direction /= norm;
    }
    const double u_radius = point[d];
    const double r =
        radius * std::pow(u_radius, 1.0 / static_cast<double>(d));
    out.col(s) = (center + r * direction)
                     .cwiseMax(bounds.lower)
                     .cwiseMin(bounds.upper);
  }
  return out;
}

}  // namespace bayesqp

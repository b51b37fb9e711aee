#pragma once

#include <vector>

#include "bayesqp/rng.hpp"
#include "bayesqp/surrogate.hpp"
#include "bayesqp/types.hpp"

namespace bayesqp {

/// Line segment x_t + alpha p_t, alpha in [0, 1], in normalized coordinates.
struct Segment {
  Vector origin;
  Vector direction;
  int candidates = 100;  // N
};

/// One oracle evaluation in raw units.
struct EvaluatedPoint {
  Vector x;
  double f = 0.0;
  Vector c;
  int iteration = 0;
};

inline double total_violation(const Vector& c) {
  double v = 0.0;
  for (Index i = 0; i < c.size(); ++i) v += std::max(0.0, -c[i]);
  return v;
}

inline bool is_feasible(const Vector& c) {
  for (Index i = 0; i < c.size(); ++i) {
    if (c[i] < 0.0) return false;
  }
  return true;
}

struct ThompsonDiagnostics {
  bool marginal_fallback = false;  // joint covariance refused to factor
};

/// Candidate order induced by one sampled path (raw units): feasible
/// candidates by ascending f, then infeasible ones by ascending total
/// violation; ties by candidate index. c_paths is m x N (m may be 0).
std::vector<Index> thompson_rank(const Vector& f_path, const Matrix& c_paths);

/// Selected candidate of one sampled path: first element of thompson_rank.
Index thompson_pick(const Vector& f_path, const Matrix& c_paths);

/// Constrained Thompson sampling on the segment: N Sobol candidates
/// (alpha = 0 always included), M joint posterior sample paths, each picking
/// its best feasible / least-violating candidate; duplicate picks move to the
/// draw's next-best distinct candidate. Returns M points (columns).
Matrix thompson_select(const FittedGP& gp_f,
                       const std::vector<FittedGP>& gp_cs,
                       const Segment& segment, int M, Rng& rng,
                       ThompsonDiagnostics* diagnostics = nullptr);

/// Best point: argmin f over the feasible subset, otherwise argmin of total
/// constraint violation; ties broken by earliest index.
const EvaluatedPoint& select_incumbent(
    const std::vector<EvaluatedPoint>& points);

std::size_t select_incumbent_index(const std::vector<EvaluatedPoint>& points);

}  // namespace bayesqp

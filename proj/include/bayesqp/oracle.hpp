#pragma once

#include <vector>

#include "bayesqp/problems.hpp"
#include "bayesqp/types.hpp"

namespace bayesqp {

struct LocalOptimum {
  Vector x;  // raw coordinates
  double f = 0.0;
  bool feasible = false;
};

struct OracleResult {
  LocalOptimum best;
  std::vector<LocalOptimum> local_optima;  // up to 10, ascending f
};

/// Pattern search on the lexicographic (feasibility, f / total-violation)
/// key: first drives the point feasible, then descends f among feasible
/// moves. Coordinate steps shrink from `step` by halving.
LocalOptimum refine_local(const Problem& problem, const Vector& x0,
                          double step = 0.05, double min_step = 1e-9);

/// Best feasible point and the top local optima: dense grid for d <= 3
/// (resolution points per axis), multi-start refinement from 1024 Sobol
/// starts otherwise. Grid cells that are constrained local minima are
/// polished by refine_local.
OracleResult oracle_search(const Problem& problem, Index resolution);

}  // namespace bayesqp

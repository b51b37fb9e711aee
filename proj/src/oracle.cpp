#include "bayesqp/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "bayesqp/linesearch.hpp"
#include "bayesqp/quasirandom.hpp"

namespace bayesqp {

namespace {

struct Key {
  bool feasible;
  double value;  // f when feasible, total violation otherwise

  bool better_than(const Key& other) const {
    if (feasible != other.feasible) return feasible;
    return value < other.value;
  }
};

Key evaluate_key(const Problem& problem, const Vector& x, double* f_out) {
  const double f = problem.objective(x);
  double violation = 0.0;
  for (const auto& c : problem.constraints) {
    violation += std::max(0.0, -c(x));
  }
  if (f_out) *f_out = f;
  return Key{violation == 0.0, violation == 0.0 ? f : violation};
}

}  // namespace

LocalOptimum refine_local(const Problem& problem, const Vector& x0,
                          double step, double min_step) {
  const Vector& lo = problem.bounds.lower;
  const Vector& hi = problem.bounds.upper;
  const Vector span = hi - lo;
  Vector x = x0.cwiseMax(lo).cwiseMin(hi);
  double f = 0.0;
  Key key = evaluate_key(problem, x, &f);

  double h = step;
  while (h >= min_step) {
    bool moved = false;
    for (Index i = 0; i < problem.dim; ++i) {
      for (double sign : {1.0, -1.0}) {
        Vector trial = x;
        trial[i] = std::clamp(trial[i] + sign * h * span[i], lo[i], hi[i]);
        if (trial[i] == x[i]) continue;
        double trial_f = 0.0;
        const Key trial_key = evaluate_key(problem, trial, &trial_f);
        if (trial_key.better_than(key)) {
          x = trial;
          key = trial_key;
          f = trial_f;
          moved = true;
        }
      }
    }
    if (!moved) h *= 0.5;
  }
  return LocalOptimum{x, f, key.feasible};
}

OracleResult oracle_search(const Problem& problem, Index resolution) {
  std::vector<Vector> seeds;

  if (problem.dim <= 3 && resolution >= 2) {
    // Dense grid; constrained local minima (no feasible neighbor improves)
    // become refinement seeds.
    const Index res = resolution;
    const Index d = problem.dim;
    Index total = 1;
    for (Index i = 0; i < d; ++i) total *= res;
    if (total > 20'000'000) {
      throw std::invalid_argument("oracle_search: grid too large; lower the "
                                  "resolution");
    }

    std::vector<double> fs(total);
    std::vector<char> feas(total);
    const Vector span = problem.bounds.upper - problem.bounds.lower;
    std::vector<Index> idx(d);
    Vector x(d);
    for (Index flat = 0; flat < total; ++flat) {
      Index rem = flat;
      for (Index i = 0; i < d; ++i) {
        idx[i] = rem % res;
        rem /= res;
        x[i] = problem.bounds.lower[i] +
               span[i] * static_cast<double>(idx[i]) /
                   static_cast<double>(res - 1);
      }
      double f = 0.0;
      const Key key = evaluate_key(problem, x, &f);
      fs[flat] = f;
      feas[flat] = key.feasible ? 1 : 0;
    }

    for (Index flat = 0; flat < total; ++flat) {
      if (!feas[flat]) continue;
      bool is_local_min = true;
      Index stride = 1;
      Index rem = flat;
      for (Index i = 0; i < d && is_local_min; ++i) {
        const Index coord = rem % res;
        rem /= res;
        if (coord > 0 && feas[flat - stride] &&
            fs[flat - stride] < fs[flat]) {
          is_local_min = false;
        }
        if (coord + 1 < res && feas[flat + stride] &&
            fs[flat + stride] < fs[flat]) {
          is_local_min = false;
        }
        stride *= res;
      }
      if (is_local_min) {
        Vector seed(d);
        Index r = flat;
        for (Index i = 0; i < d; ++i) {
          seed[i] = problem.bounds.lower[i] +
                    span[i] * static_cast<double>(r % res) /
                        static_cast<double>(res - 1);
          r /= res;
        }
        seeds.push_back(seed);
      }
    }
  } else {
    SobolStream stream(static_cast<int>(problem.dim));
    for (int s = 0; s < 1024; ++s) {
      const Vector u = stream.next();
      seeds.push_back(problem.bounds.lower.array() +
                      (problem.bounds.upper - problem.bounds.lower).array() *
                          u.array());
    }
  }

  std::vector<LocalOptimum> refined;
  for (const Vector& seed : seeds) {
    refined.push_back(refine_local(problem, seed, 0.02));
  }
  std::sort(refined.begin(), refined.end(),
            [](const LocalOptimum& a, const LocalOptimum& b) {
              if (a.feasible != b.feasible) return a.feasible;
              return a.f < b.f;
            });

  // Deduplicate within a small radius (relative to the box diagonal).
  const double dedup =
      1e-3 * (problem.bounds.upper - problem.bounds.lower).norm();
  OracleResult result;
  for (const LocalOptimum& opt : refined) {
    if (!opt.feasible) continue;
    bool duplicate = false;
    for (const LocalOptimum& kept : result.local_optima) {
      if ((kept.x - opt.x).norm() < dedup) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) result.local_optima.push_back(opt);
    if (result.local_optima.size() >= 10) break;
  }
  if (!result.local_optima.empty()) {
    result.best = result.local_optima.front();
  } else if (!refined.empty()) {
    result.best = refined.front();
  }
  return result;
}

}  // namespace bayesqp

#include "bayesqp/linesearch.hpp"

#include <algorithm>
#include <stdexcept>

#include "bayesqp/chol.hpp"
#include "bayesqp/quasirandom.hpp"

namespace bayesqp {

namespace {

struct PathSampler {
  Vector mu;         // standardized posterior mean over the candidates
  Matrix chol;       // factor of the posterior covariance (may be empty)
  Vector marginal;   // per-candidate std when the factorization failed
  Standardization standardization;

  Vector sample(Rng& rng) const {
    const Index n = mu.size();
    Vector w(n);
    for (Index i = 0; i < n; ++i) w[i] = rng.normal();
    Vector path;
    if (chol.size() > 0) {
      path = mu + chol * w;
    } else {
      path = mu + marginal.cwiseProduct(w);
    }
    for (Index i = 0; i < n; ++i) {
      path[i] = standardization.to_raw(path[i]);
    }
    return path;
  }
};

PathSampler make_sampler(const FittedGP& gp, const Matrix& candidates,
                         ThompsonDiagnostics* diagnostics) {
  PathSampler sampler;
  auto [mu, cov] = posterior_f_batch(gp, candidates);
  sampler.mu = std::move(mu);
  sampler.standardization = gp.standardization;
  const CholeskyResult chol = cholesky_with_jitter(cov);
  if (chol.ok) {
    sampler.chol = chol.L;
  } else {
    sampler.marginal = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    if (diagnostics) diagnostics->marginal_fallback = true;
  }
  return sampler;
}

}  // namespace

std::vector<Index> thompson_rank(const Vector& f_path, const Matrix& c_paths) {
  const Index n = f_path.size();
  std::vector<double> violation(n, 0.0);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < c_paths.rows(); ++i) {
      violation[j] += std::max(0.0, -c_paths(i, j));
    }
  }
  std::vector<Index> order(n);
  for (Index j = 0; j < n; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const bool fa = violation[a] == 0.0;
    const bool fb = violation[b] == 0.0;
    if (fa != fb) return fa;
    if (fa) return f_path[a] < f_path[b];
    return violation[a] < violation[b];
  });
  return order;
}

Index thompson_pick(const Vector& f_path, const Matrix& c_paths) {
  return thompson_rank(f_path, c_paths).front();
}

Matrix thompson_select(const FittedGP& gp_f,
                       const std::vector<FittedGP>& gp_cs,
                       const Segment& segment, int M, Rng& rng,
                       ThompsonDiagnostics* diagnostics) {
  if (M < 1) throw std::invalid_argument("thompson_select: M < 1");
  const int N = std::max(segment.candidates, M);
  const Index d = segment.origin.size();

  // alpha = 0 is candidate 0 so the search may refuse to move; the remaining
  // candidates come from a 1-D Sobol stream (starting past its zero point).
  Matrix candidates(d, N);
  SobolStream alpha_stream(1, 1);
  for (int j = 0; j < N; ++j) {
    const double alpha = j == 0 ? 0.0 : alpha_stream.next()[0];
    candidates.col(j) = (segment.origin + alpha * segment.direction)
                            .cwiseMax(0.0)
                            .cwiseMin(1.0);
  }

  const PathSampler f_sampler = make_sampler(gp_f, candidates, diagnostics);
  std::vector<PathSampler> c_samplers;
  c_samplers.reserve(gp_cs.size());
  for (const FittedGP& gp : gp_cs) {
    c_samplers.push_back(make_sampler(gp, candidates, diagnostics));
  }

  std::vector<bool> taken(N, false);
  Matrix selected(d, M);
  for (int k = 0; k < M; ++k) {
    const Vector f_path = f_sampler.sample(rng);
    Matrix c_paths(static_cast<Index>(c_samplers.size()), N);
    for (size_t i = 0; i < c_samplers.size(); ++i) {
      c_paths.row(static_cast<Index>(i)) = c_samplers[i].sample(rng).transpose();
    }
    const std::vector<Index> order = thompson_rank(f_path, c_paths);
    Index pick = order.front();
    for (Index j : order) {
      if (!taken[j]) {
        pick = j;
        break;
      }
    }
    taken[pick] = true;
    selected.col(k) = candidates.col(pick);
  }
  return selected;
}

std::size_t select_incumbent_index(const std::vector<EvaluatedPoint>& points) {
  if (points.empty()) {
    throw std::invalid_argument("select_incumbent: empty list");
  }
  std::size_t best = 0;
  bool best_feasible = is_feasible(points[0].c);
  double best_key = best_feasible ? points[0].f : total_violation(points[0].c);
  for (std::size_t i = 1; i < points.size(); ++i) {
    const bool feasible = is_feasible(points[i].c);
    const double key =
        feasible ? points[i].f : total_violation(points[i].c);
    const bool better = feasible != best_feasible ? feasible : key < best_key;
    if (better) {
      best = i;
      best_feasible = feasible;
      best_key = key;
    }
  }
  return best;
}

const EvaluatedPoint& select_incumbent(
    const std::vector<EvaluatedPoint>& points) {
  return points[select_incumbent_index(points)];
}

}  // namespace bayesqp

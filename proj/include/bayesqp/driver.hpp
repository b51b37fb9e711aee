#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bayesqp/conesolver.hpp"
#include "bayesqp/problems.hpp"
#include "bayesqp/surrogate.hpp"
#include "bayesqp/types.hpp"

namespace bayesqp {

enum class Phase { Init, Subsample, Linesearch };
const char* to_string(Phase phase);

struct RunConfig {
  int budget = 100;            // T, total oracle evaluations
  int subsamples = 0;          // K; 0 selects the d+1 default
  int ls_budget = 3;           // M
  int ls_candidates = 100;     // N
  double ball_radius = 0.05;   // eps, in normalized units
  double delta_f = 0.2;
  double delta_c = 0.2;
  double delta_f_infeasible = 0.5;  // used until a feasible point is seen
  double slack_penalty = 100.0;
  double clip_eps = 1e-5;
  HyperMode hyper_mode = HyperMode::Learn;
  double frozen_lengthscale = 0.1;  // normalized units, Frozen mode only
  double noise_variance = 1e-4;     // GP observation-noise setting
  std::uint64_t seed = 0;
  std::optional<Vector> initial_point;  // raw coordinates

  Index effective_subsamples(Index dim) const {
    return subsamples > 0 ? subsamples : dim + 1;
  }
};

struct EvalRecord {
  int index = 0;
  Phase phase = Phase::Init;
  Vector x;  // raw coordinates
  double f = 0.0;
  Vector c;
  double best_f = 0.0;      // best-so-far value under the incumbent rule
  bool best_feasible = false;
};

struct IterationRecord {
  int iteration = 0;
  Vector x;  // iterate at the start of the iteration, raw coordinates
  double p_norm = 0.0;
  bool used_fallback = false;
  bool solved = false;
  bool skipped_linesearch = false;
  SolveStatus status = SolveStatus::NumericalFailure;
  double delta_f_used = 0.0;
  double incumbent_f = 0.0;
  bool incumbent_feasible = false;
};

struct RunTrace {
  std::string problem;
  std::string algorithm;
  RunConfig config;
  Index dim = 0;
  Index num_constraints = 0;
  std::vector<EvalRecord> evals;
  std::vector<IterationRecord> iterations;
  std::size_t final_index = 0;  // incumbent over all evaluations
  bool aborted = false;
  std::string abort_reason;

  const EvalRecord& final_record() const { return evals.at(final_index); }
};

/// The BayeSQP loop: subsample around the iterate, refit the GPs, build the
/// joint posteriors, solve the uncertainty-aware subproblem, line-search by
/// constrained Thompson sampling, move to the incumbent.
RunTrace run(const Problem& problem, const RunConfig& config);

/// Uniform-random baseline with the same trace format and incumbent rule.
RunTrace random_search(const Problem& problem, int budget, std::uint64_t seed);

}  // namespace bayesqp

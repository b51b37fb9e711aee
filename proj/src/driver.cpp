#include "bayesqp/driver.hpp"

#include <cmath>

#include "bayesqp/linesearch.hpp"
#include "bayesqp/quasirandom.hpp"
#include "bayesqp/rng.hpp"
#include "bayesqp/subproblem.hpp"

namespace bayesqp {

namespace {

constexpr double kDegenerateDirection = 1e-12;

/// Evaluation bookkeeping shared by run() and random_search(): raw oracle
/// calls, per-model datasets, and the Eq.-style best-so-far tracking
/// (feasible-first, then objective / total violation).
class Evaluator {
 public:
  Evaluator(const Problem& problem, RunTrace* trace, std::uint64_t seed)
      : problem_(problem),
        trace_(trace),
        noise_rng_(Rng::mix(seed, 0x7015e)),
        datasets_(1 + problem.num_constraints(), Dataset(problem.dim)) {}

  /// x in normalized coordinates; returns false when the run must abort.
  bool evaluate(const Vector& x_norm, Phase phase) {
    const Vector x_raw = problem_.bounds.lower.array() +
                         (problem_.bounds.upper - problem_.bounds.lower)
                                 .array() *
                             x_norm.array();
    EvalRecord rec;
    rec.index = static_cast<int>(trace_->evals.size());
    rec.phase = phase;
    rec.x = x_raw;
    rec.f = problem_.objective(x_raw);
    if (problem_.noise_std > 0.0) {
      rec.f += problem_.noise_std * noise_rng_.normal();
    }
    rec.c.resize(problem_.num_constraints());
    for (Index i = 0; i < problem_.num_constraints(); ++i) {
      rec.c[i] = problem_.constraints[i](x_raw);
      if (problem_.constraint_noise_std.size() > i &&
          problem_.constraint_noise_std[i] > 0.0) {
        rec.c[i] += problem_.constraint_noise_std[i] * noise_rng_.normal();
      }
    }
    if (!std::isfinite(rec.f) || !rec.c.allFinite()) {
      trace_->aborted = true;
      trace_->abort_reason = "oracle returned a non-finite value at "
                             "evaluation " +
                             std::to_string(rec.index);
      return false;
    }

    datasets_[0].append(x_norm, rec.f);
    for (Index i = 0; i < problem_.num_constraints(); ++i) {
      datasets_[1 + i].append(x_norm, rec.c[i]);
    }

    const bool feasible = is_feasible(rec.c);
    const double key = feasible ? rec.f : total_violation(rec.c);
    const bool improves = trace_->evals.empty() ||
                          (feasible && !best_feasible_) ||
                          (feasible == best_feasible_ && key < best_key_);
    if (improves) {
      best_feasible_ = feasible;
      best_key_ = key;
      trace_->final_index = trace_->evals.size();
    }
    rec.best_f =
        improves ? rec.f : trace_->evals[trace_->final_index].f;
    rec.best_feasible = best_feasible_;
    records_.push_back({x_raw, rec.f, rec.c,
                        static_cast<int>(trace_->iterations.size())});
    trace_->evals.push_back(std::move(rec));
    return true;
  }

  int count() const { return static_cast<int>(trace_->evals.size()); }
  bool seen_feasible() const { return best_feasible_; }
  const Dataset& dataset(Index model) const { return datasets_[model]; }
  const EvaluatedPoint& record(std::size_t index) const {
    return records_[index];
  }

 private:
  const Problem& problem_;
  RunTrace* trace_;
  Rng noise_rng_;
  std::vector<Dataset> datasets_;
  std::vector<EvaluatedPoint> records_;
  bool best_feasible_ = false;
  double best_key_ = 0.0;
};

FitConfig make_fit_config(const RunConfig& config, Index dim,
                          std::uint64_t stream) {
  if (config.hyper_mode == HyperMode::Frozen) {
    return FitConfig::frozen_isotropic(dim, config.frozen_lengthscale, 1.0,
                                       config.noise_variance);
  }
  FitConfig fit_config;
  fit_config.mode = HyperMode::Learn;
  fit_config.noise_variance = config.noise_variance;
  fit_config.seed = stream;
  return fit_config;
}

}  // namespace

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::Init: return "init";
    case Phase::Subsample: return "subsample";
    case Phase::Linesearch: return "linesearch";
  }
  return "unknown";
}

RunTrace run(const Problem& problem, const RunConfig& config) {
  const Index d = problem.dim;
  const Index m = problem.num_constraints();
  const int T = config.budget;
  const Index K = config.effective_subsamples(d);

  RunTrace trace;
  trace.problem = problem.name;
  trace.algorithm = "bayesqp";
  trace.config = config;
  trace.dim = d;
  trace.num_constraints = m;

  Evaluator evaluator(problem, &trace, config.seed);
  Rng ls_rng(Rng::mix(config.seed, 0x7507));
  SobolStream ball_stream(static_cast<int>(d) + 1);
  const Box unit = Box::unit(d);

  // Initial iterate: supplied (raw) or uniform in the box.
  Vector x_t(d);
  if (config.initial_point) {
    x_t = (config.initial_point->array() - problem.bounds.lower.array()) /
          (problem.bounds.upper - problem.bounds.lower).array();
    x_t = x_t.cwiseMax(0.0).cwiseMin(1.0);
  } else {
    Rng init_rng(Rng::mix(config.seed, 0x1217));
    for (Index i = 0; i < d; ++i) x_t[i] = init_rng.uniform();
  }
  if (!evaluator.evaluate(x_t, Phase::Init)) return trace;
  std::size_t x_t_record = 0;

  Vector multipliers = Vector::Zero(m);
  int iteration = 0;
  while (evaluator.count() < T && !trace.aborted) {
    IterationRecord it;
    it.iteration = iteration;
    it.x = evaluator.record(x_t_record).x;

    // (1) Local subsampling around the iterate.
    const Index k_eff =
        std::min<Index>(K, T - evaluator.count());
    if (k_eff > 0) {
      const Matrix samples =
          ball_samples(x_t, config.ball_radius, k_eff, unit, ball_stream);
      for (Index j = 0; j < samples.cols(); ++j) {
        if (!evaluator.evaluate(samples.col(j), Phase::Subsample)) break;
      }
    }
    if (trace.aborted || evaluator.count() >= T) break;

    // (2) Refit every model once per outer iteration.
    std::vector<FittedGP> gps;
    try {
      gps.reserve(1 + m);
      for (Index model = 0; model <= m; ++model) {
        gps.push_back(fit(
            evaluator.dataset(model),
            make_fit_config(config, d,
                            Rng::mix(config.seed,
                                     0x100 + 31 * iteration + model))));
      }
    } catch (const ModelError& err) {
      trace.aborted = true;
      trace.abort_reason = err.what();
      break;
    }

    // (3)-(5) Joint posteriors at the iterate, then the subproblem.
    SubproblemConfig sub;
    sub.delta_f =
        evaluator.seen_feasible() ? config.delta_f : config.delta_f_infeasible;
    sub.delta_c = config.delta_c;
    sub.variant = m > 0 ? SubproblemVariant::Robust
                        : SubproblemVariant::UnconstrainedRobust;
    sub.slack_penalty = config.slack_penalty;
    sub.clip_eps = config.clip_eps;
    it.delta_f_used = sub.delta_f;

    bool direction_ok = false;
    SearchDirection direction;
    try {
      LocalModelSet models;
      models.objective = posterior_joint(gps[0], x_t);
      for (Index i = 0; i < m; ++i) {
        ConstraintLocalModel cm;
        cm.posterior = posterior_joint(gps[1 + i], x_t);
        cm.threshold_shift = gps[1 + i].standardization.mean /
                             gps[1 + i].standardization.stddev;
        models.constraints.push_back(std::move(cm));
      }
      direction = solve_direction(models, multipliers, sub);
      direction_ok = true;
    } catch (const ModelError&) {
    } catch (const SubproblemError&) {
    }

    if (!direction_ok) {
      // Both subproblem solves failed: stay put, drop the multipliers, and
      // let the next iteration subsample afresh.
      multipliers.setZero();
      it.solved = false;
      it.skipped_linesearch = true;
      it.incumbent_f = trace.evals[trace.final_index].f;
      it.incumbent_feasible = trace.evals[trace.final_index].best_feasible;
      trace.iterations.push_back(std::move(it));
      ++iteration;
      continue;
    }

    multipliers = direction.multipliers;
    it.solved = true;
    it.used_fallback = direction.used_fallback;
    it.status = direction.status;
    it.p_norm = direction.p.norm();

    if (it.p_norm < kDegenerateDirection) {
      // Degenerate direction: spend the line-search budget on extra
      // subsamples instead.
      it.skipped_linesearch = true;
      const Index extra =
          std::min<Index>(config.ls_budget, T - evaluator.count());
      if (extra > 0) {
        const Matrix samples =
            ball_samples(x_t, config.ball_radius, extra, unit, ball_stream);
        for (Index j = 0; j < samples.cols(); ++j) {
          if (!evaluator.evaluate(samples.col(j), Phase::Subsample)) break;
        }
      }
    } else {
      const int m_eff = std::min(config.ls_budget, T - evaluator.count());
      if (m_eff > 0) {
        Segment segment;
        segment.origin = x_t;
        segment.direction = direction.p;
        segment.candidates = config.ls_candidates;
        std::vector<FittedGP> gp_cs(gps.begin() + 1, gps.end());
        const Matrix picks =
            thompson_select(gps[0], gp_cs, segment, m_eff, ls_rng);

        std::vector<EvaluatedPoint> contenders;
        std::vector<std::size_t> record_ids;
        contenders.push_back(evaluator.record(x_t_record));
        record_ids.push_back(x_t_record);
        std::vector<Vector> normalized;
        normalized.push_back(x_t);
        for (Index j = 0; j < picks.cols(); ++j) {
          const std::size_t id = trace.evals.size();
          if (!evaluator.evaluate(picks.col(j), Phase::Linesearch)) break;
          contenders.push_back(evaluator.record(id));
          record_ids.push_back(id);
          normalized.push_back(picks.col(j));
        }
        if (trace.aborted) break;
        const std::size_t winner = select_incumbent_index(contenders);
        x_t = normalized[winner];
        x_t_record = record_ids[winner];
      }
    }

    it.incumbent_f = trace.evals[trace.final_index].f;
    it.incumbent_feasible = trace.evals[trace.final_index].best_feasible;
    trace.iterations.push_back(std::move(it));
    ++iteration;
  }
  return trace;
}

RunTrace random_search(const Problem& problem, int budget,
                       std::uint64_t seed) {
  RunTrace trace;
  trace.problem = problem.name;
  trace.algorithm = "random";
  trace.config.budget = budget;
  trace.config.seed = seed;
  trace.dim = problem.dim;
  trace.num_constraints = problem.num_constraints();

  Evaluator evaluator(problem, &trace, seed);
  Rng rng(Rng::mix(seed, 0x1217));
  Vector x(problem.dim);
  for (int t = 0; t < budget; ++t) {
    for (Index i = 0; i < problem.dim; ++i) x[i] = rng.uniform();
    if (!evaluator.evaluate(x, Phase::Init)) break;
  }
  return trace;
}

}  // namespace bayesqp

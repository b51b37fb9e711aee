#include "bayesqp/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace bayesqp {

namespace {

using nlohmann::json;

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json config_to_json(const RunConfig& config) {
  json j;
  j["budget"] = config.budget;
  j["subsamples"] = config.subsamples;
  j["ls_budget"] = config.ls_budget;
  j["ls_candidates"] = config.ls_candidates;
  j["ball_radius"] = config.ball_radius;
  j["delta_f"] = config.delta_f;
  j["delta_c"] = config.delta_c;
  j["delta_f_infeasible"] = config.delta_f_infeasible;
  j["slack_penalty"] = config.slack_penalty;
  j["clip_eps"] = config.clip_eps;
  j["hyper"] = config.hyper_mode == HyperMode::Frozen ? "frozen" : "learn";
  j["frozen_lengthscale"] = config.frozen_lengthscale;
  j["noise_variance"] = config.noise_variance;
  j["seed"] = config.seed;
  if (config.initial_point) {
    j["initial_point"] = vector_to_json(*config.initial_point);
  }
  return j;
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  const auto result =
      std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void write_trace_csv(const RunTrace& trace,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "eval_index,phase";
  for (Index i = 1; i <= trace.dim; ++i) out << ",x_" << i;
  out << ",f";
  for (Index i = 1; i <= trace.num_constraints; ++i) out << ",c_" << i;
  out << ",best_f,best_feasible\n";
  for (const EvalRecord& rec : trace.evals) {
    out << rec.index << ',' << to_string(rec.phase);
    for (Index i = 0; i < rec.x.size(); ++i) {
      out << ',' << format_double(rec.x[i]);
    }
    out << ',' << format_double(rec.f);
    for (Index i = 0; i < rec.c.size(); ++i) {
      out << ',' << format_double(rec.c[i]);
    }
    out << ',' << format_double(rec.best_f) << ','
        << (rec.best_feasible ? 1 : 0) << '\n';
  }
}

void write_trace_json(const RunTrace& trace,
                      const std::filesystem::path& path) {
  json j;
  j["problem"] = trace.problem;
  j["algorithm"] = trace.algorithm;
  j["config"] = config_to_json(trace.config);
  j["dim"] = trace.dim;
  j["num_constraints"] = trace.num_constraints;
  j["evaluations"] = trace.evals.size();
  j["aborted"] = trace.aborted;
  if (trace.aborted) j["abort_reason"] = trace.abort_reason;

  json iters = json::array();
  for (const IterationRecord& it : trace.iterations) {
    json ji;
    ji["iteration"] = it.iteration;
    ji["x"] = vector_to_json(it.x);
    ji["p_norm"] = it.p_norm;
    ji["solved"] = it.solved;
    ji["used_fallback"] = it.used_fallback;
    ji["skipped_linesearch"] = it.skipped_linesearch;
    ji["status"] = to_string(it.status);
    ji["delta_f_used"] = it.delta_f_used;
    ji["incumbent_f"] = it.incumbent_f;
    ji["incumbent_feasible"] = it.incumbent_feasible;
    iters.push_back(std::move(ji));
  }
  j["iterations"] = std::move(iters);

  if (!trace.evals.empty()) {
    const EvalRecord& best = trace.final_record();
    json jb;
    jb["eval_index"] = best.index;
    jb["x"] = vector_to_json(best.x);
    jb["f"] = best.f;
    jb["c"] = vector_to_json(best.c);
    jb["feasible"] = best.best_feasible;
    j["final_incumbent"] = std::move(jb);
  }

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << '\n';
}

TraceSummary read_trace_summary(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open " + csv_path.string());
  TraceSummary summary;

  std::string line, last;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (!line.empty()) {
      last = line;
      ++summary.evaluations;
    }
  }
  if (last.empty()) {
    throw std::runtime_error("empty trace: " + csv_path.string());
  }
  // best_f and best_feasible are the last two columns.
  const auto last_comma = last.rfind(',');
  const auto second_comma = last.rfind(',', last_comma - 1);
  summary.feasible = last.substr(last_comma + 1) == "1";
  summary.final_f =
      std::stod(last.substr(second_comma + 1, last_comma - second_comma - 1));

  const std::filesystem::path sidecar =
      std::filesystem::path(csv_path).replace_extension(".json");
  if (std::filesystem::exists(sidecar)) {
    std::ifstream js(sidecar);
    const json j = json::parse(js);
    summary.problem = j.value("problem", "");
    summary.algorithm = j.value("algorithm", "");
  } else {
    // Fall back to the {problem}_{algo}_seed{n} filename convention.
    const std::string stem = csv_path.stem().string();
    const auto seed_pos = stem.rfind("_seed");
    if (seed_pos != std::string::npos) {
      const auto algo_pos = stem.rfind('_', seed_pos - 1);
      if (algo_pos != std::string::npos) {
        summary.problem = stem.substr(0, algo_pos);
        summary.algorithm = stem.substr(algo_pos + 1, seed_pos - algo_pos - 1);
      }
    }
  }
  return summary;
}

}  // namespace bayesqp

#pragma once

#include <filesystem>
#include <string>

#include "bayesqp/driver.hpp"

namespace bayesqp {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

/// CSV with columns eval_index, phase, x_1..x_d, f, c_1..c_m, best_f,
/// best_feasible.
void write_trace_csv(const RunTrace& trace, const std::filesystem::path& path);

/// JSON sidecar: config echo, per-iteration records, final incumbent.
void write_trace_json(const RunTrace& trace,
                      const std::filesystem::path& path);

/// What the reporter needs from one finished run.
struct TraceSummary {
  std::string problem;
  std::string algorithm;
  double final_f = 0.0;
  bool feasible = false;
  int evaluations = 0;
};

/// Reads the final best-so-far row of a trace CSV; problem/algorithm come
/// from the sidecar JSON when present, else from the filename stem.
TraceSummary read_trace_summary(const std::filesystem::path& csv_path);

}  // namespace bayesqp

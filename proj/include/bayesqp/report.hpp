#pragma once

#include <string>
#include <vector>

#include "bayesqp/trace_io.hpp"

namespace bayesqp {

/// q-quantile with linear interpolation between order statistics
/// (the "inclusive" convention: position (n-1) * q).
double quantile_linear(std::vector<double> values, double q);

struct ReportRow {
  std::string problem;
  std::string algorithm;
  double median = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  int feasible_runs = 0;
  int total_runs = 0;
  int evaluations = 0;  // per run, from the first trace of the group
};

/// Groups summaries by (problem, algorithm). Quantiles are computed over the
/// feasible runs only; infeasible ones are counted in the feasibility column.
std::vector<ReportRow> aggregate(const std::vector<TraceSummary>& summaries);

/// Plain-text table with one `med_{q05}^{q95} (feas. a/b)` entry per row.
std::string format_report_table(const std::vector<ReportRow>& rows);

/// CSV with the same content.
std::string format_report_csv(const std::vector<ReportRow>& rows);

}  // namespace bayesqp

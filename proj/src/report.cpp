#include "bayesqp/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace bayesqp {

double quantile_linear(std::vector<double> values, double q) {
  if (values.empty()) {
    throw std::invalid_argument("quantile of an empty sample");
  }
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<ReportRow> aggregate(const std::vector<TraceSummary>& summaries) {
  std::map<std::pair<std::string, std::string>, std::vector<TraceSummary>>
      groups;
  for (const TraceSummary& s : summaries) {
    groups[{s.problem, s.algorithm}].push_back(s);
  }
  std::vector<ReportRow> rows;
  for (const auto& [key, group] : groups) {
    ReportRow row;
    row.problem = key.first;
    row.algorithm = key.second;
    row.total_runs = static_cast<int>(group.size());
    row.evaluations = group.front().evaluations;
    std::vector<double> values;
    for (const TraceSummary& s : group) {
      if (s.feasible) {
        ++row.feasible_runs;
        values.push_back(s.final_f);
      }
    }
    if (!values.empty()) {
      row.median = quantile_linear(values, 0.5);
      row.q05 = quantile_linear(values, 0.05);
      row.q95 = quantile_linear(values, 0.95);
    } else {
      row.median = row.q05 = row.q95 =
          std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_report_table(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "problem                        algorithm  evals  result\n";
  for (const ReportRow& row : rows) {
    std::ostringstream result;
    result.precision(4);
    result << std::fixed << row.median << "_{" << row.q05 << "}^{" << row.q95
           << "} (feas. " << row.feasible_runs << "/" << row.total_runs
           << ")";
    if (row.feasible_runs < row.total_runs) {
      result << " [quantiles over feasible runs only]";
    }
    out << row.problem;
    for (std::size_t i = row.problem.size(); i < 31; ++i) out << ' ';
    out << row.algorithm;
    for (std::size_t i = row.algorithm.size(); i < 11; ++i) out << ' ';
    out << row.evaluations;
    out << "  " << result.str() << '\n';
  }
  return out.str();
}

std::string format_report_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "problem,algorithm,evaluations,median,q05,q95,feasible_runs,"
         "total_runs\n";
  for (const ReportRow& row : rows) {
    out << row.problem << ',' << row.algorithm << ',' << row.evaluations
        << ',' << format_double(row.median) << ',' << format_double(row.q05)
        << ',' << format_double(row.q95) << ',' << row.feasible_runs << ','
        << row.total_runs << '\n';
  }
  return out.str();
}

}  // namespace bayesqp

// bayesqp command-line harness: seeded experiment runs, quantile reports,
// delta/K/M sweeps, and grid-oracle utilities.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bayesqp/driver.hpp"
#include "bayesqp/oracle.hpp"
#include "bayesqp/report.hpp"
#include "bayesqp/trace_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bayesqp;

namespace {

struct CommonOptions {
  std::string problem;
  Index dim = 2;
  std::string algo = "bayesqp";
  std::string seeds_spec = "1";
  std::string config_file;
  std::string out_dir = "runs";
  int jobs = 0;

  // RunConfig fields; track which were set on the command line so that the
  // precedence is defaults < config file < flags.
  RunConfig config;
};

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  if (spec.find(',') == std::string::npos) {
    const auto count = std::stoull(spec);
    for (std::uint64_t s = 0; s < count; ++s) seeds.push_back(s);
  } else {
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ',')) {
      if (!token.empty()) seeds.push_back(std::stoull(token));
    }
  }
  if (seeds.empty()) throw CLI::ValidationError("--seeds", "no seeds given");
  return seeds;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> values;
  std::stringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) values.push_back(std::stod(token));
  }
  return values;
}

/// Flat `key = value` config file mirroring the RunConfig fields.
void apply_config_file(const std::string& path, RunConfig* config,
                       const std::map<std::string, bool>& overridden) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) continue;
    const auto is_set = [&](const std::string& k) {
      auto it = overridden.find(k);
      return it != overridden.end() && it->second;
    };
    if (is_set(key)) continue;  // command line wins
    if (key == "budget") config->budget = std::stoi(value);
    else if (key == "subsamples") config->subsamples = std::stoi(value);
    else if (key == "ls_budget") config->ls_budget = std::stoi(value);
    else if (key == "ls_candidates") config->ls_candidates = std::stoi(value);
    else if (key == "ball_radius") config->ball_radius = std::stod(value);
    else if (key == "delta_f") config->delta_f = std::stod(value);
    else if (key == "delta_c") config->delta_c = std::stod(value);
    else if (key == "delta_f_infeasible") {
      config->delta_f_infeasible = std::stod(value);
    } else if (key == "slack_penalty") {
      config->slack_penalty = std::stod(value);
    } else if (key == "clip_eps") config->clip_eps = std::stod(value);
    else if (key == "hyper") {
      config->hyper_mode =
          value == "frozen" ? HyperMode::Frozen : HyperMode::Learn;
    } else if (key == "frozen_lengthscale") {
      config->frozen_lengthscale = std::stod(value);
    } else if (key == "noise_variance") {
      config->noise_variance = std::stod(value);
    } else {
      throw CLI::ValidationError(
          "--config", "unknown key '" + key + "' at line " +
                          std::to_string(lineno));
    }
  }
}

int worker_count(int jobs) {
  if (jobs > 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

struct RunResult {
  std::uint64_t seed = 0;
  std::string csv;
  bool aborted = false;
  double final_f = 0.0;
  bool feasible = false;
};

/// Fan the (algorithm, seed) runs over a small thread pool; each worker owns
/// its run state, the manifest is assembled afterwards.
std::vector<RunResult> run_all(const CommonOptions& opt,
                               const std::vector<std::uint64_t>& seeds) {
  fs::create_directories(opt.out_dir);
  std::vector<RunResult> results(seeds.size());
  std::atomic<std::size_t> cursor{0};
  std::mutex io_mutex;

  auto work = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= seeds.size()) return;
      const std::uint64_t seed = seeds[i];
      const Problem problem = make_problem(opt.problem, opt.dim, seed);
      RunConfig config = opt.config;
      config.seed = seed;
      RunTrace trace = opt.algo == "random"
                           ? random_search(problem, config.budget, seed)
                           : run(problem, config);
      const std::string stem = opt.problem + "_" + opt.algo + "_seed" +
                               std::to_string(seed);
      const fs::path csv = fs::path(opt.out_dir) / (stem + ".csv");
      write_trace_csv(trace, csv);
      write_trace_json(trace, fs::path(opt.out_dir) / (stem + ".json"));
      RunResult res;
      res.seed = seed;
      res.csv = csv.string();
      res.aborted = trace.aborted;
      if (!trace.evals.empty()) {
        res.final_f = trace.final_record().f;
        res.feasible = trace.final_record().best_feasible;
      }
      results[i] = std::move(res);
      std::lock_guard<std::mutex> lock(io_mutex);
      std::cerr << stem << (results[i].aborted ? " ABORTED" : " done")
                << ", best " << format_double(results[i].final_f)
                << (results[i].feasible ? " (feasible)" : " (infeasible)")
                << "\n";
    }
  };

  std::vector<std::thread> pool;
  const int n_workers =
      std::min<int>(worker_count(opt.jobs), static_cast<int>(seeds.size()));
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  return results;
}

void write_manifest(const CommonOptions& opt,
                    const std::vector<RunResult>& results) {
  json j;
  j["problem"] = opt.problem;
  j["dim"] = opt.dim;
  j["algorithm"] = opt.algo;
  json runs = json::array();
  for (const RunResult& r : results) {
    json jr;
    jr["seed"] = r.seed;
    jr["trace"] = r.csv;
    jr["aborted"] = r.aborted;
    jr["final_f"] = r.final_f;
    jr["feasible"] = r.feasible;
    runs.push_back(std::move(jr));
  }
  j["runs"] = std::move(runs);
  std::ofstream out(fs::path(opt.out_dir) / "manifest.json");
  out << j.dump(2) << '\n';
}

std::vector<fs::path> expand_globs(const std::vector<std::string>& patterns) {
  std::vector<fs::path> files;
  for (const std::string& pattern : patterns) {
    if (pattern.find('*') == std::string::npos) {
      files.emplace_back(pattern);
      continue;
    }
    const fs::path p(pattern);
    const fs::path dir = p.parent_path().empty() ? "." : p.parent_path();
    const std::string name = p.filename().string();
    // '*' wildcards only, matched greedily left to right.
    const auto matches = [&](const std::string& candidate) {
      std::size_t ci = 0, pi = 0, star = std::string::npos, mark = 0;
      while (ci < candidate.size()) {
        if (pi < name.size() &&
            (name[pi] == candidate[ci] || name[pi] == '?')) {
          ++ci, ++pi;
        } else if (pi < name.size() && name[pi] == '*') {
          star = pi++;
          mark = ci;
        } else if (star != std::string::npos) {
          pi = star + 1;
          ci = ++mark;
        } else {
          return false;
        }
      }
      while (pi < name.size() && name[pi] == '*') ++pi;
      return pi == name.size();
    };
    if (!fs::exists(dir)) continue;
    std::vector<fs::path> found;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && matches(entry.path().filename().string())) {
        found.push_back(entry.path());
      }
    }
    std::sort(found.begin(), found.end());
    files.insert(files.end(), found.begin(), found.end());
  }
  return files;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BayeSQP experiment harness"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::map<std::string, bool> flag_set;

  const auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("--problem", opt.problem, "problem registry name")
        ->required();
    cmd->add_option("--dim", opt.dim, "dimension (variable-size problems)");
    cmd->add_option("--algo", opt.algo, "bayesqp | random")
        ->check(CLI::IsMember({"bayesqp", "random"}));
    cmd->add_option("--seeds", opt.seeds_spec,
                    "seed count or comma-separated list");
    cmd->add_option("--budget", opt.config.budget, "total oracle evaluations");
    auto* df = cmd->add_option("--delta-f", opt.config.delta_f);
    auto* dc = cmd->add_option("--delta-c", opt.config.delta_c);
    auto* ks = cmd->add_option("--subsamples", opt.config.subsamples,
                               "K (0 = d+1 default)");
    auto* ls = cmd->add_option("--ls-budget", opt.config.ls_budget);
    auto* br = cmd->add_option("--ball-radius", opt.config.ball_radius);
    std::string hyper;
    cmd->add_option_function<std::string>(
           "--hyper",
           [&opt](const std::string& value) {
             opt.config.hyper_mode =
                 value == "frozen" ? HyperMode::Frozen : HyperMode::Learn;
           },
           "frozen | learn")
        ->check(CLI::IsMember({"frozen", "learn"}));
    cmd->add_option("--frozen-lengthscale", opt.config.frozen_lengthscale);
    cmd->add_option("--config", opt.config_file, "flat key = value file");
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--jobs", opt.jobs, "worker count (default: cores)");
    cmd->callback([&flag_set, cmd]() {
      for (const auto* o : cmd->get_options()) {
        if (o->count() > 0) {
          std::string name = o->get_name();
          if (name.rfind("--", 0) == 0) name = name.substr(2);
          for (char& ch : name) {
            if (ch == '-') ch = '_';
          }
          flag_set[name] = true;
        }
      }
    });
    (void)df; (void)dc; (void)ks; (void)ls; (void)br;
  };

  auto* cmd_run = app.add_subcommand("run", "execute seeded runs");
  add_run_options(cmd_run);

  auto* cmd_sweep =
      app.add_subcommand("sweep", "grid sweep over delta_f x delta_c or K x M");
  add_run_options(cmd_sweep);
  std::string grid_df_spec, grid_dc_spec, grid_k_spec, grid_m_spec;
  cmd_sweep->add_option("--grid-delta-f", grid_df_spec,
                        "comma list of delta_f values");
  cmd_sweep->add_option("--grid-delta-c", grid_dc_spec,
                        "comma list of delta_c values");
  cmd_sweep->add_option("--grid-k", grid_k_spec, "comma list of K values");
  cmd_sweep->add_option("--grid-m", grid_m_spec, "comma list of M values");

  auto* cmd_report = app.add_subcommand("report", "aggregate trace files");
  std::vector<std::string> report_patterns;
  std::string report_out = "report";
  cmd_report->add_option("traces", report_patterns, "trace CSVs or globs")
      ->required();
  cmd_report->add_option("--out", report_out,
                         "output stem (.csv and .txt are written)");

  auto* cmd_oracle = app.add_subcommand("oracle", "grid / multi-start optimum");
  std::string oracle_problem;
  Index oracle_dim = 2;
  std::uint64_t oracle_seed = 0;
  Index oracle_resolution = 2001;
  std::string oracle_out = "oracle.json";
  cmd_oracle->add_option("--problem", oracle_problem)->required();
  cmd_oracle->add_option("--dim", oracle_dim);
  cmd_oracle->add_option("--seed", oracle_seed);
  cmd_oracle->add_option("--resolution", oracle_resolution);
  cmd_oracle->add_option("--out", oracle_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_run->parsed() || cmd_sweep->parsed()) {
      const auto registry = problem_registry();
      if (std::find(registry.begin(), registry.end(), opt.problem) ==
          registry.end()) {
        std::cerr << "unknown problem '" << opt.problem << "'; available:";
        for (const auto& name : registry) std::cerr << ' ' << name;
        std::cerr << '\n';
        return 2;
      }
      if (!opt.config_file.empty()) {
        apply_config_file(opt.config_file, &opt.config, flag_set);
      }
    }

    if (cmd_run->parsed()) {
      const auto seeds = parse_seeds(opt.seeds_spec);
      const auto results = run_all(opt, seeds);
      write_manifest(opt, results);
      for (const RunResult& r : results) {
        if (r.aborted) return 1;
      }
      return 0;
    }

    if (cmd_sweep->parsed()) {
      const auto seeds = parse_seeds(opt.seeds_spec);
      const bool delta_grid = !grid_df_spec.empty() && !grid_dc_spec.empty();
      const bool km_grid = !grid_k_spec.empty() && !grid_m_spec.empty();
      if (delta_grid == km_grid) {
        std::cerr << "sweep needs exactly one of --grid-delta-f/--grid-delta-c "
                     "or --grid-k/--grid-m\n";
        return 2;
      }
      const std::vector<double> rows =
          parse_grid(delta_grid ? grid_df_spec : grid_k_spec);
      const std::vector<double> cols =
          parse_grid(delta_grid ? grid_dc_spec : grid_m_spec);
      if (rows.empty() || cols.empty()) {
        std::cerr << "sweep grid is empty\n";
        return 2;
      }

      fs::create_directories(opt.out_dir);
      std::ostringstream matrix;
      matrix << (delta_grid ? "delta_f\\delta_c" : "K\\M");
      for (double c : cols) matrix << ',' << format_double(c);
      matrix << '\n';
      bool has_corollary_cell = false;
      for (double r : rows) {
        matrix << format_double(r);
        for (double c : cols) {
          CommonOptions cell = opt;
          cell.out_dir = (fs::path(opt.out_dir) /
                          ("cell_" + format_double(r) + "_" +
                           format_double(c)))
                             .string();
          if (delta_grid) {
            cell.config.delta_f = r;
            cell.config.delta_c = c;
            if (r == 0.5 && c == 0.5) has_corollary_cell = true;
          } else {
            cell.config.subsamples = static_cast<int>(r);
            cell.config.ls_budget = static_cast<int>(c);
          }
          const auto results = run_all(cell, seeds);
          write_manifest(cell, results);
          std::vector<double> finals;
          for (const RunResult& res : results) finals.push_back(res.final_f);
          matrix << ',' << format_double(quantile_linear(finals, 0.5));
        }
        matrix << '\n';
      }
      if (has_corollary_cell) {
        matrix << "# cell (0.5, 0.5) runs the expected-value configuration\n";
      }
      const fs::path out = fs::path(opt.out_dir) / "sweep.csv";
      std::ofstream file(out);
      file << matrix.str();
      std::cout << matrix.str();
      return 0;
    }

    if (cmd_report->parsed()) {
      const auto files = expand_globs(report_patterns);
      if (files.empty()) {
        std::cerr << "no trace files matched\n";
        return 2;
      }
      std::vector<TraceSummary> summaries;
      for (const fs::path& file : files) {
        summaries.push_back(read_trace_summary(file));
      }
      const auto rows = aggregate(summaries);
      const std::string table = format_report_table(rows);
      std::cout << table;
      std::ofstream csv(report_out + ".csv");
      csv << format_report_csv(rows);
      std::ofstream txt(report_out + ".txt");
      txt << table;
      return 0;
    }

    if (cmd_oracle->parsed()) {
      const Problem problem =
          make_problem(oracle_problem, oracle_dim, oracle_seed);
      const OracleResult result = oracle_search(problem, oracle_resolution);
      json j;
      j["problem"] = oracle_problem;
      j["best_f"] = result.best.f;
      j["best_feasible"] = result.best.feasible;
      json bx = json::array();
      for (Index i = 0; i < result.best.x.size(); ++i) {
        bx.push_back(result.best.x[i]);
      }
      j["best_x"] = std::move(bx);
      json locals = json::array();
      for (const LocalOptimum& opt_pt : result.local_optima) {
        json jo;
        jo["f"] = opt_pt.f;
        json x = json::array();
        for (Index i = 0; i < opt_pt.x.size(); ++i) x.push_back(opt_pt.x[i]);
        jo["x"] = std::move(x);
        locals.push_back(std::move(jo));
      }
      j["local_optima"] = std::move(locals);
      std::ofstream out(oracle_out);
      out << j.dump(2) << '\n';
      std::cout << "best " << format_double(result.best.f) << " ("
                << result.local_optima.size() << " local optima)\n";
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}

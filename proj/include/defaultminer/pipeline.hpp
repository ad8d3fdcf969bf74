#pragma once

#include <algorithm>
#include <filesystem>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "defaultminer/evaluation.hpp"
#include "defaultminer/exact.hpp"
#include "defaultminer/format.hpp"
#include "defaultminer/greedy.hpp"
#include "defaultminer/io.hpp"
#include "defaultminer/surrogate.hpp"
#include "defaultminer/synthetic.hpp"

namespace defaultminer {

enum class SolverChoice { kGreedy, kExact, kBoth };

inline SolverChoice solver_from_name(const std::string& name) {
  if (name == "greedy") return SolverChoice::kGreedy;
  if (name == "exact") return SolverChoice::kExact;
  if (name == "both") return SolverChoice::kBoth;
  throw std::invalid_argument("unknown solver '" + name + "' (expected greedy|exact|both)");
}

// End-to-end configuration: runs + space in, surrogate matrix, default sets
// and an evaluation report out.
struct PipelineConfig {
  std::filesystem::path runs_path;
  std::filesystem::path space_path;
  std::filesystem::path out_dir;
  SolverChoice solver = SolverChoice::kBoth;
  AggregatorSpec agg = AggregatorSpec::Median();
  std::vector<int> n_values = {1, 2, 4, 8};
  std::string pool = "grid:8";  // random:<M>[:<seed>] | grid:<g>
  int surrogate_k = 25;
  std::vector<int> rs_budgets = {4, 8, 16, 32};
  int rs_repetitions = 100;
  std::uint64_t seed = 42;
  double exact_time_limit = std::numeric_limits<double>::infinity();
  int exact_n = 0;  // 0 = auto: largest n in n_values with C(M, n) <= 1e7
  bool higher_is_better = true;
};

struct PipelineArtifacts {
  std::vector<std::filesystem::path> written;
};

namespace detail {

inline std::pair<std::string, std::vector<std::string>> split_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t colon = spec.find(':', start);
    if (colon == std::string::npos) {
      parts.push_back(spec.substr(start));
      break;
    }
    parts.push_back(spec.substr(start, colon - start));
    start = colon + 1;
  }
  const std::string head = parts.empty() ? "" : parts.front();
  parts.erase(parts.begin());
  return {head, parts};
}

}  // namespace detail

// Parses `random:<M>[:<seed>]` or `grid:<g>`. A random pool without an
// explicit seed falls back to `default_seed`.
inline CandidatePool make_pool(const HyperparameterSpace& space, const std::string& spec,
                               std::uint64_t default_seed) {
  const auto [head, args] = detail::split_spec(spec);
  if (head == "grid" && args.size() == 1) {
    return grid_candidates(space, static_cast<int>(parse_long(args[0], "pool spec")));
  }
  if (head == "random" && (args.size() == 1 || args.size() == 2)) {
    const int count = static_cast<int>(parse_long(args[0], "pool spec"));
    const std::uint64_t seed =
        args.size() == 2 ? static_cast<std::uint64_t>(parse_long(args[1], "pool spec"))
                         : default_seed;
    return sample_candidates(space, count, seed);
  }
  throw std::invalid_argument("bad pool spec '" + spec +
                              "' (expected random:<M>[:<seed>] or grid:<g>)");
}

// Groups run records per dataset (first-seen order), applies the
// lower-is-better sign convention and standardizes each dataset's observed
// risks, then fits one surrogate per dataset. This is the sanctioned path
// from sparse run data to a dense matrix.
inline std::vector<SurrogateModel> fit_surrogates(const std::vector<RunRecord>& records,
                                                  const HyperparameterSpace& space, int k) {
  if (records.empty()) throw std::invalid_argument("fit_surrogates: no run records");
  std::vector<std::string> order;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<Configuration>> configs;
  std::vector<std::vector<double>> risks;
  for (const RunRecord& rec : records) {
    auto [it, inserted] = index.try_emplace(rec.dataset_id, order.size());
    if (inserted) {
      order.push_back(rec.dataset_id);
      configs.emplace_back();
      risks.emplace_back();
    }
    configs[it->second].push_back(Configuration{-1, rec.values});
    risks[it->second].push_back(rec.higher_is_better ? -rec.value : rec.value);
  }
  std::vector<SurrogateModel> models;
  models.reserve(order.size());
  for (std::size_t d = 0; d < order.size(); ++d) {
    const std::vector<double> standardized = standardize_values(risks[d]);
    models.push_back(fit_surrogate(order[d], space, configs[d], standardized, k));
  }
  return models;
}

// Largest n in n_values whose subset count keeps the exact solver fast;
// 0 when even n = 1 is too large (cannot happen at desk scale).
inline int auto_exact_n(std::size_t num_configurations, const std::vector<int>& n_values) {
  int best = 0;
  for (int n : n_values) {
    if (static_cast<std::size_t>(n) > num_configurations) continue;
    if (detail::binomial_upper(num_configurations, static_cast<std::size_t>(n)) <= 1e7) {
      best = std::max(best, n);
    }
  }
  return best;
}

inline PipelineArtifacts run_pipeline(const PipelineConfig& config) {
  if (!std::filesystem::exists(config.runs_path)) {
    throw std::runtime_error("runs file '" + config.runs_path.string() + "' does not exist");
  }
  if (!std::filesystem::exists(config.space_path)) {
    throw std::runtime_error("space file '" + config.space_path.string() + "' does not exist");
  }
  std::vector<int> n_values = config.n_values;
  if (n_values.empty()) throw std::invalid_argument("pipeline: empty n list");
  std::sort(n_values.begin(), n_values.end());
  n_values.erase(std::unique(n_values.begin(), n_values.end()), n_values.end());
  if (n_values.front() < 1) throw std::invalid_argument("pipeline: n values must be >= 1");

  std::filesystem::create_directories(config.out_dir);
  PipelineArtifacts artifacts;

  const HyperparameterSpace space = parse_space(read_text(config.space_path));
  const std::vector<RunRecord> records =
      read_runs_csv(config.runs_path, space, config.higher_is_better);

  const std::vector<SurrogateModel> models =
      fit_surrogates(records, space, config.surrogate_k);
  const CandidatePool pool = make_pool(space, config.pool, config.seed);
  const RiskMatrix matrix = build_surrogate_matrix(models, pool);

  const std::filesystem::path matrix_path = config.out_dir / "matrix.csv";
  write_matrix(matrix_path, matrix, &space);
  artifacts.written.push_back(matrix_path);
  artifacts.written.push_back(matrix_sidecar_path(matrix_path));

  const int max_n = n_values.back();
  if (config.solver != SolverChoice::kExact) {
    const DefaultSet greedy = greedy_select(matrix, max_n, config.agg);
    const std::filesystem::path path = config.out_dir / "defaults_greedy.json";
    write_default_set(path, greedy);
    artifacts.written.push_back(path);
  }
  if (config.solver != SolverChoice::kGreedy) {
    const int exact_n = config.exact_n > 0
                            ? config.exact_n
                            : auto_exact_n(matrix.num_configurations(), n_values);
    if (exact_n < 1) {
      throw std::runtime_error(
          "pipeline: no n value small enough for the exact solver; pass an explicit exact n");
    }
    ExactOptions options;
    options.time_limit_seconds = config.exact_time_limit;
    // The subset-count cap above already bounds the work, so the generic
    // M > 64 size guard is bypassed here.
    options.force = true;
    const ExactResult exact = solve_exact(matrix, exact_n, options);
    const std::filesystem::path path = config.out_dir / "defaults_exact.json";
    write_exact_result(path, exact);
    artifacts.written.push_back(path);
  }

  std::vector<StrategyResult> strategies = lodo_evaluate(matrix, n_values, config.agg);
  for (int budget : config.rs_budgets) {
    strategies.push_back(
        random_search_baseline(matrix, budget, config.seed, config.rs_repetitions));
  }
  const EvaluationReport report = build_report(matrix, std::move(strategies));
  const std::filesystem::path report_path = config.out_dir / "report.json";
  write_report(report_path, report);
  artifacts.written.push_back(report_path);
  const std::filesystem::path ranks_path = config.out_dir / "ranks.csv";
  write_rank_plot_csv(ranks_path, report);
  artifacts.written.push_back(ranks_path);

  return artifacts;
}

// Writes a self-contained synthetic corpus and runs the full pipeline on it.
// Lets every part of the tool run without any external data.
struct DemoConfig {
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
};

inline PipelineArtifacts run_demo(const DemoConfig& demo) {
  std::filesystem::create_directories(demo.out_dir);
  SyntheticSpec spec;
  spec.seed = demo.seed;
  const SyntheticCorpus corpus = make_synthetic_corpus(spec);

  const std::filesystem::path space_path = demo.out_dir / "space.json";
  write_text_atomic(space_path, space_to_json(corpus.space).dump(2) + "\n");
  const std::filesystem::path runs_path = demo.out_dir / "runs.csv";
  write_runs_csv(runs_path, corpus.space, corpus.runs);

  PipelineConfig config;
  config.runs_path = runs_path;
  config.space_path = space_path;
  config.out_dir = demo.out_dir;
  config.solver = SolverChoice::kBoth;
  config.agg = AggregatorSpec::Median();
  config.n_values = {1, 2, 4, 8};
  config.pool = "grid:" + std::to_string(spec.grid_per_dim);
  config.rs_budgets = {4, 8, 16, 32};
  config.rs_repetitions = 50;
  config.seed = demo.seed;

  PipelineArtifacts artifacts = run_pipeline(config);
  artifacts.written.insert(artifacts.written.begin(), {space_path, runs_path});
  return artifacts;
}

}  // namespace defaultminer

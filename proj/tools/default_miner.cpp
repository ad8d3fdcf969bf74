// default_miner: learns ordered sets of complementary default hyperparameter
// configurations from historical run data and evaluates them against random
// search. Subcommands cover surrogate-matrix construction, greedy and exact
// selection, LP export, leave-one-dataset-out evaluation, rank statistics and
// an end-to-end pipeline with a bundled synthetic demo.

#include <cstdint>
#include <exception>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "defaultminer/evaluation.hpp"
#include "defaultminer/exact.hpp"
#include "defaultminer/format.hpp"
#include "defaultminer/greedy.hpp"
#include "defaultminer/io.hpp"
#include "defaultminer/objective.hpp"
#include "defaultminer/pipeline.hpp"
#include "defaultminer/surrogate.hpp"

namespace dm = defaultminer;

namespace {

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(start, comma - start);
    if (item.empty()) throw CLI::ValidationError(flag, "empty entry in list '" + text + "'");
    try {
      values.push_back(static_cast<int>(dm::parse_long(item, flag)));
    } catch (const std::exception& e) {
      throw CLI::ValidationError(flag, e.what());
    }
    start = comma + 1;
  }
  if (values.empty()) throw CLI::ValidationError(flag, "empty list");
  return values;
}

dm::AggregatorSpec parse_agg(const std::string& text) {
  try {
    return dm::AggregatorSpec::Parse(text);
  } catch (const std::exception& e) {
    throw CLI::ValidationError("--agg", e.what());
  }
}

struct SurrogateArgs {
  std::string runs, space, pool = "random:1000", out;
  int k = 25;
  bool lower_is_better = false;
  std::uint64_t seed = 1;
};

struct SelectArgs {
  std::string matrix, out, agg = "median";
  int n = 0;
  double time_limit = std::numeric_limits<double>::infinity();
  bool force = false;
};

struct EvaluateArgs {
  std::string matrix, out, agg = "median";
  std::string n_list = "1,2,4,8,16,32";
  std::string rs_budgets = "4,8,16,32,64";
  int reps = 100;
  std::uint64_t seed = 42;
};

struct PipelineArgs {
  std::string runs, space, out_dir, solver = "both", agg = "median";
  std::string n_list = "1,2,4,8", pool = "random:1000", rs_budgets = "4,8,16,32";
  int k = 25, reps = 100, exact_n = 0;
  std::uint64_t seed = 42;
  double time_limit = std::numeric_limits<double>::infinity();
  bool lower_is_better = false;
};

void run_surrogate_build(const SurrogateArgs& args) {
  const dm::HyperparameterSpace space = dm::parse_space(dm::read_text(args.space));
  const std::vector<dm::RunRecord> records =
      dm::read_runs_csv(args.runs, space, !args.lower_is_better);
  const std::vector<dm::SurrogateModel> models =
      dm::fit_surrogates(records, space, args.k);
  const dm::CandidatePool pool = dm::make_pool(space, args.pool, args.seed);
  const dm::RiskMatrix matrix = dm::build_surrogate_matrix(models, pool);
  dm::write_matrix(args.out, matrix, &space);
  std::cout << "wrote " << args.out << " (" << matrix.num_datasets() << " datasets x "
            << matrix.num_configurations() << " configurations)\n";
}

void run_greedy(const SelectArgs& args) {
  const dm::RiskMatrix matrix = dm::read_matrix(args.matrix);
  const dm::DefaultSet set = dm::greedy_select(matrix, args.n, parse_agg(args.agg));
  dm::write_default_set(args.out, set);
  std::cout << "wrote " << args.out << " (" << set.size()
            << " defaults, objective " << dm::format_double(set.objective()) << ")\n";
}

void run_exact(const SelectArgs& args) {
  const dm::RiskMatrix matrix = dm::read_matrix(args.matrix);
  dm::ExactOptions options;
  options.time_limit_seconds = args.time_limit;
  options.force = args.force;
  const dm::ExactResult result = dm::solve_exact(matrix, args.n, options);
  dm::write_exact_result(args.out, result);
  std::cout << "wrote " << args.out << " ("
            << (result.status == dm::SolveStatus::kOptimal ? "optimal" : "time-limit")
            << ", objective " << dm::format_double(result.objective) << ", gap "
            << dm::format_double(result.gap()) << ", " << result.nodes << " nodes)\n";
}

void run_export_lp(const SelectArgs& args) {
  const dm::RiskMatrix matrix = dm::read_matrix(args.matrix);
  const dm::MipInstance instance = dm::build_mip(matrix, args.n);
  dm::write_text_atomic(args.out, dm::export_lp(instance));
  std::cout << "wrote " << args.out << " (" << instance.num_binary_variables() << " binary, "
            << instance.num_continuous_variables() << " continuous variables, "
            << instance.num_constraints() << " constraints)\n";
}

void run_evaluate_lodo(const EvaluateArgs& args) {
  const dm::RiskMatrix matrix = dm::read_matrix(args.matrix);
  const std::vector<int> n_values = parse_int_list(args.n_list, "--n");
  std::vector<dm::StrategyResult> strategies =
      dm::lodo_evaluate(matrix, n_values, parse_agg(args.agg));
  for (int budget : parse_int_list(args.rs_budgets, "--rs-budgets")) {
    strategies.push_back(dm::random_search_baseline(matrix, budget, args.seed, args.reps));
  }
  const dm::EvaluationReport report = dm::build_report(matrix, std::move(strategies));
  dm::write_report(args.out, report);
  std::cout << "wrote " << args.out << " (" << report.num_strategies() << " strategies over "
            << report.num_datasets() << " datasets)\n";
}

void run_stats_ranks(const std::string& report_path, const std::string& plot_out) {
  const dm::EvaluationReport report = dm::read_report(report_path);
  std::cout << "strategy            avg_rank\n";
  for (std::size_t s = 0; s < report.strategies.size(); ++s) {
    std::string label = report.strategies[s].label;
    label.resize(20, ' ');
    std::cout << label << dm::format_double(report.average_ranks[s]) << "\n";
  }
  if (report.friedman.has_value()) {
    std::cout << "friedman chi2 = " << dm::format_double(report.friedman->statistic)
              << ", p = " << dm::format_double(report.friedman->p_value) << "\n";
  } else {
    std::cout << "friedman chi2 = n/a (needs at least 3 strategies)\n";
  }
  if (report.nemenyi_cd.has_value()) {
    std::cout << "nemenyi critical difference (alpha=0.05) = "
              << dm::format_double(*report.nemenyi_cd) << "\n";
  } else {
    std::cout << "nemenyi critical difference = n/a (table covers 2..10 strategies)\n";
  }
  if (!plot_out.empty()) {
    dm::write_rank_plot_csv(plot_out, report);
    std::cout << "wrote " << plot_out << "\n";
  }
}

void run_pipeline_cmd(const PipelineArgs& args) {
  dm::PipelineConfig config;
  config.runs_path = args.runs;
  config.space_path = args.space;
  config.out_dir = args.out_dir;
  config.solver = dm::solver_from_name(args.solver);
  config.agg = parse_agg(args.agg);
  config.n_values = parse_int_list(args.n_list, "--n");
  config.pool = args.pool;
  config.surrogate_k = args.k;
  config.rs_budgets = parse_int_list(args.rs_budgets, "--rs-budgets");
  config.rs_repetitions = args.reps;
  config.seed = args.seed;
  config.exact_time_limit = args.time_limit;
  config.exact_n = args.exact_n;
  config.higher_is_better = !args.lower_is_better;
  const dm::PipelineArtifacts artifacts = dm::run_pipeline(config);
  for (const auto& path : artifacts.written) std::cout << "wrote " << path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"default_miner: mine and evaluate sets of default hyperparameter configurations"};
  app.require_subcommand(1);

  // surrogate build
  auto* surrogate = app.add_subcommand("surrogate", "surrogate model commands");
  surrogate->require_subcommand(1);
  SurrogateArgs surrogate_args;
  auto* build = surrogate->add_subcommand("build", "fit per-dataset surrogates and predict a dense risk matrix");
  build->add_option("--runs", surrogate_args.runs, "runs CSV")->required();
  build->add_option("--space", surrogate_args.space, "space spec JSON")->required();
  build->add_option("--pool", surrogate_args.pool, "candidate pool: random:<M>[:<seed>] or grid:<g>");
  build->add_option("--k", surrogate_args.k, "neighbor count");
  build->add_option("--seed", surrogate_args.seed, "seed for random pools without one");
  build->add_flag("--lower-is-better", surrogate_args.lower_is_better,
                  "measure is already a risk (no negation)");
  build->add_option("--out", surrogate_args.out, "output matrix CSV")->required();
  build->callback([&] { run_surrogate_build(surrogate_args); });

  // defaults greedy | exact | export-lp
  auto* defaults = app.add_subcommand("defaults", "default-set selection commands");
  defaults->require_subcommand(1);
  SelectArgs greedy_args;
  auto* greedy = defaults->add_subcommand("greedy", "greedy forward selection (anytime)");
  greedy->add_option("--matrix", greedy_args.matrix, "risk matrix CSV")->required();
  greedy->add_option("--n", greedy_args.n, "number of defaults")->required();
  greedy->add_option("--agg", greedy_args.agg, "aggregator: mean|sum|median|min|max|q:<x>|hl");
  greedy->add_option("--out", greedy_args.out, "output default-set JSON")->required();
  greedy->callback([&] { run_greedy(greedy_args); });

  SelectArgs exact_args;
  auto* exact = defaults->add_subcommand("exact", "exact branch-and-bound (sum aggregator)");
  exact->add_option("--matrix", exact_args.matrix, "risk matrix CSV")->required();
  exact->add_option("--n", exact_args.n, "number of defaults")->required();
  exact->add_option("--time-limit", exact_args.time_limit, "seconds before returning the incumbent");
  exact->add_flag("--force", exact_args.force, "bypass the instance-size guard");
  exact->add_option("--out", exact_args.out, "output default-set JSON")->required();
  exact->callback([&] { run_exact(exact_args); });

  SelectArgs lp_args;
  auto* export_lp = defaults->add_subcommand("export-lp", "write the instance in CPLEX-LP format");
  export_lp->add_option("--matrix", lp_args.matrix, "risk matrix CSV")->required();
  export_lp->add_option("--n", lp_args.n, "number of defaults")->required();
  export_lp->add_option("--out", lp_args.out, "output .lp file")->required();
  export_lp->callback([&] { run_export_lp(lp_args); });

  // evaluate lodo
  auto* evaluate = app.add_subcommand("evaluate", "evaluation protocols");
  evaluate->require_subcommand(1);
  EvaluateArgs evaluate_args;
  auto* lodo = evaluate->add_subcommand("lodo", "leave-one-dataset-out defaults vs random search");
  lodo->add_option("--matrix", evaluate_args.matrix, "risk matrix CSV")->required();
  lodo->add_option("--n", evaluate_args.n_list, "default-set sizes, comma separated");
  lodo->add_option("--agg", evaluate_args.agg, "aggregator for greedy learning");
  lodo->add_option("--rs-budgets", evaluate_args.rs_budgets, "random-search budgets, comma separated");
  lodo->add_option("--reps", evaluate_args.reps, "random-search repetitions");
  lodo->add_option("--seed", evaluate_args.seed, "master seed");
  lodo->add_option("--out", evaluate_args.out, "output report JSON")->required();
  lodo->callback([&] { run_evaluate_lodo(evaluate_args); });

  // stats ranks
  auto* stats = app.add_subcommand("stats", "rank statistics over a report");
  stats->require_subcommand(1);
  std::string report_path, plot_out;
  auto* ranks = stats->add_subcommand("ranks", "print average ranks, Friedman test and Nemenyi CD");
  ranks->add_option("--report", report_path, "report JSON")->required();
  ranks->add_option("--out", plot_out, "optional plot-data CSV");
  ranks->callback([&] { run_stats_ranks(report_path, plot_out); });

  // pipeline
  PipelineArgs pipeline_args;
  auto* pipeline = app.add_subcommand("pipeline", "runs + space -> matrix, defaults, report");
  pipeline->add_option("--runs", pipeline_args.runs, "runs CSV")->required();
  pipeline->add_option("--space", pipeline_args.space, "space spec JSON")->required();
  pipeline->add_option("--out-dir", pipeline_args.out_dir, "output directory")->required();
  pipeline->add_option("--solver", pipeline_args.solver, "greedy|exact|both");
  pipeline->add_option("--agg", pipeline_args.agg, "aggregator");
  pipeline->add_option("--n", pipeline_args.n_list, "default-set sizes, comma separated");
  pipeline->add_option("--pool", pipeline_args.pool, "candidate pool: random:<M>[:<seed>] or grid:<g>");
  pipeline->add_option("--k", pipeline_args.k, "surrogate neighbor count");
  pipeline->add_option("--rs-budgets", pipeline_args.rs_budgets, "random-search budgets");
  pipeline->add_option("--reps", pipeline_args.reps, "random-search repetitions");
  pipeline->add_option("--seed", pipeline_args.seed, "master seed");
  pipeline->add_option("--time-limit", pipeline_args.time_limit, "exact-solver time limit in seconds");
  pipeline->add_option("--exact-n", pipeline_args.exact_n,
                       "set size for the exact solver (0 = largest tractable n from --n)");
  pipeline->add_flag("--lower-is-better", pipeline_args.lower_is_better,
                     "measure is already a risk (no negation)");
  pipeline->callback([&] { run_pipeline_cmd(pipeline_args); });

  // demo
  dm::DemoConfig demo_config;
  std::string demo_out;
  auto* demo = app.add_subcommand("demo", "generate a synthetic corpus and run the pipeline on it");
  demo->add_option("--out-dir", demo_out, "output directory")->required();
  demo->add_option("--seed", demo_config.seed, "corpus seed");
  demo->callback([&] {
    demo_config.out_dir = demo_out;
    const dm::PipelineArtifacts artifacts = dm::run_demo(demo_config);
    for (const auto& path : artifacts.written) std::cout << "wrote " << path.string() << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

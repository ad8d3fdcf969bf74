#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>
#include <vector>

#include "defaultminer/greedy.hpp"
#include "defaultminer/io.hpp"
#include "defaultminer/random.hpp"
#include "defaultminer/synthetic.hpp"

using namespace defaultminer;

namespace {

std::filesystem::path temp_dir() {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "defaultminer-io-tests";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("format_double round-trips doubles bit-exactly") {
  SplitMix64 rng(179);
  for (int trial = 0; trial < 2000; ++trial) {
    double value;
    if (trial % 3 == 0) {
      value = (rng.next_double() - 0.5) * 1e6;
    } else if (trial % 3 == 1) {
      value = (rng.next_double() - 0.5) * 1e-6;
    } else {
      value = std::exp2(static_cast<double>(static_cast<int>(rng.next_below(60)) - 30)) *
              (rng.next_double() - 0.5);
    }
    CHECK(parse_double(format_double(value), "test") == value);
  }
}

TEST_CASE("matrix round-trips bit-exactly with provenance and configurations") {
  SplitMix64 rng(181);
  const SyntheticCorpus corpus = make_synthetic_corpus({.num_datasets = 3, .grid_per_dim = 3});
  const RiskMatrix standardized = standardize_per_dataset(corpus.matrix);

  const std::filesystem::path path = temp_dir() / "matrix.csv";
  write_matrix(path, standardized, &corpus.space);
  const LoadedMatrix loaded = read_matrix_with_space(path);

  CHECK(loaded.matrix.risks() == standardized.risks());
  CHECK(loaded.matrix.dataset_ids() == standardized.dataset_ids());
  CHECK(loaded.matrix.provenance() == MatrixProvenance::kStandardized);
  REQUIRE(loaded.space.has_value());
  CHECK(*loaded.space == corpus.space);
  REQUIRE(loaded.matrix.configurations().size() == standardized.configurations().size());
  for (std::size_t m = 0; m < standardized.configurations().size(); ++m) {
    CHECK(loaded.matrix.configurations()[m].values == standardized.configurations()[m].values);
  }
}

TEST_CASE("matrix csv without a sidecar still loads") {
  const std::filesystem::path path = temp_dir() / "bare.csv";
  write_text_atomic(path, "dataset_id,0,1\nd0,0.5,-0.25\n");
  std::filesystem::remove(matrix_sidecar_path(path));
  const RiskMatrix matrix = read_matrix(path);
  CHECK(matrix.num_datasets() == 1);
  CHECK(matrix.at(0, 1) == -0.25);
  CHECK(matrix.provenance() == MatrixProvenance::kRaw);
}

TEST_CASE("matrix csv errors carry line numbers") {
  const std::filesystem::path path = temp_dir() / "broken.csv";
  write_text_atomic(path, "dataset_id,0,1\nd0,0.5\n");
  std::filesystem::remove(matrix_sidecar_path(path));
  CHECK_THROWS_WITH(read_matrix(path), Catch::Contains("line 2"));
  write_text_atomic(path, "dataset_id,0\nd0,zebra\n");
  CHECK_THROWS_WITH(read_matrix(path), Catch::Contains("bad number"));
}

TEST_CASE("default set round-trips exactly") {
  const SyntheticCorpus corpus = make_synthetic_corpus({.num_datasets = 4, .grid_per_dim = 3});
  const RiskMatrix standardized = standardize_per_dataset(corpus.matrix);
  const DefaultSet set = greedy_select(standardized, 4, AggregatorSpec::Median());

  const std::filesystem::path path = temp_dir() / "defaults.json";
  write_default_set(path, set);
  const DefaultSet loaded = read_default_set(path);

  CHECK(loaded.indices == set.indices);
  CHECK(loaded.prefix_risks == set.prefix_risks);
  CHECK(loaded.agg == set.agg);
  CHECK(loaded.source == set.source);
  REQUIRE(loaded.configurations.size() == set.configurations.size());
  for (std::size_t i = 0; i < set.configurations.size(); ++i) {
    CHECK(loaded.configurations[i].values == set.configurations[i].values);
  }
}

TEST_CASE("negative standardized risks survive the round trip") {
  DefaultSet set;
  set.indices = {2, 0};
  set.prefix_risks = {-0.12345678901234567, -1.9999999999999998};
  set.agg = AggregatorSpec::Quantile(0.25);
  set.source = DefaultSetSource::kBruteForce;
  const std::filesystem::path path = temp_dir() / "negative.json";
  write_default_set(path, set);
  const DefaultSet loaded = read_default_set(path);
  CHECK(loaded.prefix_risks == set.prefix_risks);
  CHECK(loaded.agg == set.agg);
}

TEST_CASE("format-version mismatches are explicit errors") {
  const std::filesystem::path path = temp_dir() / "future.json";
  write_text_atomic(path,
                    R"({"format_version": 2, "source": "greedy", "aggregator": "median",
                        "indices": [0], "prefix_risks": [0.0]})");
  CHECK_THROWS_WITH(read_default_set(path), Catch::Contains("format_version 2"));

  const std::filesystem::path report_path = temp_dir() / "future_report.json";
  write_text_atomic(report_path, R"({"format_version": 2})");
  CHECK_THROWS_WITH(read_report(report_path), Catch::Contains("format_version 2"));
}

TEST_CASE("runs csv round-trips through the synthetic corpus") {
  const SyntheticCorpus corpus = make_synthetic_corpus({.num_datasets = 3, .grid_per_dim = 3});
  const std::filesystem::path path = temp_dir() / "runs.csv";
  write_runs_csv(path, corpus.space, corpus.runs);
  const std::vector<RunRecord> loaded = read_runs_csv(path, corpus.space, true);
  REQUIRE(loaded.size() == corpus.runs.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].dataset_id == corpus.runs[i].dataset_id);
    CHECK(loaded[i].values == corpus.runs[i].values);
    CHECK(loaded[i].measure == corpus.runs[i].measure);
    CHECK(loaded[i].value == corpus.runs[i].value);
  }
  // the ingested matrix reproduces the generator's matrix exactly
  const RiskMatrix ingested = ingest_runs(loaded, corpus.space);
  CHECK(ingested.risks() == corpus.matrix.risks());
}

TEST_CASE("runs csv validates its header and rows") {
  const SyntheticCorpus corpus = make_synthetic_corpus({.num_datasets = 2, .grid_per_dim = 2});
  const std::filesystem::path path = temp_dir() / "bad_runs.csv";
  write_text_atomic(path, "dataset_id,gamma,wrong,measure,value\nd0,1,1,m,0.5\n");
  CHECK_THROWS_WITH(read_runs_csv(path, corpus.space, true),
                    Catch::Contains("unknown dimension column"));
  write_text_atomic(path, "dataset_id,gamma,cost,measure,value\nd0,1\n");
  CHECK_THROWS_WITH(read_runs_csv(path, corpus.space, true),
                    Catch::Contains("line 2") && Catch::Contains("fields"));
}

TEST_CASE("csv fields with commas and quotes survive") {
  const HyperparameterSpace space({Dimension{
      "kernel", DimensionKind::kCategorical, 0.0, 0.0, {"a,b", "c\"d"}, DimensionScale::kLinear}});
  std::vector<RunRecord> records = {
      {"data,set", {ConfigValue{std::string("a,b")}}, "m", 0.5, true},
      {"data,set", {ConfigValue{std::string("c\"d")}}, "m", 0.25, true},
  };
  const std::filesystem::path path = temp_dir() / "quoted.csv";
  write_runs_csv(path, space, records);
  const std::vector<RunRecord> loaded = read_runs_csv(path, space, true);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].dataset_id == "data,set");
  CHECK(loaded[0].values == records[0].values);
  CHECK(loaded[1].values == records[1].values);
}

TEST_CASE("report round-trips") {
  const SyntheticCorpus corpus = make_synthetic_corpus({.num_datasets = 5, .grid_per_dim = 3});
  const RiskMatrix matrix = standardize_per_dataset(corpus.matrix);
  const std::vector<int> n_values = {1, 2, 4};
  std::vector<StrategyResult> strategies =
      lodo_evaluate(matrix, n_values, AggregatorSpec::Median());
  strategies.push_back(random_search_baseline(matrix, 4, 1, 10));
  const EvaluationReport report = build_report(matrix, std::move(strategies));

  const std::filesystem::path path = temp_dir() / "report.json";
  write_report(path, report);
  const EvaluationReport loaded = read_report(path);

  CHECK(loaded.dataset_ids == report.dataset_ids);
  REQUIRE(loaded.num_strategies() == report.num_strategies());
  for (std::size_t s = 0; s < report.num_strategies(); ++s) {
    CHECK(loaded.strategies[s].label == report.strategies[s].label);
    CHECK(loaded.strategies[s].achieved == report.strategies[s].achieved);
    CHECK(loaded.strategies[s].normalized == report.strategies[s].normalized);
  }
  CHECK(loaded.average_ranks == report.average_ranks);
  REQUIRE(loaded.friedman.has_value());
  CHECK(loaded.friedman->statistic == report.friedman->statistic);
  CHECK(loaded.nemenyi_cd == report.nemenyi_cd);
}

TEST_CASE("atomic writes leave no temporary behind") {
  const std::filesystem::path path = temp_dir() / "atomic.txt";
  write_text_atomic(path, "payload");
  CHECK(read_text(path) == "payload");
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
}

#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "defaultminer/random.hpp"
#include "defaultminer/risk_matrix.hpp"

using namespace defaultminer;

namespace {

HyperparameterSpace one_dim_space() {
  return HyperparameterSpace({Dimension{"x", DimensionKind::kContinuous, 0.0, 10.0, {}, DimensionScale::kLinear}});
}

RunRecord run(const std::string& dataset, double x, double value, bool higher_is_better = true,
              const std::string& measure = "accuracy") {
  return RunRecord{dataset, {ConfigValue{x}}, measure, value, higher_is_better};
}

}  // namespace

TEST_CASE("ingest_runs negates higher-is-better measures") {
  const HyperparameterSpace space = one_dim_space();
  const std::vector<RunRecord> records = {
      run("d1", 1.0, 0.9), run("d1", 2.0, 0.5), run("d1", 3.0, 0.1),
      run("d2", 1.0, 0.1), run("d2", 2.0, 0.5), run("d2", 3.0, 0.9),
  };
  const RiskMatrix matrix = ingest_runs(records, space);
  REQUIRE(matrix.num_datasets() == 2);
  REQUIRE(matrix.num_configurations() == 3);
  CHECK(matrix.at(0, 0) == -0.9);
  CHECK(matrix.at(0, 1) == -0.5);
  CHECK(matrix.at(0, 2) == -0.1);
  CHECK(matrix.at(1, 0) == -0.1);
  CHECK(matrix.at(1, 2) == -0.9);
  CHECK(matrix.provenance() == MatrixProvenance::kRaw);
}

TEST_CASE("ingest_runs averages duplicate observations") {
  const HyperparameterSpace space = one_dim_space();
  const std::vector<RunRecord> records = {
      run("d1", 1.0, 0.4, false, "loss"), run("d1", 1.0, 0.6, false, "loss"),
      run("d1", 2.0, 1.0, false, "loss"), run("d2", 1.0, 1.0, false, "loss"),
      run("d2", 2.0, 1.0, false, "loss"),
  };
  const RiskMatrix matrix = ingest_runs(records, space);
  CHECK(matrix.at(0, 0) == 0.5);
}

TEST_CASE("ingest_runs reports missing pairs and mixed measures") {
  const HyperparameterSpace space = one_dim_space();
  std::vector<RunRecord> records = {
      run("d1", 1.0, 0.1), run("d1", 2.0, 0.2), run("d1", 3.0, 0.3),
      run("d2", 1.0, 0.1), run("d2", 2.0, 0.2),
  };
  // dataset d2 never saw configuration index 2
  CHECK_THROWS_WITH(ingest_runs(records, space),
                    Catch::Contains("missing") && Catch::Contains("(d2, 2)"));

  records.push_back(run("d2", 3.0, 0.3, true, "auc"));
  CHECK_THROWS_WITH(ingest_runs(records, space), Catch::Contains("mixed measure names"));
}

TEST_CASE("ingest_runs assigns column indices in first-seen order") {
  const HyperparameterSpace space = one_dim_space();
  const std::vector<RunRecord> records = {
      run("d1", 5.0, 0.1), run("d1", 1.0, 0.2), run("d2", 1.0, 0.3), run("d2", 5.0, 0.4),
  };
  const RiskMatrix a = ingest_runs(records, space);
  const RiskMatrix b = ingest_runs(records, space);
  CHECK(a.configurations()[0].values == std::vector<ConfigValue>{ConfigValue{5.0}});
  CHECK(a.configurations()[1].values == std::vector<ConfigValue>{ConfigValue{1.0}});
  CHECK(a.risks() == b.risks());
}

TEST_CASE("sign flip round-trips exactly") {
  SplitMix64 rng(7);
  const HyperparameterSpace space = one_dim_space();
  for (int trial = 0; trial < 50; ++trial) {
    const double value = 2.0 * rng.next_double() - 1.0;
    std::vector<RunRecord> records = {run("d1", 1.0, value), run("d1", 2.0, 0.0),
                                      run("d2", 1.0, 0.0), run("d2", 2.0, value)};
    const RiskMatrix matrix = ingest_runs(records, space);
    CHECK(-matrix.at(0, 0) == value);
    CHECK(-matrix.at(1, 1) == value);
  }
}

TEST_CASE("standardize_per_dataset matches hand-computed rows") {
  const RiskMatrix matrix = RiskMatrix::FromValues(3, 3,
                                                   {1.0, 2.0, 3.0,
                                                    5.0, 5.0, 5.0,
                                                    0.0, 10.0, 10.0});
  const RiskMatrix standardized = standardize_per_dataset(matrix);
  CHECK(standardized.provenance() == MatrixProvenance::kStandardized);
  // population std of [1,2,3] is sqrt(2/3)
  CHECK(standardized.at(0, 0) == Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(standardized.at(0, 1) == Approx(0.0).margin(1e-15));
  CHECK(standardized.at(0, 2) == Approx(1.224744871391589).epsilon(1e-12));
  // zero-variance row maps to zeros
  CHECK(standardized.at(1, 0) == 0.0);
  CHECK(standardized.at(1, 1) == 0.0);
  CHECK(standardized.at(1, 2) == 0.0);
}

TEST_CASE("standardize_per_dataset two-point row") {
  const RiskMatrix matrix = RiskMatrix::FromValues(1, 2, {0.0, 10.0});
  const RiskMatrix standardized = standardize_per_dataset(matrix);
  CHECK(standardized.at(0, 0) == -1.0);
  CHECK(standardized.at(0, 1) == 1.0);
}

TEST_CASE("standardize_per_dataset guards provenance and width") {
  const RiskMatrix matrix = RiskMatrix::FromValues(1, 2, {0.0, 1.0});
  const RiskMatrix standardized = standardize_per_dataset(matrix);
  CHECK_THROWS_WITH(standardize_per_dataset(standardized), Catch::Contains("raw"));
  const RiskMatrix narrow = RiskMatrix::FromValues(2, 1, {0.0, 1.0});
  CHECK_THROWS_WITH(standardize_per_dataset(narrow), Catch::Contains("at least 2"));
}

TEST_CASE("standardized rows have mean 0 and population std 1") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t cols = 2 + rng.next_below(30);
    std::vector<double> values(cols);
    for (double& v : values) v = 10.0 * rng.next_double() - 5.0;
    values[0] += 1.0;  // guarantee spread
    const std::vector<double> z = standardize_values(values);
    double mean = 0.0, var = 0.0;
    for (double v : z) mean += v;
    mean /= static_cast<double>(cols);
    for (double v : z) var += (v - mean) * (v - mean);
    var /= static_cast<double>(cols);
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
  }
}

TEST_CASE("standardize is idempotent on its own output") {
  SplitMix64 rng(13);
  std::vector<double> values(12);
  for (double& v : values) v = rng.next_double() * 4.0 - 2.0;
  const std::vector<double> once = standardize_values(values);
  const std::vector<double> twice = standardize_values(once);
  for (std::size_t i = 0; i < values.size(); ++i) {
    CHECK(twice[i] == Approx(once[i]).margin(1e-12));
  }
}

TEST_CASE("unit_normalize_per_dataset maps rows onto [0, 1]") {
  Matrix scores(3, 3, {0.2, 0.6, 1.0,
                       3.0, 3.0, 3.0,
                       -1.0, 0.0, 3.0});
  const Matrix normalized = unit_normalize_per_dataset(scores);
  CHECK(normalized.at(0, 0) == 0.0);
  CHECK(normalized.at(0, 1) == Approx(0.5));
  CHECK(normalized.at(0, 2) == 1.0);
  CHECK(normalized.at(1, 0) == 0.5);  // constant-row convention
  CHECK(normalized.at(1, 2) == 0.5);
  CHECK(normalized.at(2, 0) == 0.0);
  CHECK(normalized.at(2, 1) == Approx(0.25));
  CHECK(normalized.at(2, 2) == 1.0);

  const Matrix again = unit_normalize_per_dataset(normalized);
  for (std::size_t i = 0; i < again.values.size(); ++i) {
    CHECK(again.values[i] == Approx(normalized.values[i]).margin(1e-12));
  }
}

TEST_CASE("risk matrix rejects non-finite entries") {
  CHECK_THROWS_WITH(RiskMatrix::FromValues(1, 2, {0.0, std::nan("")}),
                    Catch::Contains("non-finite"));
}

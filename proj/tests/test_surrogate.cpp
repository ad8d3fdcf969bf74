#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "defaultminer/random.hpp"
#include "defaultminer/surrogate.hpp"

using namespace defaultminer;

namespace {

HyperparameterSpace svm_space() {
  return HyperparameterSpace({
      Dimension{"gamma", DimensionKind::kContinuous, std::exp2(-15.0), std::exp2(3.0), {},
                DimensionScale::kLog2},
      Dimension{"cost", DimensionKind::kContinuous, std::exp2(-5.0), std::exp2(15.0), {},
                DimensionScale::kLog2},
  });
}

HyperparameterSpace mixed_space() {
  return HyperparameterSpace({
      Dimension{"lr", DimensionKind::kContinuous, 0.001, 1.0, {}, DimensionScale::kLog2},
      Dimension{"depth", DimensionKind::kInteger, 1.0, 16.0, {}, DimensionScale::kLinear},
      Dimension{"kernel", DimensionKind::kCategorical, 0.0, 0.0, {"rbf", "poly", "sigmoid"},
                DimensionScale::kLinear},
  });
}

Configuration random_config(const HyperparameterSpace& space, SplitMix64& rng) {
  return sample_candidates(space, 1, rng.next()).configurations.front();
}

}  // namespace

TEST_CASE("config_distance is zero at identity and one across the range") {
  const HyperparameterSpace gamma_only = HyperparameterSpace({
      Dimension{"gamma", DimensionKind::kContinuous, std::exp2(-15.0), std::exp2(3.0), {},
                DimensionScale::kLog2}});
  const Configuration low{0, {std::exp2(-15.0)}};
  const Configuration high{1, {std::exp2(3.0)}};
  CHECK(config_distance(gamma_only, low, low) == 0.0);
  CHECK(config_distance(gamma_only, low, high) == 1.0);

  const HyperparameterSpace cat = HyperparameterSpace({
      Dimension{"kernel", DimensionKind::kCategorical, 0.0, 0.0, {"a", "b"},
                DimensionScale::kLinear}});
  const Configuration a{0, {std::string("a")}};
  const Configuration b{1, {std::string("b")}};
  CHECK(config_distance(cat, a, b) == 1.0);
  CHECK_THROWS(config_distance(cat, a, Configuration{2, {1.0}}));
}

TEST_CASE("config_distance satisfies the metric axioms") {
  const HyperparameterSpace space = mixed_space();
  SplitMix64 rng(97);
  for (int trial = 0; trial < 1000; ++trial) {
    const Configuration a = random_config(space, rng);
    const Configuration b = random_config(space, rng);
    const Configuration c = random_config(space, rng);
    const double ab = config_distance(space, a, b);
    const double ba = config_distance(space, b, a);
    const double ac = config_distance(space, a, c);
    const double cb = config_distance(space, c, b);
    CHECK(ab == ba);
    CHECK(config_distance(space, a, a) == 0.0);
    CHECK(ab >= 0.0);
    CHECK(ab <= ac + cb + 1e-12);
    CHECK(ab <= std::sqrt(static_cast<double>(space.size())) + 1e-12);
  }
}

TEST_CASE("fit_surrogate clamps k and rejects empty input") {
  const HyperparameterSpace space = svm_space();
  SplitMix64 rng(101);
  std::vector<Configuration> configs;
  std::vector<double> risks;
  for (int i = 0; i < 10; ++i) {
    configs.push_back(random_config(space, rng));
    risks.push_back(rng.next_double());
  }
  const SurrogateModel model = fit_surrogate("d", space, configs, risks, 25);
  CHECK(model.k == 10);
  const SurrogateModel wide = fit_surrogate("d", space, configs, risks, 3);
  CHECK(wide.k == 3);
  CHECK_THROWS(fit_surrogate("d", space, {}, {}, 25));
  CHECK_THROWS(fit_surrogate("d", space, configs, risks, 0));
}

TEST_CASE("a single training point predicts itself everywhere") {
  const HyperparameterSpace space = svm_space();
  SplitMix64 rng(103);
  const Configuration node = random_config(space, rng);
  const SurrogateModel model = fit_surrogate("d", space, {node}, std::vector<double>{-0.7}, 25);
  for (int i = 0; i < 10; ++i) {
    CHECK(predict_risk(model, random_config(space, rng)) == -0.7);
  }
}

TEST_CASE("predict_risk interpolates training nodes") {
  const HyperparameterSpace space = svm_space();
  SplitMix64 rng(107);
  std::vector<Configuration> configs;
  std::vector<double> risks;
  for (int i = 0; i < 40; ++i) {
    configs.push_back(random_config(space, rng));
    risks.push_back(2.0 * rng.next_double() - 1.0);
  }
  const SurrogateModel model = fit_surrogate("d", space, configs, risks, 25);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    CHECK(predict_risk(model, configs[i]) == Approx(risks[i]).margin(1e-9));
  }
}

TEST_CASE("predict_risk averages equidistant neighbors and collapses to 1-NN") {
  const HyperparameterSpace line = HyperparameterSpace({
      Dimension{"x", DimensionKind::kContinuous, 0.0, 1.0, {}, DimensionScale::kLinear}});
  const std::vector<Configuration> nodes = {{0, {0.0}}, {1, {1.0}}};
  const SurrogateModel two = fit_surrogate("d", line, nodes, std::vector<double>{0.0, 1.0}, 2);
  CHECK(predict_risk(two, Configuration{2, {0.5}}) == Approx(0.5));

  const SurrogateModel nearest = fit_surrogate("d", line, nodes, std::vector<double>{0.0, 1.0}, 1);
  // oracle: plain linear scan for the closest node
  CHECK(predict_risk(nearest, Configuration{2, {0.2}}) == 0.0);
  CHECK(predict_risk(nearest, Configuration{2, {0.8}}) == 1.0);
}

TEST_CASE("predictions stay within the training risk range") {
  const HyperparameterSpace space = mixed_space();
  SplitMix64 rng(109);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Configuration> configs;
    std::vector<double> risks;
    const int count = 2 + static_cast<int>(rng.next_below(30));
    for (int i = 0; i < count; ++i) {
      configs.push_back(random_config(space, rng));
      risks.push_back(4.0 * rng.next_double() - 2.0);
    }
    const SurrogateModel model =
        fit_surrogate("d", space, configs, risks, 1 + static_cast<int>(rng.next_below(10)));
    const double lo = *std::min_element(risks.begin(), risks.end());
    const double hi = *std::max_element(risks.begin(), risks.end());
    for (int q = 0; q < 20; ++q) {
      const double prediction = predict_risk(model, random_config(space, rng));
      CHECK(prediction >= lo - 1e-12);
      CHECK(prediction <= hi + 1e-12);
    }
  }
}

TEST_CASE("sample_candidates is reproducible and respects bounds") {
  const HyperparameterSpace space = svm_space();
  const CandidatePool a = sample_candidates(space, 256, 42);
  const CandidatePool b = sample_candidates(space, 256, 42);
  REQUIRE(a.configurations.size() == 256);
  for (std::size_t i = 0; i < a.configurations.size(); ++i) {
    CHECK(a.configurations[i].values == b.configurations[i].values);
    const double gamma = std::get<double>(a.configurations[i].values[0]);
    CHECK(gamma >= std::exp2(-15.0));
    CHECK(gamma <= std::exp2(3.0));
    CHECK_NOTHROW(validate_configuration(space, a.configurations[i]));
  }
  const CandidatePool c = sample_candidates(space, 256, 43);
  CHECK(a.configurations.front().values != c.configurations.front().values);
  CHECK(sample_candidates(space, 1, 7).configurations.size() == 1);
  CHECK_THROWS(sample_candidates(space, 0, 7));
}

TEST_CASE("sample_candidates covers integer and categorical dimensions") {
  const HyperparameterSpace space = mixed_space();
  const CandidatePool pool = sample_candidates(space, 200, 11);
  for (const Configuration& config : pool.configurations) {
    CHECK_NOTHROW(validate_configuration(space, config));
    const double depth = std::get<double>(config.values[1]);
    CHECK(depth == std::floor(depth));
  }
}

TEST_CASE("grid_candidates reproduces the 16x16 discretization") {
  const HyperparameterSpace space = svm_space();
  const CandidatePool grid = grid_candidates(space, 16);
  REQUIRE(grid.configurations.size() == 256);
  // corners of the grid hit the bounds exactly
  CHECK(std::get<double>(grid.configurations.front().values[0]) == Approx(std::exp2(-15.0)));
  CHECK(std::get<double>(grid.configurations.front().values[1]) == Approx(std::exp2(-5.0)));
  CHECK(std::get<double>(grid.configurations.back().values[0]) == Approx(std::exp2(3.0)));
  CHECK(std::get<double>(grid.configurations.back().values[1]) == Approx(std::exp2(15.0)));
  for (const Configuration& config : grid.configurations) {
    CHECK_NOTHROW(validate_configuration(space, config));
  }
  // log spacing: consecutive gamma axis values share one ratio
  const double g0 = std::get<double>(grid.configurations[0].values[0]);
  const double g1 = std::get<double>(grid.configurations[16].values[0]);
  const double g2 = std::get<double>(grid.configurations[32].values[0]);
  CHECK(g1 / g0 == Approx(g2 / g1));
}

TEST_CASE("grid_candidates includes every categorical level") {
  const HyperparameterSpace space = mixed_space();
  const CandidatePool grid = grid_candidates(space, 4);
  CHECK(grid.configurations.size() == 4 * 4 * 3);
}

TEST_CASE("build_surrogate_matrix evaluates every model on the pool") {
  const HyperparameterSpace space = svm_space();
  SplitMix64 rng(113);

  // shared training grid; pool equals the training configurations
  const CandidatePool nodes = grid_candidates(space, 4);
  std::vector<SurrogateModel> models;
  std::vector<std::vector<double>> risks(2);
  for (int d = 0; d < 2; ++d) {
    for (std::size_t i = 0; i < nodes.configurations.size(); ++i) {
      risks[d].push_back(2.0 * rng.next_double() - 1.0);
    }
    models.push_back(fit_surrogate("d" + std::to_string(d), space, nodes.configurations,
                                   risks[d], 25));
  }
  const RiskMatrix at_nodes = build_surrogate_matrix(models, nodes);
  CHECK(at_nodes.provenance() == MatrixProvenance::kSurrogate);
  REQUIRE(at_nodes.num_datasets() == 2);
  REQUIRE(at_nodes.num_configurations() == nodes.configurations.size());
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t m = 0; m < nodes.configurations.size(); ++m) {
      CHECK(at_nodes.at(k, m) == Approx(risks[k][m]).margin(1e-9));
    }
  }

  // a single-point model yields a constant row
  const SurrogateModel constant = fit_surrogate(
      "c", space, {nodes.configurations.front()}, std::vector<double>{0.25}, 25);
  const CandidatePool pool = sample_candidates(space, 3, 5);
  const RiskMatrix constant_row = build_surrogate_matrix({constant}, pool);
  for (std::size_t m = 0; m < 3; ++m) CHECK(constant_row.at(0, m) == 0.25);

  // 2 models x 256-point pool
  const CandidatePool big = sample_candidates(space, 256, 9);
  const RiskMatrix wide = build_surrogate_matrix(models, big);
  CHECK(wide.num_datasets() == 2);
  CHECK(wide.num_configurations() == 256);

  const HyperparameterSpace other = mixed_space();
  const SurrogateModel mismatched =
      fit_surrogate("x", other, {grid_candidates(other, 2).configurations.front()},
                    std::vector<double>{0.0}, 25);
  CHECK_THROWS_WITH(build_surrogate_matrix({models[0], mismatched}, pool),
                    Catch::Contains("space"));
}

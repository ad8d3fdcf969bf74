#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "defaultminer/random.hpp"
#include "defaultminer/risk_matrix.hpp"
#include "defaultminer/space.hpp"
#include "defaultminer/surrogate.hpp"

namespace defaultminer {

// Knobs for the bundled synthetic corpus: K random 2-D quadratic risk bowls
// over an SVM-like (gamma, cost) space, discretized on a g x g grid. The bowl
// centers scatter around one shared optimum, so the datasets have the common
// structure that learned defaults can exploit; `center_spread` and `noise`
// control how strong that structure is.
struct SyntheticSpec {
  int num_datasets = 20;
  int grid_per_dim = 8;
  std::uint64_t seed = 1;
  double center_spread = 0.15;
  double noise = 0.05;
  std::string measure = "score";  // emitted higher-is-better, negated at ingestion
};

struct SyntheticCorpus {
  HyperparameterSpace space;
  RiskMatrix matrix;            // raw risks, datasets x grid cells
  std::vector<RunRecord> runs;  // the same data as ingestable run records
};

inline SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec = {}) {
  HyperparameterSpace space(std::vector<Dimension>{
      {"gamma", DimensionKind::kContinuous, std::exp2(-15.0), std::exp2(3.0), {},
       DimensionScale::kLog2},
      {"cost", DimensionKind::kContinuous, std::exp2(-5.0), std::exp2(15.0), {},
       DimensionScale::kLog2},
  });
  const CandidatePool grid = grid_candidates(space, spec.grid_per_dim);
  const std::size_t num_cells = grid.configurations.size();

  std::vector<std::vector<double>> encoded;
  encoded.reserve(num_cells);
  for (const Configuration& config : grid.configurations) {
    encoded.push_back(encode_configuration(space, config));
  }

  SplitMix64 rng(spec.seed);
  const double shared_u = 0.3 + 0.4 * rng.next_double();
  const double shared_v = 0.3 + 0.4 * rng.next_double();

  std::vector<std::string> dataset_ids;
  std::vector<double> risks;
  risks.reserve(static_cast<std::size_t>(spec.num_datasets) * num_cells);
  std::vector<RunRecord> runs;
  runs.reserve(risks.capacity());

  for (int k = 0; k < spec.num_datasets; ++k) {
    const std::string dataset_id = "synth-" + std::to_string(k);
    dataset_ids.push_back(dataset_id);
    const double cu = std::clamp(shared_u + spec.center_spread * (2.0 * rng.next_double() - 1.0),
                                 0.0, 1.0);
    const double cv = std::clamp(shared_v + spec.center_spread * (2.0 * rng.next_double() - 1.0),
                                 0.0, 1.0);
    const double amplitude = 0.75 + 0.5 * rng.next_double();
    const double anisotropy = 0.5 + 1.5 * rng.next_double();
    for (std::size_t m = 0; m < num_cells; ++m) {
      const double du = encoded[m][0] - cu;
      const double dv = encoded[m][1] - cv;
      const double risk = amplitude * (du * du + anisotropy * dv * dv) +
                          spec.noise * (2.0 * rng.next_double() - 1.0);
      risks.push_back(risk);
      runs.push_back(RunRecord{dataset_id, grid.configurations[m].values, spec.measure, -risk,
                               /*higher_is_better=*/true});
    }
  }

  RiskMatrix matrix(std::move(dataset_ids), grid.configurations,
                    Matrix(static_cast<std::size_t>(spec.num_datasets), num_cells,
                           std::move(risks)),
                    MatrixProvenance::kRaw);
  return SyntheticCorpus{std::move(space), std::move(matrix), std::move(runs)};
}

}  // namespace defaultminer

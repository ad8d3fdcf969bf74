#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "defaultminer/parallel.hpp"
#include "defaultminer/random.hpp"
#include "defaultminer/risk_matrix.hpp"
#include "defaultminer/space.hpp"

namespace defaultminer {

// Distance between two configurations in the normalized encoding: Euclidean
// over per-dimension contributions, where numeric dimensions are min-max
// scaled to [0, 1] (after log2 transform for log2 dims) and categorical
// dimensions contribute 0 when equal and 1 otherwise. Range is [0, sqrt(D)].
inline double config_distance(const HyperparameterSpace& space, const Configuration& a,
                              const Configuration& b) {
  validate_configuration(space, a);
  validate_configuration(space, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Dimension& dim = space.dimension(i);
    if (dim.numeric()) {
      const double d = encode_value(dim, a.values[i]) - encode_value(dim, b.values[i]);
      sum += d * d;
    } else {
      sum += (a.values[i] == b.values[i]) ? 0.0 : 1.0;
    }
  }
  return std::sqrt(sum);
}

// Per-dataset distance-weighted k-NN regressor over normalized configuration
// encodings. Chosen over iteratively fitted model classes because it is
// deterministic, trains in O(1), interpolates its nodes and never predicts
// outside the training risk range.
struct SurrogateModel {
  std::string dataset_id;
  HyperparameterSpace space;
  std::vector<std::vector<double>> points;  // encoded training configurations
  std::vector<double> risks;                // standardized training risks
  int k = 25;
  double epsilon = 1e-12;  // distance floor in the inverse-distance weights
};

// Fits a surrogate for one dataset. Risks are expected to be standardized
// across the dataset's observed runs. The effective neighbor count is
// min(k, #points).
inline SurrogateModel fit_surrogate(std::string dataset_id, const HyperparameterSpace& space,
                                    const std::vector<Configuration>& configs,
                                    std::span<const double> risks, int k = 25) {
  if (configs.empty()) throw std::invalid_argument("fit_surrogate: no training runs");
  if (configs.size() != risks.size()) {
    throw std::invalid_argument("fit_surrogate: configuration/risk count mismatch");
  }
  if (k < 1) throw std::invalid_argument("fit_surrogate: k must be >= 1");
  SurrogateModel model{std::move(dataset_id), space, {}, {}, k, 1e-12};
  model.points.reserve(configs.size());
  for (const Configuration& config : configs) {
    validate_configuration(space, config);
    model.points.push_back(encode_configuration(space, config));
  }
  for (double r : risks) {
    if (!std::isfinite(r)) throw std::invalid_argument("fit_surrogate: non-finite risk");
  }
  model.risks.assign(risks.begin(), risks.end());
  model.k = std::min<int>(k, static_cast<int>(model.points.size()));
  return model;
}

namespace detail {

inline double encoded_distance(const HyperparameterSpace& space,
                               std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (space.dimension(i).numeric()) {
      const double d = a[i] - b[i];
      sum += d * d;
    } else {
      sum += (a[i] == b[i]) ? 0.0 : 1.0;
    }
  }
  return std::sqrt(sum);
}

}  // namespace detail

// Inverse-distance-weighted mean of the k nearest training risks, with
// weights 1 / (d + epsilon). A query matching a training point exactly
// returns that point's risk (the mean, if several nodes coincide), which
// keeps node interpolation exact instead of merely epsilon-dominated.
// Predictions always lie within the training risk range.
inline double predict_risk(const SurrogateModel& model, const Configuration& config) {
  validate_configuration(model.space, config);
  const std::vector<double> query = encode_configuration(model.space, config);
  const std::size_t count = model.points.size();

  std::vector<double> distance(count);
  double exact_sum = 0.0;
  std::size_t exact_count = 0;
  for (std::size_t i = 0; i < count; ++i) {
    distance[i] = detail::encoded_distance(model.space, query, model.points[i]);
    if (distance[i] == 0.0) {
      exact_sum += model.risks[i];
      ++exact_count;
    }
  }
  if (exact_count > 0) return exact_sum / static_cast<double>(exact_count);

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return distance[a] < distance[b] || (distance[a] == distance[b] && a < b);
  });

  const std::size_t neighbors = std::min<std::size_t>(static_cast<std::size_t>(model.k), count);
  if (neighbors == 1) return model.risks[order[0]];
  double weight_sum = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < neighbors; ++i) {
    const std::size_t idx = order[i];
    const double w = 1.0 / (distance[idx] + model.epsilon);
    weight_sum += w;
    weighted += w * model.risks[idx];
  }
  return weighted / weight_sum;
}

// A sampled slice of the configuration universe, reproducible from its seed.
struct CandidatePool {
  std::vector<Configuration> configurations;
  std::uint64_t seed = 0;
};

// Uniform sampling per dimension: uniform on [low, high] for linear numeric
// dimensions, uniform in log2 space for log2 dimensions, uniform over integers
// or levels otherwise. Identical seeds give bitwise-identical pools.
inline CandidatePool sample_candidates(const HyperparameterSpace& space, int count,
                                       std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_candidates: count must be >= 1");
  SplitMix64 rng(seed);
  CandidatePool pool;
  pool.seed = seed;
  pool.configurations.reserve(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) {
    Configuration config;
    config.id = c;
    config.values.reserve(space.size());
    for (const Dimension& dim : space.dimensions()) {
      if (dim.kind == DimensionKind::kCategorical) {
        config.values.emplace_back(
            dim.levels[rng.next_below(dim.levels.size())]);
        continue;
      }
      const double u = rng.next_double();
      double value;
      if (dim.scale == DimensionScale::kLog2) {
        const double lo = std::log2(dim.low), hi = std::log2(dim.high);
        value = std::exp2(lo + u * (hi - lo));
      } else {
        value = dim.low + u * (dim.high - dim.low);
      }
      if (dim.kind == DimensionKind::kInteger) value = std::floor(value + 0.5);
      value = std::clamp(value, dim.low, dim.high);
      config.values.emplace_back(value);
    }
    pool.configurations.push_back(std::move(config));
  }
  return pool;
}

// Full Cartesian grid with `points_per_dimension` equally spaced values per
// numeric dimension (log-spaced for log2 dimensions, rounded and deduplicated
// for integer ones) and all levels of categorical dimensions. Reproduces
// fine-grid discretizations of the space.
inline CandidatePool grid_candidates(const HyperparameterSpace& space, int points_per_dimension) {
  if (points_per_dimension < 1) {
    throw std::invalid_argument("grid_candidates: need at least 1 point per dimension");
  }
  std::vector<std::vector<ConfigValue>> axes;
  for (const Dimension& dim : space.dimensions()) {
    std::vector<ConfigValue> axis;
    if (dim.kind == DimensionKind::kCategorical) {
      for (const std::string& level : dim.levels) axis.emplace_back(level);
    } else {
      const int g = points_per_dimension;
      for (int i = 0; i < g; ++i) {
        double value;
        const double t = g == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(g - 1);
        if (dim.scale == DimensionScale::kLog2) {
          const double lo = std::log2(dim.low), hi = std::log2(dim.high);
          value = std::exp2(lo + t * (hi - lo));
        } else {
          value = dim.low + t * (dim.high - dim.low);
        }
        if (dim.kind == DimensionKind::kInteger) value = std::floor(value + 0.5);
        value = std::clamp(value, dim.low, dim.high);
        if (dim.kind == DimensionKind::kInteger && !axis.empty() &&
            std::get<double>(axis.back()) == value) {
          continue;  // rounding collapsed adjacent grid points
        }
        axis.emplace_back(value);
      }
    }
    axes.push_back(std::move(axis));
  }

  CandidatePool pool;
  std::vector<std::size_t> idx(axes.size(), 0);
  for (;;) {
    Configuration config;
    config.id = static_cast<int>(pool.configurations.size());
    for (std::size_t d = 0; d < axes.size(); ++d) config.values.push_back(axes[d][idx[d]]);
    pool.configurations.push_back(std::move(config));
    // odometer: last dimension fastest
    std::size_t d = axes.size();
    for (;;) {
      if (d == 0) return pool;
      --d;
      if (++idx[d] < axes[d].size()) break;
      idx[d] = 0;
    }
  }
}

// Dense K x M surrogate-predicted risk matrix: entry (k, m) is model k's
// prediction for pool configuration m. All models must share one space.
inline RiskMatrix build_surrogate_matrix(const std::vector<SurrogateModel>& models,
                                         const CandidatePool& pool) {
  if (models.empty()) throw std::invalid_argument("build_surrogate_matrix: no models");
  if (pool.configurations.empty()) {
    throw std::invalid_argument("build_surrogate_matrix: empty candidate pool");
  }
  for (const SurrogateModel& model : models) {
    if (!(model.space == models.front().space)) {
      throw std::invalid_argument("build_surrogate_matrix: models disagree on the space");
    }
  }
  const std::size_t num_rows = models.size();
  const std::size_t num_cols = pool.configurations.size();
  Matrix risks(num_rows, num_cols);
  std::vector<std::string> ids(num_rows);
  parallel_for(num_rows, [&](std::size_t k) {
    ids[k] = models[k].dataset_id;
    for (std::size_t m = 0; m < num_cols; ++m) {
      risks.at(k, m) = predict_risk(models[k], pool.configurations[m]);
    }
  });
  std::vector<Configuration> configs = pool.configurations;
  for (std::size_t m = 0; m < configs.size(); ++m) configs[m].id = static_cast<int>(m);
  return RiskMatrix(std::move(ids), std::move(configs), std::move(risks),
                    MatrixProvenance::kSurrogate);
}

}  // namespace defaultminer

#pragma once

#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "defaultminer/space.hpp"

namespace defaultminer {

// Minimal dense row-major matrix used for risks, scores and ranks.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> v)
      : rows(r), cols(c), values(std::move(v)) {
    if (values.size() != rows * cols) {
      throw std::invalid_argument("matrix: value count does not match shape");
    }
  }

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols, cols};
  }

  bool operator==(const Matrix&) const = default;
};

enum class MatrixProvenance { kRaw, kStandardized, kSurrogate };

inline const char* provenance_name(MatrixProvenance p) {
  switch (p) {
    case MatrixProvenance::kRaw: return "raw";
    case MatrixProvenance::kStandardized: return "standardized";
    case MatrixProvenance::kSurrogate: return "surrogate";
  }
  return "?";
}

inline MatrixProvenance provenance_from_name(const std::string& name) {
  if (name == "raw") return MatrixProvenance::kRaw;
  if (name == "standardized") return MatrixProvenance::kStandardized;
  if (name == "surrogate") return MatrixProvenance::kSurrogate;
  throw std::invalid_argument("unknown matrix provenance '" + name + "'");
}

// K x M matrix of risks R_k(theta_m): one row per dataset, one column per
// candidate configuration. Risks always follow the lower-is-better
// convention; performance measures are negated at ingestion. Immutable after
// construction.
class RiskMatrix {
 public:
  RiskMatrix(std::vector<std::string> dataset_ids,
             std::vector<Configuration> configurations, Matrix risks,
             MatrixProvenance provenance)
      : dataset_ids_(std::move(dataset_ids)),
        configurations_(std::move(configurations)),
        risks_(std::move(risks)),
        provenance_(provenance) {
    if (dataset_ids_.empty() || configurations_.empty()) {
      throw std::invalid_argument("risk matrix needs at least one dataset and one configuration");
    }
    if (risks_.rows != dataset_ids_.size() || risks_.cols != configurations_.size()) {
      throw std::invalid_argument("risk matrix shape does not match identifiers");
    }
    for (std::size_t k = 0; k < risks_.rows; ++k) {
      for (std::size_t m = 0; m < risks_.cols; ++m) {
        if (!std::isfinite(risks_.at(k, m))) {
          throw std::invalid_argument("risk matrix has a non-finite entry at (" +
                                      std::to_string(k) + ", " + std::to_string(m) + ")");
        }
      }
    }
  }

  // Convenience for synthetic and test matrices: dataset ids d0..d{K-1},
  // value-less configurations 0..M-1.
  static RiskMatrix FromValues(std::size_t num_datasets, std::size_t num_configurations,
                               std::vector<double> values,
                               MatrixProvenance provenance = MatrixProvenance::kRaw) {
    std::vector<std::string> ids;
    ids.reserve(num_datasets);
    for (std::size_t k = 0; k < num_datasets; ++k) ids.push_back("d" + std::to_string(k));
    std::vector<Configuration> configs(num_configurations);
    for (std::size_t m = 0; m < num_configurations; ++m) configs[m].id = static_cast<int>(m);
    return RiskMatrix(std::move(ids), std::move(configs),
                      Matrix(num_datasets, num_configurations, std::move(values)), provenance);
  }

  std::size_t num_datasets() const { return risks_.rows; }
  std::size_t num_configurations() const { return risks_.cols; }
  double at(std::size_t dataset, std::size_t config) const { return risks_.at(dataset, config); }
  std::span<const double> row(std::size_t dataset) const { return risks_.row(dataset); }
  const Matrix& risks() const { return risks_; }
  const std::vector<std::string>& dataset_ids() const { return dataset_ids_; }
  const std::vector<Configuration>& configurations() const { return configurations_; }
  MatrixProvenance provenance() const { return provenance_; }

  // Same data minus one dataset row; used by the leave-one-dataset-out loop.
  RiskMatrix without_row(std::size_t dataset) const {
    if (dataset >= num_datasets()) throw std::out_of_range("without_row: bad dataset index");
    std::vector<std::string> ids;
    Matrix sub(num_datasets() - 1, num_configurations());
    std::size_t r = 0;
    for (std::size_t k = 0; k < num_datasets(); ++k) {
      if (k == dataset) continue;
      ids.push_back(dataset_ids_[k]);
      for (std::size_t m = 0; m < num_configurations(); ++m) sub.at(r, m) = risks_.at(k, m);
      ++r;
    }
    return RiskMatrix(std::move(ids), configurations_, std::move(sub), provenance_);
  }

 private:
  std::vector<std::string> dataset_ids_;
  std::vector<Configuration> configurations_;
  Matrix risks_;
  MatrixProvenance provenance_;
};

// One observed run: a configuration evaluated on a dataset under a named
// measure. Carrier for OpenML-style result tables.
struct RunRecord {
  std::string dataset_id;
  std::vector<ConfigValue> values;
  std::string measure;
  double value = 0.0;
  bool higher_is_better = true;
};

// Builds the raw risk matrix from run records. Measures with
// higher_is_better are negated so lower is always better, duplicate
// (dataset, configuration) observations are averaged, and configurations are
// deduplicated by exact value equality in first-seen order. Every
// (dataset, configuration) pair must be observed at least once.
inline RiskMatrix ingest_runs(const std::vector<RunRecord>& records,
                              const HyperparameterSpace& space) {
  if (records.empty()) throw std::invalid_argument("ingest_runs: no run records");

  const std::string& measure = records.front().measure;
  const bool higher_is_better = records.front().higher_is_better;

  std::vector<std::string> dataset_ids;
  std::map<std::string, std::size_t> dataset_index;
  std::vector<Configuration> configurations;
  std::map<std::vector<ConfigValue>, std::size_t> config_index;

  struct Cell {
    double sum = 0.0;
    std::size_t count = 0;
  };
  std::map<std::pair<std::size_t, std::size_t>, Cell> cells;

  for (const RunRecord& rec : records) {
    if (rec.measure != measure) {
      throw std::invalid_argument("ingest_runs: mixed measure names: '" + measure +
                                  "' vs '" + rec.measure + "'");
    }
    if (rec.higher_is_better != higher_is_better) {
      throw std::invalid_argument("ingest_runs: inconsistent higher_is_better for measure '" +
                                  measure + "'");
    }
    if (!std::isfinite(rec.value)) {
      throw std::invalid_argument("ingest_runs: non-finite measure value for dataset '" +
                                  rec.dataset_id + "'");
    }
    Configuration config{-1, rec.values};
    try {
      validate_configuration(space, config);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("ingest_runs: run for dataset '" + rec.dataset_id +
                                  "': " + e.what());
    }

    auto [dit, dnew] = dataset_index.try_emplace(rec.dataset_id, dataset_ids.size());
    if (dnew) dataset_ids.push_back(rec.dataset_id);
    auto [cit, cnew] = config_index.try_emplace(rec.values, configurations.size());
    if (cnew) {
      config.id = static_cast<int>(configurations.size());
      configurations.push_back(std::move(config));
    }

    Cell& cell = cells[{dit->second, cit->second}];
    cell.sum += higher_is_better ? -rec.value : rec.value;
    cell.count += 1;
  }

  const std::size_t num_datasets = dataset_ids.size();
  const std::size_t num_configs = configurations.size();
  Matrix risks(num_datasets, num_configs);
  std::string missing;
  std::size_t missing_count = 0;
  for (std::size_t k = 0; k < num_datasets; ++k) {
    for (std::size_t m = 0; m < num_configs; ++m) {
      auto it = cells.find({k, m});
      if (it == cells.end()) {
        ++missing_count;
        if (missing_count <= 20) {
          if (!missing.empty()) missing += ", ";
          missing += "(" + dataset_ids[k] + ", " + std::to_string(m) + ")";
        }
        continue;
      }
      risks.at(k, m) = it->second.sum / static_cast<double>(it->second.count);
    }
  }
  if (missing_count > 0) {
    if (missing_count > 20) {
      missing += ", and " + std::to_string(missing_count - 20) + " more";
    }
    throw std::invalid_argument(
        "ingest_runs: incomplete run data; missing (dataset, configuration) pairs: " + missing);
  }

  return RiskMatrix(std::move(dataset_ids), std::move(configurations), std::move(risks),
                    MatrixProvenance::kRaw);
}

// z-standardizes one vector in place semantics-free form: mean 0, population
// standard deviation 1. Zero-variance input maps to all zeros.
inline std::vector<double> standardize_values(std::span<const double> values) {
  const std::size_t n = values.size();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double variance = 0.0;
  for (double v : values) variance += (v - mean) * (v - mean);
  variance /= static_cast<double>(n);
  std::vector<double> out(n, 0.0);
  if (variance > 0.0) {
    const double sd = std::sqrt(variance);
    for (std::size_t i = 0; i < n; ++i) out[i] = (values[i] - mean) / sd;
  }
  return out;
}

// Per-dataset z-standardization: each row is mapped to mean 0 and population
// standard deviation 1. Makes risks commensurable across datasets before any
// learning step; absolute performance information is deliberately lost.
inline RiskMatrix standardize_per_dataset(const RiskMatrix& matrix) {
  if (matrix.provenance() != MatrixProvenance::kRaw) {
    throw std::invalid_argument("standardize_per_dataset needs a raw matrix");
  }
  if (matrix.num_configurations() < 2) {
    throw std::invalid_argument("standardize_per_dataset needs at least 2 configurations");
  }
  Matrix out(matrix.num_datasets(), matrix.num_configurations());
  for (std::size_t k = 0; k < matrix.num_datasets(); ++k) {
    const std::vector<double> row = standardize_values(matrix.row(k));
    for (std::size_t m = 0; m < row.size(); ++m) out.at(k, m) = row[m];
  }
  return RiskMatrix(matrix.dataset_ids(), matrix.configurations(), std::move(out),
                    MatrixProvenance::kStandardized);
}

// Affine [0, 1] scaling per row: (x - row_min) / (row_max - row_min).
// Constant rows map to all 0.5. Used for reporting, not for learning.
inline Matrix unit_normalize_per_dataset(const Matrix& scores) {
  Matrix out(scores.rows, scores.cols);
  for (std::size_t r = 0; r < scores.rows; ++r) {
    double lo = scores.at(r, 0), hi = scores.at(r, 0);
    for (std::size_t c = 0; c < scores.cols; ++c) {
      const double v = scores.at(r, c);
      if (!std::isfinite(v)) {
        throw std::invalid_argument("unit_normalize_per_dataset: non-finite entry");
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    for (std::size_t c = 0; c < scores.cols; ++c) {
      out.at(r, c) = (hi > lo) ? (scores.at(r, c) - lo) / (hi - lo) : 0.5;
    }
  }
  return out;
}

}  // namespace defaultminer

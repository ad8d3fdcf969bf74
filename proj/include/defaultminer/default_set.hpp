#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "defaultminer/objective.hpp"
#include "defaultminer/risk_matrix.hpp"

namespace defaultminer {

enum class DefaultSetSource { kGreedy, kExact, kBruteForce };

inline const char* source_name(DefaultSetSource s) {
  switch (s) {
    case DefaultSetSource::kGreedy: return "greedy";
    case DefaultSetSource::kExact: return "exact";
    case DefaultSetSource::kBruteForce: return "brute-force";
  }
  return "?";
}

inline DefaultSetSource source_from_name(const std::string& name) {
  if (name == "greedy") return DefaultSetSource::kGreedy;
  if (name == "exact") return DefaultSetSource::kExact;
  if (name == "brute-force") return DefaultSetSource::kBruteForce;
  throw std::invalid_argument("unknown default-set source '" + name + "'");
}

// An ordered list of default configurations plus the set risk of every
// prefix. Any prefix is itself a usable result (the anytime property);
// prefix_risks[i] is recomputable as the set risk of the first i+1 members.
struct DefaultSet {
  std::vector<int> indices;
  std::vector<double> prefix_risks;
  std::vector<Configuration> configurations;  // resolved values, may be empty per entry
  AggregatorSpec agg;
  DefaultSetSource source = DefaultSetSource::kGreedy;

  std::size_t size() const { return indices.size(); }
  double objective() const {
    return prefix_risks.empty() ? std::numeric_limits<double>::quiet_NaN()
                                : prefix_risks.back();
  }
};

namespace detail {

inline std::vector<Configuration> resolve_configurations(const RiskMatrix& matrix,
                                                         const std::vector<int>& indices) {
  std::vector<Configuration> out;
  out.reserve(indices.size());
  for (int idx : indices) out.push_back(matrix.configurations()[static_cast<std::size_t>(idx)]);
  return out;
}

inline std::vector<double> prefix_risks_of(const RiskMatrix& matrix,
                                           const std::vector<int>& indices,
                                           const AggregatorSpec& agg) {
  std::vector<double> out;
  out.reserve(indices.size());
  for (std::size_t i = 1; i <= indices.size(); ++i) {
    out.push_back(set_risk(matrix, {indices.data(), i}, agg));
  }
  return out;
}

}  // namespace detail

}  // namespace defaultminer

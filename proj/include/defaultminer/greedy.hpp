#pragma once

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "defaultminer/default_set.hpp"
#include "defaultminer/objective.hpp"
#include "defaultminer/parallel.hpp"
#include "defaultminer/risk_matrix.hpp"

namespace defaultminer {

// G of the singleton {config}: the aggregate of one column.
inline double aggregate_column(const RiskMatrix& matrix, int config, const AggregatorSpec& agg) {
  std::vector<double> column(matrix.num_datasets());
  for (std::size_t k = 0; k < column.size(); ++k) {
    column[k] = matrix.at(k, static_cast<std::size_t>(config));
  }
  return aggregate(column, agg);
}

// Greedy forward selection: starting from the empty set, iteration i adds the
// configuration minimizing G({theta} u Theta_def,i-1). Ties break toward the
// lowest candidate index. Asking for more defaults than there are columns
// returns all columns in greedy order.
//
// The result has the prefix property: the first n' entries for any n' < n are
// exactly greedy_select(matrix, n', agg). Candidate scans run in parallel but
// every marginal value lands in an index-addressed slot and the argmin walks
// those slots in index order, so thread count never changes the outcome.
inline DefaultSet greedy_select(const RiskMatrix& matrix, int n, const AggregatorSpec& agg) {
  if (n < 1) throw std::invalid_argument("greedy_select: n must be >= 1");
  const std::size_t num_configs = matrix.num_configurations();
  const std::size_t target = std::min<std::size_t>(static_cast<std::size_t>(n), num_configs);

  DefaultSet result;
  result.agg = agg;
  result.source = DefaultSetSource::kGreedy;

  std::vector<bool> member(num_configs, false);
  std::vector<double> marginal(num_configs);
  constexpr double kUnset = std::numeric_limits<double>::infinity();

  SetRiskState state(matrix, 0);  // placeholder until the first pick
  for (std::size_t step = 0; step < target; ++step) {
    parallel_for(num_configs, [&](std::size_t c) {
      const int candidate = static_cast<int>(c);
      if (member[c]) {
        marginal[c] = kUnset;
      } else if (step == 0) {
        marginal[c] = aggregate_column(matrix, candidate, agg);
      } else {
        marginal[c] = marginal_set_risk(state, matrix, candidate, agg);
      }
    });

    int best = -1;
    double best_value = kUnset;
    for (std::size_t c = 0; c < num_configs; ++c) {
      if (member[c]) continue;
      if (best < 0 || marginal[c] < best_value) {
        best = static_cast<int>(c);
        best_value = marginal[c];
      }
    }

    member[static_cast<std::size_t>(best)] = true;
    result.indices.push_back(best);
    result.prefix_risks.push_back(best_value);
    if (step == 0) {
      state = SetRiskState(matrix, best);
    } else {
      state.add(matrix, best);
    }
  }

  result.configurations = detail::resolve_configurations(matrix, result.indices);
  return result;
}

}  // namespace defaultminer

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "defaultminer/greedy.hpp"
#include "defaultminer/objective.hpp"
#include "defaultminer/parallel.hpp"
#include "defaultminer/random.hpp"
#include "defaultminer/risk_matrix.hpp"

namespace defaultminer {

// Per-strategy outcome of the evaluation protocol: one achieved risk per
// dataset, plus the [0, 1]-normalized scores filled in when a report is
// assembled across strategies.
struct StrategyResult {
  std::string label;
  int budget = 0;  // model evaluations the strategy spends per dataset
  std::vector<double> achieved;
  std::vector<double> normalized;
};

// Picks column indices from a training matrix; lets the leave-one-dataset-out
// loop run with greedy, exact or any other selection rule.
using FoldSelector = std::function<std::vector<int>(const RiskMatrix& training, int n)>;

// Leave-one-dataset-out evaluation: for every held-out dataset k, defaults
// are learned on the matrix without row k and scored on row k as the minimum
// risk among the learned columns. Folds run in parallel; every fold writes to
// its own slot so thread count cannot change the result.
inline std::vector<StrategyResult> lodo_evaluate_with(const RiskMatrix& matrix,
                                                      std::span<const int> n_values,
                                                      const FoldSelector& selector,
                                                      std::string_view label_prefix) {
  const std::size_t num_datasets = matrix.num_datasets();
  if (num_datasets < 2) {
    throw std::invalid_argument("lodo_evaluate: need at least 2 datasets");
  }
  for (int n : n_values) {
    if (n < 1) throw std::invalid_argument("lodo_evaluate: n values must be >= 1");
  }

  // achieved[fold][ni]
  std::vector<std::vector<double>> achieved(num_datasets,
                                            std::vector<double>(n_values.size()));
  parallel_for(num_datasets, [&](std::size_t fold) {
    const RiskMatrix training = matrix.without_row(fold);
    for (std::size_t ni = 0; ni < n_values.size(); ++ni) {
      const std::vector<int> picked = selector(training, n_values[ni]);
      if (picked.empty()) throw std::logic_error("lodo_evaluate: selector returned no columns");
      double best = matrix.at(fold, static_cast<std::size_t>(picked[0]));
      for (int idx : picked) {
        best = std::min(best, matrix.at(fold, static_cast<std::size_t>(idx)));
      }
      achieved[fold][ni] = best;
    }
  });

  std::vector<StrategyResult> results;
  results.reserve(n_values.size());
  for (std::size_t ni = 0; ni < n_values.size(); ++ni) {
    StrategyResult r;
    r.label = std::string(label_prefix) + std::to_string(n_values[ni]);
    r.budget = n_values[ni];
    r.achieved.resize(num_datasets);
    for (std::size_t fold = 0; fold < num_datasets; ++fold) r.achieved[fold] = achieved[fold][ni];
    results.push_back(std::move(r));
  }
  return results;
}

inline std::vector<StrategyResult> lodo_evaluate(const RiskMatrix& matrix,
                                                 std::span<const int> n_values,
                                                 const AggregatorSpec& agg) {
  return lodo_evaluate_with(
      matrix, n_values,
      [&agg](const RiskMatrix& training, int n) {
        return greedy_select(training, n, agg).indices;
      },
      "defaults-n");
}

// Simulated random search: per dataset row, draws `budget` distinct columns
// uniformly without replacement, keeps the minimum risk, and averages over
// repetitions. Per-row generators derive from (seed, row), so the result is
// reproducible and independent of evaluation order.
inline StrategyResult random_search_baseline(const RiskMatrix& matrix, int budget,
                                             std::uint64_t seed, int repetitions) {
  const std::size_t num_cols = matrix.num_configurations();
  if (budget < 1) throw std::invalid_argument("random_search_baseline: budget must be >= 1");
  if (static_cast<std::size_t>(budget) > num_cols) {
    throw std::invalid_argument("random_search_baseline: budget " + std::to_string(budget) +
                                " exceeds the " + std::to_string(num_cols) +
                                " available configurations");
  }
  if (repetitions < 1) {
    throw std::invalid_argument("random_search_baseline: repetitions must be >= 1");
  }

  StrategyResult result;
  result.label = "rs-b" + std::to_string(budget);
  result.budget = budget;
  result.achieved.resize(matrix.num_datasets());

  parallel_for(matrix.num_datasets(), [&](std::size_t k) {
    SplitMix64 rng(derive_seed(seed, k));
    std::vector<int> columns(num_cols);
    double sum = 0.0;
    for (int rep = 0; rep < repetitions; ++rep) {
      std::iota(columns.begin(), columns.end(), 0);
      double best = std::numeric_limits<double>::infinity();
      for (int draw = 0; draw < budget; ++draw) {
        const std::size_t pick =
            static_cast<std::size_t>(draw) + rng.next_below(num_cols - static_cast<std::size_t>(draw));
        std::swap(columns[static_cast<std::size_t>(draw)], columns[pick]);
        best = std::min(best,
                        matrix.at(k, static_cast<std::size_t>(columns[static_cast<std::size_t>(draw)])));
      }
      sum += best;
    }
    result.achieved[k] = sum / static_cast<double>(repetitions);
  });
  return result;
}

// Per-row ranks (1 = best) with tie-averaging: tied entries share the mean of
// the positions they occupy, so every row still sums to S(S+1)/2.
inline Matrix rank_rows(const Matrix& scores, bool lower_is_better) {
  Matrix ranks(scores.rows, scores.cols);
  std::vector<std::size_t> order(scores.cols);
  for (std::size_t r = 0; r < scores.rows; ++r) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = scores.at(r, a), vb = scores.at(r, b);
      if (va != vb) return lower_is_better ? va < vb : va > vb;
      return a < b;
    });
    std::size_t i = 0;
    while (i < scores.cols) {
      std::size_t j = i;
      while (j + 1 < scores.cols &&
             scores.at(r, order[j + 1]) == scores.at(r, order[i])) {
        ++j;
      }
      // positions i+1 .. j+1 share their mean
      const double shared =
          (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
      for (std::size_t t = i; t <= j; ++t) ranks.at(r, order[t]) = shared;
      i = j + 1;
    }
  }
  return ranks;
}

// Column means of the tie-averaged per-dataset ranks.
inline std::vector<double> average_ranks(const Matrix& scores, bool lower_is_better) {
  const Matrix ranks = rank_rows(scores, lower_is_better);
  std::vector<double> means(scores.cols, 0.0);
  for (std::size_t r = 0; r < ranks.rows; ++r) {
    for (std::size_t c = 0; c < ranks.cols; ++c) means[c] += ranks.at(r, c);
  }
  for (double& m : means) m /= static_cast<double>(ranks.rows);
  return means;
}

namespace detail {

// Upper regularized incomplete gamma Q(a, x), series/continued-fraction form.
inline double regularized_gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  const double log_gamma_a = std::lgamma(a);
  if (x < a + 1.0) {
    // series for P(a, x); Q = 1 - P
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - log_gamma_a);
  }
  // Lentz continued fraction for Q(a, x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - log_gamma_a);
}

inline double chi_squared_sf(double x, int dof) {
  return regularized_gamma_q(static_cast<double>(dof) / 2.0, x / 2.0);
}

}  // namespace detail

struct FriedmanResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Friedman chi-squared over a K x S matrix of per-dataset ranks:
// chi2_F = 12K / (S(S+1)) * [ sum_j Rbar_j^2 - S(S+1)^2 / 4 ], with the
// p-value from the chi-squared distribution with S-1 degrees of freedom.
inline FriedmanResult friedman_test(const Matrix& ranks) {
  const std::size_t num_datasets = ranks.rows;
  const std::size_t num_strategies = ranks.cols;
  if (num_strategies < 3) {
    throw std::invalid_argument("friedman_test: need at least 3 strategies (use a sign test for 2)");
  }
  if (num_datasets < 2) {
    throw std::invalid_argument("friedman_test: need at least 2 datasets");
  }
  const double S = static_cast<double>(num_strategies);
  const double K = static_cast<double>(num_datasets);
  double sum_sq = 0.0;
  for (std::size_t c = 0; c < num_strategies; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < num_datasets; ++r) mean += ranks.at(r, c);
    mean /= K;
    sum_sq += mean * mean;
  }
  FriedmanResult result;
  result.statistic = 12.0 * K / (S * (S + 1.0)) * (sum_sq - S * (S + 1.0) * (S + 1.0) / 4.0);
  if (result.statistic < 0.0) result.statistic = 0.0;  // guard tiny negative rounding
  result.p_value = detail::chi_squared_sf(result.statistic, static_cast<int>(num_strategies) - 1);
  return result;
}

// Nemenyi critical difference at alpha = 0.05:
// CD = q_{0.05,S} * sqrt(S(S+1) / (6N)). Average-rank gaps larger than CD are
// significant. The studentized-range table covers S = 2..10.
inline double nemenyi_critical_difference(int num_strategies, int num_datasets,
                                          double alpha = 0.05) {
  if (alpha != 0.05) {
    throw std::invalid_argument("nemenyi_critical_difference: only alpha = 0.05 is supported");
  }
  if (num_strategies < 2 || num_strategies > 10) {
    throw std::invalid_argument("nemenyi_critical_difference: S must lie in [2, 10]");
  }
  if (num_datasets < 1) {
    throw std::invalid_argument("nemenyi_critical_difference: N must be >= 1");
  }
  static constexpr double kQ05[] = {1.960, 2.343, 2.569, 2.728, 2.850,
                                    2.949, 3.031, 3.102, 3.164};  // S = 2..10
  const double q = kQ05[num_strategies - 2];
  const double S = static_cast<double>(num_strategies);
  return q * std::sqrt(S * (S + 1.0) / (6.0 * static_cast<double>(num_datasets)));
}

// Cross-strategy evaluation report: normalized scores, average ranks and the
// Friedman/Nemenyi summary. Friedman needs S >= 3 and the Nemenyi table stops
// at S = 10; outside those ranges the fields stay empty.
struct EvaluationReport {
  std::vector<std::string> dataset_ids;
  std::vector<StrategyResult> strategies;
  std::vector<double> average_ranks;
  std::optional<FriedmanResult> friedman;
  std::optional<double> nemenyi_cd;

  std::size_t num_datasets() const { return dataset_ids.size(); }
  std::size_t num_strategies() const { return strategies.size(); }
};

inline EvaluationReport build_report(const RiskMatrix& matrix,
                                     std::vector<StrategyResult> strategies) {
  if (strategies.empty()) throw std::invalid_argument("build_report: no strategies");
  const std::size_t num_datasets = matrix.num_datasets();
  for (const StrategyResult& s : strategies) {
    if (s.achieved.size() != num_datasets) {
      throw std::invalid_argument("build_report: strategy '" + s.label +
                                  "' has the wrong number of per-dataset scores");
    }
  }

  Matrix scores(num_datasets, strategies.size());
  for (std::size_t c = 0; c < strategies.size(); ++c) {
    for (std::size_t r = 0; r < num_datasets; ++r) scores.at(r, c) = strategies[c].achieved[r];
  }
  const Matrix normalized = unit_normalize_per_dataset(scores);
  for (std::size_t c = 0; c < strategies.size(); ++c) {
    strategies[c].normalized.resize(num_datasets);
    for (std::size_t r = 0; r < num_datasets; ++r) {
      strategies[c].normalized[r] = normalized.at(r, c);
    }
  }

  EvaluationReport report;
  report.dataset_ids = matrix.dataset_ids();
  report.average_ranks = average_ranks(normalized, /*lower_is_better=*/true);
  if (strategies.size() >= 3) {
    report.friedman = friedman_test(rank_rows(normalized, /*lower_is_better=*/true));
  }
  if (strategies.size() >= 2 && strategies.size() <= 10) {
    report.nemenyi_cd = nemenyi_critical_difference(static_cast<int>(strategies.size()),
                                                    static_cast<int>(num_datasets));
  }
  report.strategies = std::move(strategies);
  return report;
}

}  // namespace defaultminer

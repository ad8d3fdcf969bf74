#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "defaultminer/default_set.hpp"
#include "defaultminer/format.hpp"
#include "defaultminer/greedy.hpp"
#include "defaultminer/objective.hpp"
#include "defaultminer/parallel.hpp"
#include "defaultminer/risk_matrix.hpp"

namespace defaultminer {

// Q(k, m): indices of configurations strictly better than m on dataset k,
// under the lexicographic tie rule (R_k(theta_s), s) < (R_k(theta_m), m).
// For each dataset exactly one column has an empty set (the row's
// lexicographic minimum).
struct PrecedenceSets {
  std::vector<std::vector<std::vector<int>>> q;  // [dataset][configuration] -> sorted indices
};

inline PrecedenceSets precedence_sets(const RiskMatrix& matrix) {
  const std::size_t num_rows = matrix.num_datasets();
  const std::size_t num_cols = matrix.num_configurations();
  PrecedenceSets out;
  out.q.assign(num_rows, std::vector<std::vector<int>>(num_cols));

  std::vector<int> order(num_cols);
  for (std::size_t k = 0; k < num_rows; ++k) {
    for (std::size_t m = 0; m < num_cols; ++m) order[m] = static_cast<int>(m);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double ra = matrix.at(k, static_cast<std::size_t>(a));
      const double rb = matrix.at(k, static_cast<std::size_t>(b));
      return ra < rb || (ra == rb && a < b);
    });
    std::vector<int> better;
    for (int m : order) {
      auto& slot = out.q[k][static_cast<std::size_t>(m)];
      slot = better;
      std::sort(slot.begin(), slot.end());
      better.push_back(m);
    }
  }
  return out;
}

// The discretized selection problem as a mixed integer program: M binary
// selection variables phi_m, K x M continuous variables psi_k_m, and the
// four constraint families
//   (1)  sum_m phi_m = n
//   (2)  psi_k_m >= phi_m - sum_{s in Q(k,m)} phi_s      for all k, m
//   (3)  psi_k_m >= 0                                    for all k, m
//   (4)  sum_m psi_k_m = 1                               for all k
// minimizing sum_{k,m} R[k][m] * psi_k_m. Constraint (4) makes the
// formulation valid for matrices with negative (standardized) risks.
// This encodes the sum aggregator; mean yields the same optimal set.
struct MipInstance {
  int n = 0;
  Matrix risks;  // K x M coefficients
  PrecedenceSets precedence;

  std::size_t num_datasets() const { return risks.rows; }
  std::size_t num_configurations() const { return risks.cols; }
  std::size_t num_binary_variables() const { return risks.cols; }
  std::size_t num_continuous_variables() const { return risks.rows * risks.cols; }
  std::size_t num_constraints() const { return 1 + 2 * risks.rows * risks.cols + risks.rows; }
};

inline MipInstance build_mip(const RiskMatrix& matrix, int n) {
  if (n < 1 || static_cast<std::size_t>(n) > matrix.num_configurations()) {
    throw std::invalid_argument("build_mip: n must lie in [1, M], got " + std::to_string(n));
  }
  MipInstance instance;
  instance.n = n;
  instance.risks = matrix.risks();
  instance.precedence = precedence_sets(matrix);
  return instance;
}

enum class SolveStatus { kOptimal, kTimeLimit };

struct ExactOptions {
  double time_limit_seconds = std::numeric_limits<double>::infinity();
  bool force = false;  // bypass the instance-size guard
};

struct ExactResult {
  DefaultSet defaults;  // ascending indices, sum aggregator
  SolveStatus status = SolveStatus::kOptimal;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t nodes = 0;

  double gap() const { return objective - bound; }
};

namespace detail {

inline double binomial_upper(std::size_t m, std::size_t n) {
  double result = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    result *= static_cast<double>(m - i) / static_cast<double>(i + 1);
    if (result > 1e18) return 1e18;
  }
  return result;
}

inline bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Shared branch-and-bound state. The incumbent is replaced only by a strictly
// better objective or an equal objective with a lexicographically smaller
// index set, so the final solution does not depend on the visit schedule.
struct BnbShared {
  std::mutex mutex;
  std::atomic<double> best_objective{std::numeric_limits<double>::infinity()};
  std::vector<int> best_set;
  std::atomic<std::uint64_t> nodes{0};
  std::atomic<bool> timed_out{false};
  bool has_deadline = false;
  std::chrono::steady_clock::time_point deadline;
  double cutoff_bound = std::numeric_limits<double>::infinity();  // guarded by mutex

  void offer(double objective, const std::vector<int>& set) {
    std::lock_guard<std::mutex> lock(mutex);
    const double current = best_objective.load(std::memory_order_relaxed);
    if (objective < current ||
        (objective == current && (best_set.empty() || lex_less(set, best_set)))) {
      best_objective.store(objective, std::memory_order_relaxed);
      best_set = set;
    }
  }

  void record_cutoff(double bound) {
    std::lock_guard<std::mutex> lock(mutex);
    cutoff_bound = std::min(cutoff_bound, bound);
  }
};

struct BnbNode {
  std::size_t next_column = 0;
  int slots_left = 0;
  std::vector<int> selected;
  std::vector<double> row_min;  // +inf rows until something is selected
};

class BnbSolver {
 public:
  BnbSolver(const Matrix& risks, BnbShared& shared) : risks_(risks), shared_(shared) {
    // suffix_min[k][j] = min risk over columns >= j; admissible completion bound.
    suffix_min_.assign(risks_.rows, std::vector<double>(risks_.cols + 1,
                                                        std::numeric_limits<double>::infinity()));
    for (std::size_t k = 0; k < risks_.rows; ++k) {
      for (std::size_t j = risks_.cols; j-- > 0;) {
        suffix_min_[k][j] = std::min(suffix_min_[k][j + 1], risks_.at(k, j));
      }
    }
  }

  void run(BnbNode node) { dfs(node); }

  // Lower bound for completing `node`: each dataset contributes the minimum
  // over its already-selected columns and every still-available column.
  double node_bound(const BnbNode& node) const {
    double bound = 0.0;
    for (std::size_t k = 0; k < risks_.rows; ++k) {
      bound += std::min(node.row_min[k], suffix_min_[k][node.next_column]);
    }
    return bound;
  }

 private:
  bool deadline_passed() {
    if (!shared_.has_deadline) return false;
    if (shared_.timed_out.load(std::memory_order_relaxed)) return true;
    if (std::chrono::steady_clock::now() >= shared_.deadline) {
      shared_.timed_out.store(true, std::memory_order_relaxed);
      return true;
    }
    return false;
  }

  void dfs(BnbNode& node) {
    shared_.nodes.fetch_add(1, std::memory_order_relaxed);
    if (node.slots_left == 0) {
      double objective = 0.0;
      for (double v : node.row_min) objective += v;
      shared_.offer(objective, node.selected);
      return;
    }
    if (risks_.cols - node.next_column < static_cast<std::size_t>(node.slots_left)) return;

    const double bound = node_bound(node);
    // Strict comparison: subtrees that tie the incumbent stay open so the
    // lexicographically smallest optimum is always visited.
    if (bound > shared_.best_objective.load(std::memory_order_relaxed)) return;

    if (shared_.has_deadline && deadline_passed()) {
      shared_.record_cutoff(bound);
      return;
    }

    const std::size_t column = node.next_column;

    // Include branch first: subsets are visited in lexicographic order.
    BnbNode include;
    include.next_column = column + 1;
    include.slots_left = node.slots_left - 1;
    include.selected = node.selected;
    include.selected.push_back(static_cast<int>(column));
    include.row_min.resize(risks_.rows);
    for (std::size_t k = 0; k < risks_.rows; ++k) {
      include.row_min[k] = std::min(node.row_min[k], risks_.at(k, column));
    }
    dfs(include);

    node.next_column = column + 1;
    dfs(node);
    node.next_column = column;
  }

  const Matrix& risks_;
  BnbShared& shared_;
  std::vector<std::vector<double>> suffix_min_;
};

}  // namespace detail

// Exact minimization of the discretized objective by branch-and-bound over
// the selection variables phi. Given phi, the optimal psi is determined (each
// dataset picks its row minimum among the selected columns), so the search
// tree only branches on column membership. Returns a proven optimum unless
// the time limit fires, in which case the incumbent plus a bound gap comes
// back. The instance-size guard (M > 64 or C(M, n) > 1e9) keeps accidental
// desk-scale runs tractable; options.force bypasses it.
inline ExactResult solve_exact(const MipInstance& instance, const ExactOptions& options = {}) {
  const std::size_t num_cols = instance.num_configurations();
  const std::size_t num_rows = instance.num_datasets();
  const int n = instance.n;
  if (n < 1 || static_cast<std::size_t>(n) > num_cols) {
    throw std::invalid_argument("solve_exact: n out of range");
  }
  if (!options.force) {
    if (num_cols > 64) {
      throw std::invalid_argument("solve_exact: instance too large (M = " +
                                  std::to_string(num_cols) + " > 64); pass force to override");
    }
    if (detail::binomial_upper(num_cols, static_cast<std::size_t>(n)) > 1e9) {
      throw std::invalid_argument(
          "solve_exact: instance too large (C(M, n) > 1e9); pass force to override");
    }
  }

  detail::BnbShared shared;
  if (std::isfinite(options.time_limit_seconds)) {
    shared.has_deadline = true;
    shared.deadline = std::chrono::steady_clock::now() +
                      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(options.time_limit_seconds));
  }

  // Seed the incumbent with the greedy solution: a valid n-subset that
  // tightens pruning from the first node on.
  {
    const RiskMatrix seed_matrix = RiskMatrix::FromValues(
        num_rows, num_cols, instance.risks.values, MatrixProvenance::kRaw);
    DefaultSet seed = greedy_select(seed_matrix, n, AggregatorSpec::Sum());
    std::vector<int> sorted = seed.indices;
    std::sort(sorted.begin(), sorted.end());
    shared.offer(detail::set_risk_table(instance.risks, sorted, AggregatorSpec::Sum()), sorted);
  }

  detail::BnbSolver solver(instance.risks, shared);

  // Expand a small frontier breadth-first, then solve the subtrees in
  // parallel. Outputs are schedule-independent (see BnbShared::offer).
  std::deque<detail::BnbNode> frontier;
  detail::BnbNode root;
  root.next_column = 0;
  root.slots_left = n;
  root.row_min.assign(num_rows, std::numeric_limits<double>::infinity());
  frontier.push_back(std::move(root));
  const std::size_t frontier_target = worker_thread_count() * 4;
  while (frontier.size() < frontier_target) {
    detail::BnbNode node = std::move(frontier.front());
    frontier.pop_front();
    const bool leaf = node.slots_left == 0 ||
                      num_cols - node.next_column <= static_cast<std::size_t>(node.slots_left);
    if (leaf) {
      solver.run(std::move(node));
      if (frontier.empty()) break;
      continue;
    }
    detail::BnbNode include;
    include.next_column = node.next_column + 1;
    include.slots_left = node.slots_left - 1;
    include.selected = node.selected;
    include.selected.push_back(static_cast<int>(node.next_column));
    include.row_min.resize(num_rows);
    for (std::size_t k = 0; k < num_rows; ++k) {
      include.row_min[k] = std::min(node.row_min[k], instance.risks.at(k, node.next_column));
    }
    frontier.push_back(std::move(include));
    node.next_column += 1;
    frontier.push_back(std::move(node));
  }

  std::vector<detail::BnbNode> tasks(frontier.begin(), frontier.end());
  parallel_for(tasks.size(), [&](std::size_t i) { solver.run(tasks[i]); });

  ExactResult result;
  result.nodes = shared.nodes.load();
  result.status =
      shared.timed_out.load() ? SolveStatus::kTimeLimit : SolveStatus::kOptimal;
  result.defaults.indices = shared.best_set;
  result.defaults.agg = AggregatorSpec::Sum();
  result.defaults.source = DefaultSetSource::kExact;
  for (std::size_t i = 1; i <= shared.best_set.size(); ++i) {
    result.defaults.prefix_risks.push_back(
        detail::set_risk_table(instance.risks, {shared.best_set.data(), i},
                               AggregatorSpec::Sum()));
  }
  result.objective = result.defaults.objective();
  result.bound = result.status == SolveStatus::kOptimal
                     ? result.objective
                     : std::min(shared.cutoff_bound, result.objective);
  return result;
}

// Convenience wrapper that also resolves configuration values from the matrix.
inline ExactResult solve_exact(const RiskMatrix& matrix, int n, const ExactOptions& options = {}) {
  ExactResult result = solve_exact(build_mip(matrix, n), options);
  result.defaults.configurations = detail::resolve_configurations(matrix, result.defaults.indices);
  return result;
}

// Exhaustive oracle over all n-subsets, valid for every aggregator. Ties
// resolve to the lexicographically smallest index set. Guarded to
// C(M, n) <= 1e7 subsets.
inline DefaultSet brute_force_oracle(const RiskMatrix& matrix, int n, const AggregatorSpec& agg) {
  const std::size_t num_cols = matrix.num_configurations();
  if (n < 1 || static_cast<std::size_t>(n) > num_cols) {
    throw std::invalid_argument("brute_force_oracle: n must lie in [1, M]");
  }
  if (detail::binomial_upper(num_cols, static_cast<std::size_t>(n)) > 1e7) {
    throw std::invalid_argument("brute_force_oracle: instance too large (C(M, n) > 1e7)");
  }

  std::vector<int> combo(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) combo[static_cast<std::size_t>(i)] = i;
  std::vector<int> best;
  double best_value = std::numeric_limits<double>::infinity();
  for (;;) {
    const double value = set_risk(matrix, combo, agg);
    if (best.empty() || value < best_value) {
      best_value = value;
      best = combo;
    }
    // Next combination in lexicographic order.
    int i = n - 1;
    while (i >= 0 &&
           combo[static_cast<std::size_t>(i)] == static_cast<int>(num_cols) - n + i) {
      --i;
    }
    if (i < 0) break;
    ++combo[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) {
      combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
    }
  }

  DefaultSet result;
  result.indices = best;
  result.agg = agg;
  result.source = DefaultSetSource::kBruteForce;
  result.prefix_risks = detail::prefix_risks_of(matrix, best, agg);
  result.configurations = detail::resolve_configurations(matrix, best);
  return result;
}

// Recovers the psi matrix implied by a selected set: psi[k][m] = 1 exactly
// when m is the selected column with the lowest risk on dataset k (lex ties).
// Every row sums to 1 and all entries are 0/1 by construction.
inline Matrix reconstruct_psi(const RiskMatrix& matrix, std::span<const int> members) {
  detail::check_members(matrix.num_configurations(), members);
  Matrix psi(matrix.num_datasets(), matrix.num_configurations(), 0.0);
  for (std::size_t k = 0; k < matrix.num_datasets(); ++k) {
    int winner = members[0];
    for (int m : members) {
      const double rm = matrix.at(k, static_cast<std::size_t>(m));
      const double rw = matrix.at(k, static_cast<std::size_t>(winner));
      if (rm < rw || (rm == rw && m < winner)) winner = m;
    }
    psi.at(k, static_cast<std::size_t>(winner)) = 1.0;
  }
  return psi;
}

// CPLEX-LP text form of the instance: the objective, the four constraint
// families in a fixed order (cardinality, coupling, nonnegativity, row sums)
// and the binary section for phi. Coefficients keep their sign and full
// precision.
inline std::string export_lp(const MipInstance& instance) {
  const std::size_t num_rows = instance.num_datasets();
  const std::size_t num_cols = instance.num_configurations();
  std::string lp;
  lp += "\\ default-set selection MIP: K=" + std::to_string(num_rows) +
        " M=" + std::to_string(num_cols) + " n=" + std::to_string(instance.n) + "\n";
  lp += "Minimize\n obj:";
  bool first = true;
  for (std::size_t k = 0; k < num_rows; ++k) {
    for (std::size_t m = 0; m < num_cols; ++m) {
      const double coeff = instance.risks.at(k, m);
      const double magnitude = std::abs(coeff);
      const bool negative = std::signbit(coeff);
      lp += first ? (negative ? " - " : " ") : (negative ? " - " : " + ");
      lp += format_double(magnitude) + " psi_" + std::to_string(k) + "_" + std::to_string(m);
      first = false;
    }
  }
  lp += "\nSubject To\n";
  lp += " card:";
  for (std::size_t m = 0; m < num_cols; ++m) {
    lp += std::string(m == 0 ? " " : " + ") + "phi_" + std::to_string(m);
  }
  lp += " = " + std::to_string(instance.n) + "\n";
  for (std::size_t k = 0; k < num_rows; ++k) {
    for (std::size_t m = 0; m < num_cols; ++m) {
      lp += " pen_" + std::to_string(k) + "_" + std::to_string(m) + ": psi_" +
            std::to_string(k) + "_" + std::to_string(m) + " - phi_" + std::to_string(m);
      for (int s : instance.precedence.q[k][m]) {
        lp += " + phi_" + std::to_string(s);
      }
      lp += " >= 0\n";
    }
  }
  for (std::size_t k = 0; k < num_rows; ++k) {
    for (std::size_t m = 0; m < num_cols; ++m) {
      lp += " nn_" + std::to_string(k) + "_" + std::to_string(m) + ": psi_" +
            std::to_string(k) + "_" + std::to_string(m) + " >= 0\n";
    }
  }
  for (std::size_t k = 0; k < num_rows; ++k) {
    lp += " row_" + std::to_string(k) + ":";
    for (std::size_t m = 0; m < num_cols; ++m) {
      lp += std::string(m == 0 ? " " : " + ") + "psi_" + std::to_string(k) + "_" +
            std::to_string(m);
    }
    lp += " = 1\n";
  }
  lp += "Binary\n";
  for (std::size_t m = 0; m < num_cols; ++m) {
    lp += " phi_" + std::to_string(m) + "\n";
  }
  lp += "End\n";
  return lp;
}

}  // namespace defaultminer

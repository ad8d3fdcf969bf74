#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "defaultminer/risk_matrix.hpp"

namespace defaultminer {

enum class AggregatorKind { kMean, kSum, kMedian, kQuantile, kMin, kMax, kHodgesLehmann };

// The function h that collapses per-dataset minima to one scalar. All kinds
// are coordinate-wise monotone and accept signed (standardized) inputs.
struct AggregatorSpec {
  AggregatorKind kind = AggregatorKind::kMedian;
  double q = 0.5;  // quantile parameter, only used by kQuantile

  static AggregatorSpec Mean() { return {AggregatorKind::kMean, 0.5}; }
  static AggregatorSpec Sum() { return {AggregatorKind::kSum, 0.5}; }
  static AggregatorSpec Median() { return {AggregatorKind::kMedian, 0.5}; }
  static AggregatorSpec Min() { return {AggregatorKind::kMin, 0.5}; }
  static AggregatorSpec Max() { return {AggregatorKind::kMax, 0.5}; }
  static AggregatorSpec Quantile(double q) {
    if (!(q >= 0.0 && q <= 1.0)) {
      throw std::invalid_argument("quantile parameter must lie in [0, 1]");
    }
    return {AggregatorKind::kQuantile, q};
  }
  static AggregatorSpec HodgesLehmann() { return {AggregatorKind::kHodgesLehmann, 0.5}; }

  // Accepts the CLI grammar: mean|sum|median|min|max|q:<x>|hl.
  static AggregatorSpec Parse(std::string_view text) {
    if (text == "mean") return Mean();
    if (text == "sum") return Sum();
    if (text == "median") return Median();
    if (text == "min") return Min();
    if (text == "max") return Max();
    if (text == "hl") return HodgesLehmann();
    if (text.rfind("q:", 0) == 0) {
      const std::string_view arg = text.substr(2);
      double q = 0.0;
      const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), q);
      if (ec != std::errc() || ptr != arg.data() + arg.size()) {
        throw std::invalid_argument("bad quantile aggregator '" + std::string(text) + "'");
      }
      return Quantile(q);
    }
    throw std::invalid_argument("unknown aggregator '" + std::string(text) +
                                "' (expected mean|sum|median|min|max|q:<x>|hl)");
  }

  std::string ToString() const {
    switch (kind) {
      case AggregatorKind::kMean: return "mean";
      case AggregatorKind::kSum: return "sum";
      case AggregatorKind::kMedian: return "median";
      case AggregatorKind::kMin: return "min";
      case AggregatorKind::kMax: return "max";
      case AggregatorKind::kHodgesLehmann: return "hl";
      case AggregatorKind::kQuantile: {
        char buf[40];
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), q);
        return "q:" + std::string(buf, ptr);
      }
    }
    return "?";
  }

  bool operator==(const AggregatorSpec& other) const {
    if (kind != other.kind) return false;
    return kind != AggregatorKind::kQuantile || q == other.q;
  }
};

namespace detail {

inline double median_sorted(std::span<const double> sorted) {
  const std::size_t n = sorted.size();
  return (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

// Linear interpolation between adjacent order statistics at h = (n-1) q.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  const std::size_t n = sorted.size();
  const double h = static_cast<double>(n - 1) * q;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

// h(values). Median of an even-length input is the mean of the two middle
// order statistics; hodges-lehmann is the median of all Walsh averages
// (x_i + x_j) / 2 over i <= j.
inline double aggregate(std::span<const double> values, const AggregatorSpec& agg) {
  if (values.empty()) throw std::invalid_argument("aggregate: empty input");
  switch (agg.kind) {
    case AggregatorKind::kSum:
    case AggregatorKind::kMean: {
      double sum = 0.0;
      for (double v : values) sum += v;
      return agg.kind == AggregatorKind::kSum ? sum
                                              : sum / static_cast<double>(values.size());
    }
    case AggregatorKind::kMin: return *std::min_element(values.begin(), values.end());
    case AggregatorKind::kMax: return *std::max_element(values.begin(), values.end());
    case AggregatorKind::kMedian: {
      std::vector<double> sorted(values.begin(), values.end());
      std::sort(sorted.begin(), sorted.end());
      return detail::median_sorted(sorted);
    }
    case AggregatorKind::kQuantile: {
      std::vector<double> sorted(values.begin(), values.end());
      std::sort(sorted.begin(), sorted.end());
      return detail::quantile_sorted(sorted, agg.q);
    }
    case AggregatorKind::kHodgesLehmann: {
      std::vector<double> walsh;
      walsh.reserve(values.size() * (values.size() + 1) / 2);
      for (std::size_t i = 0; i < values.size(); ++i) {
        for (std::size_t j = i; j < values.size(); ++j) {
          walsh.push_back(0.5 * (values[i] + values[j]));
        }
      }
      std::sort(walsh.begin(), walsh.end());
      return detail::median_sorted(walsh);
    }
  }
  throw std::logic_error("aggregate: unhandled kind");
}

namespace detail {

inline void check_members(std::size_t num_configurations, std::span<const int> members) {
  if (members.empty()) throw std::invalid_argument("set risk of an empty configuration set");
  for (int m : members) {
    if (m < 0 || static_cast<std::size_t>(m) >= num_configurations) {
      throw std::out_of_range("configuration index " + std::to_string(m) + " out of range");
    }
  }
}

// Set-risk over a bare table; shared by RiskMatrix and MipInstance paths.
inline double set_risk_table(const Matrix& risks, std::span<const int> members,
                             const AggregatorSpec& agg) {
  check_members(risks.cols, members);
  std::vector<double> mins(risks.rows);
  for (std::size_t k = 0; k < risks.rows; ++k) {
    double best = risks.at(k, static_cast<std::size_t>(members[0]));
    for (std::size_t i = 1; i < members.size(); ++i) {
      best = std::min(best, risks.at(k, static_cast<std::size_t>(members[i])));
    }
    mins[k] = best;
  }
  return aggregate(mins, agg);
}

}  // namespace detail

// G(Theta_def): aggregates, across datasets, the per-dataset minimum risk over
// the member configurations.
inline double set_risk(const RiskMatrix& matrix, std::span<const int> members,
                       const AggregatorSpec& agg) {
  return detail::set_risk_table(matrix.risks(), members, agg);
}

// Incremental cache for growing configuration sets: keeps the per-dataset
// minimum over the current members so that evaluating one more candidate is
// O(K) instead of O(K * |set|).
class SetRiskState {
 public:
  SetRiskState(const RiskMatrix& matrix, int first_member) {
    detail::check_members(matrix.num_configurations(), {&first_member, 1});
    members_.push_back(first_member);
    const auto row_count = matrix.num_datasets();
    mins_.resize(row_count);
    for (std::size_t k = 0; k < row_count; ++k) {
      mins_[k] = matrix.at(k, static_cast<std::size_t>(first_member));
    }
  }

  void add(const RiskMatrix& matrix, int member) {
    detail::check_members(matrix.num_configurations(), {&member, 1});
    if (contains(member)) {
      throw std::invalid_argument("configuration " + std::to_string(member) +
                                  " is already a member");
    }
    members_.push_back(member);
    for (std::size_t k = 0; k < mins_.size(); ++k) {
      mins_[k] = std::min(mins_[k], matrix.at(k, static_cast<std::size_t>(member)));
    }
  }

  bool contains(int member) const {
    return std::find(members_.begin(), members_.end(), member) != members_.end();
  }

  const std::vector<int>& member_indices() const { return members_; }
  std::span<const double> per_dataset_min() const { return mins_; }

 private:
  std::vector<int> members_;
  std::vector<double> mins_;
};

// G of (members  u  {candidate}) without mutating the state. Matches
// set_risk on the union exactly: minima are exact and the aggregator runs on
// the identical vector.
inline double marginal_set_risk(const SetRiskState& state, const RiskMatrix& matrix,
                                int candidate, const AggregatorSpec& agg) {
  detail::check_members(matrix.num_configurations(), {&candidate, 1});
  if (state.contains(candidate)) {
    throw std::invalid_argument("candidate " + std::to_string(candidate) +
                                " is already a member");
  }
  const std::span<const double> mins = state.per_dataset_min();
  std::vector<double> merged(mins.size());
  for (std::size_t k = 0; k < mins.size(); ++k) {
    merged[k] = std::min(mins[k], matrix.at(k, static_cast<std::size_t>(candidate)));
  }
  return aggregate(merged, agg);
}

}  // namespace defaultminer

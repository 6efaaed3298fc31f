#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "paraeval/core.hpp"
#include "paraeval/error.hpp"

namespace paraeval {

// ---------------------------------------------------------------------------
// Correlation
// ---------------------------------------------------------------------------

namespace detail {

template <typename DerivedA, typename DerivedB>
void check_correlation_inputs(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::LengthMismatch,
                "correlation inputs differ in length: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  if (a.size() < 3) throw Error(ErrorCode::TooFewInstances, "correlation needs at least 3 samples");
}

template <typename Derived>
bool is_constant(const Eigen::MatrixBase<Derived>& v) {
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) != v(0)) return false;
  }
  return true;
}

}  // namespace detail

/// Pearson's r of two equally long vectors (at least 3 samples). Throws
/// LengthMismatch, TooFewInstances, or ConstantInput.
template <typename DerivedA, typename DerivedB>
double pearson(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  detail::check_correlation_inputs(a, b);
  if (detail::is_constant(a) || detail::is_constant(b)) {
    throw Error(ErrorCode::ConstantInput, "correlation is undefined for a constant vector");
  }
  const Eigen::ArrayXd ca = a.template cast<double>().array() - a.template cast<double>().mean();
  const Eigen::ArrayXd cb = b.template cast<double>().array() - b.template cast<double>().mean();
  const double denom = std::sqrt((ca * ca).sum() * (cb * cb).sum());
  if (!(denom > 0.0)) throw Error(ErrorCode::ConstantInput, "correlation is undefined for a constant vector");
  return std::clamp((ca * cb).sum() / denom, -1.0, 1.0);
}

/// Fractional ranks starting at 1; tied values share the mean of their ranks.
template <typename Derived>
Eigen::VectorXd average_ranks(const Eigen::MatrixBase<Derived>& v) {
  const auto n = static_cast<std::size_t>(v.size());
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return v(x) < v(y); });
  Eigen::VectorXd ranks(v.size());
  for (std::size_t start = 0; start < n;) {
    std::size_t stop = start + 1;
    while (stop < n && v(order[stop]) == v(order[start])) ++stop;
    const double rank = 0.5 * static_cast<double>(start + 1 + stop);  // mean of start+1 .. stop
    for (std::size_t k = start; k < stop; ++k) ranks(order[k]) = rank;
    start = stop;
  }
  return ranks;
}

/// Spearman's rho: Pearson's r of the average-rank vectors.
template <typename DerivedA, typename DerivedB>
double spearman(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  detail::check_correlation_inputs(a, b);
  return pearson(average_ranks(a), average_ranks(b));
}

inline Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

double pearson(std::span<const double> a, std::span<const double> b);
double spearman(std::span<const double> a, std::span<const double> b);

struct CorrelationReport {
  std::string metric_id;
  double pearson = 0.0;
  double spearman = 0.0;
  std::size_t n = 0;
};

CorrelationReport correlate(std::string metric_id, std::span<const double> scores, std::span<const double> human);

/// Correlation restricted to the instances listed in `indices`.
CorrelationReport correlate_subset(std::string metric_id, std::span<const double> scores,
                                   std::span<const double> human, std::span<const std::size_t> indices);

// ---------------------------------------------------------------------------
// Distance partitions
// ---------------------------------------------------------------------------

enum class DistKey { ToReference, ToInput };

struct DistanceGroup {
  int group_index = 0;  // 1..4
  std::vector<std::size_t> instance_indices;
  DistKey dist_key = DistKey::ToReference;
  double min_dist = 0.0;
  double max_dist = 0.0;
};

/// Four groups of ascending distance. Instances are sorted by distance (ties by
/// index); with n = 4q + r the first r groups get q+1 members. Throws
/// TooFewInstances below 4 instances.
std::vector<DistanceGroup> quartile_groups(const Benchmark& benchmark, const ScoreVector& dist_scores,
                                           DistKey key = DistKey::ToReference);

struct CasePartition {
  std::vector<std::size_t> case1_indices;  // Dist(R,C) < Dist(X,C)
  std::vector<std::size_t> case2_indices;  // everything else, ties included
  std::pair<double, double> proportions{0.0, 0.0};
};

/// Splits instances by whether the candidate is closer to the reference than
/// to the input. Throws MissingReference when any instance lacks one.
CasePartition case_partition(const Benchmark& benchmark, const ScoreVector& dist_cr, const ScoreVector& dist_xc);

enum class CorrelationField { Pearson, Spearman };

/// Mean of (free - based) over aligned metric families.
double delta_free_vs_based(std::span<const CorrelationReport> reports_free,
                           std::span<const CorrelationReport> reports_based,
                           CorrelationField field = CorrelationField::Pearson);

// ---------------------------------------------------------------------------
// Attribution analysis
// ---------------------------------------------------------------------------

struct AttributionPair {
  std::size_t x_index = 0;  // position of the input group
  std::size_t j = 0;
  std::size_t k = 0;
  double dist_xj = 0.0;
  double dist_xk = 0.0;
  double sim_xj = 0.0;
  double sim_xk = 0.0;
  double delta_s = 0.0;
  double delta_h = 0.0;
  double delta_d = 0.0;
};

/// Pairs (j < k) sharing an input whose distances nearly match
/// (|dDist| <= eta1) while similarities clearly differ (|dSim| >= eta2).
/// With `dist_only` the similarity constraint is dropped.
std::vector<AttributionPair> build_s_sim(const Benchmark& benchmark, const ScoreVector& dist_scores,
                                         const ScoreVector& sim_scores, double eta1 = 0.05, double eta2 = 0.15,
                                         bool dist_only = false, unsigned jobs = 1);

/// The mirror image: |dSim| <= eta1 and |dDist| >= eta2.
std::vector<AttributionPair> build_s_div(const Benchmark& benchmark, const ScoreVector& dist_scores,
                                         const ScoreVector& sim_scores, double eta1 = 0.05, double eta2 = 0.10,
                                         unsigned jobs = 1);

/// (pairs with min(dist_xj, dist_xk) <= threshold, the rest).
std::pair<std::vector<AttributionPair>, std::vector<AttributionPair>> split_s_div(
    const std::vector<AttributionPair>& pairs, double threshold = 0.35);

enum class DeltaQuantity { DeltaS, DeltaD, DeltaM };

/// Correlation of a per-pair difference with the human-score difference. For
/// DeltaM, `metric` supplies per-instance values and the difference is
/// metric[j] - metric[k]. Throws TooFewPairs below 3 pairs.
CorrelationReport pair_delta_correlation(const std::vector<AttributionPair>& pairs, DeltaQuantity quantity,
                                         const ScoreVector* metric = nullptr);

}  // namespace paraeval

#include "paraeval/meta_eval.hpp"

#include "paraeval/parallel.hpp"

namespace paraeval {

double pearson(std::span<const double> a, std::span<const double> b) { return pearson(as_vector(a), as_vector(b)); }

double spearman(std::span<const double> a, std::span<const double> b) {
  return spearman(as_vector(a), as_vector(b));
}

CorrelationReport correlate(std::string metric_id, std::span<const double> scores, std::span<const double> human) {
  CorrelationReport report;
  report.metric_id = std::move(metric_id);
  report.pearson = pearson(scores, human);
  report.spearman = spearman(scores, human);
  report.n = scores.size();
  return report;
}

CorrelationReport correlate_subset(std::string metric_id, std::span<const double> scores,
                                   std::span<const double> human, std::span<const std::size_t> indices) {
  std::vector<double> s, h;
  s.reserve(indices.size());
  h.reserve(indices.size());
  for (auto i : indices) {
    s.push_back(scores[i]);
    h.push_back(human[i]);
  }
  return correlate(std::move(metric_id), s, h);
}

std::vector<DistanceGroup> quartile_groups(const Benchmark& benchmark, const ScoreVector& dist_scores, DistKey key) {
  check_aligned(benchmark, dist_scores);
  const std::size_t n = benchmark.size();
  if (n < 4) throw Error(ErrorCode::TooFewInstances, "quartile grouping needs at least 4 instances");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist_scores[a] < dist_scores[b]; });

  std::vector<DistanceGroup> groups(4);
  const std::size_t base = n / 4;
  const std::size_t extra = n % 4;
  std::size_t pos = 0;
  for (std::size_t g = 0; g < 4; ++g) {
    const std::size_t size = base + (g < extra ? 1 : 0);
    auto& group = groups[g];
    group.group_index = static_cast<int>(g + 1);
    group.dist_key = key;
    group.instance_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                  order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    group.min_dist = dist_scores[group.instance_indices.front()];
    group.max_dist = dist_scores[group.instance_indices.back()];
    pos += size;
  }
  return groups;
}

CasePartition case_partition(const Benchmark& benchmark, const ScoreVector& dist_cr, const ScoreVector& dist_xc) {
  check_aligned(benchmark, dist_cr);
  check_aligned(benchmark, dist_xc);
  if (!benchmark.all_have_reference()) {
    throw Error(ErrorCode::MissingReference, "case partition needs a reference for every instance");
  }
  CasePartition partition;
  for (std::size_t i = 0; i < benchmark.size(); ++i) {
    (dist_cr[i] < dist_xc[i] ? partition.case1_indices : partition.case2_indices).push_back(i);
  }
  if (!benchmark.empty()) {
    const auto n = static_cast<double>(benchmark.size());
    partition.proportions = {static_cast<double>(partition.case1_indices.size()) / n,
                             static_cast<double>(partition.case2_indices.size()) / n};
  }
  return partition;
}

double delta_free_vs_based(std::span<const CorrelationReport> reports_free,
                           std::span<const CorrelationReport> reports_based, CorrelationField field) {
  if (reports_free.size() != reports_based.size() || reports_free.empty()) {
    throw Error(ErrorCode::LengthMismatch, "free and reference-based reports must be aligned and non-empty");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < reports_free.size(); ++i) {
    sum += field == CorrelationField::Pearson ? reports_free[i].pearson - reports_based[i].pearson
                                              : reports_free[i].spearman - reports_based[i].spearman;
  }
  return sum / static_cast<double>(reports_free.size());
}

namespace {

template <typename Keep>
std::vector<AttributionPair> enumerate_pairs(const Benchmark& benchmark, const ScoreVector& dist,
                                             const ScoreVector& sim, unsigned jobs, Keep keep) {
  check_aligned(benchmark, dist);
  check_aligned(benchmark, sim);
  const auto& groups = benchmark.groups();
  std::vector<std::vector<AttributionPair>> per_group(groups.size());
  parallel_for(groups.size(), jobs, [&](std::size_t g) {
    const auto& idx = groups[g].indices;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        const std::size_t j = idx[a];
        const std::size_t k = idx[b];
        AttributionPair p;
        p.x_index = g;
        p.j = j;
        p.k = k;
        p.dist_xj = dist[j];
        p.dist_xk = dist[k];
        p.sim_xj = sim[j];
        p.sim_xk = sim[k];
        p.delta_s = p.sim_xj - p.sim_xk;
        p.delta_d = p.dist_xj - p.dist_xk;
        p.delta_h = benchmark.instance(j).human_score - benchmark.instance(k).human_score;
        if (keep(p)) per_group[g].push_back(p);
      }
    }
  });
  std::vector<AttributionPair> out;
  for (auto& v : per_group) out.insert(out.end(), v.begin(), v.end());
  return out;
}

void check_etas(double eta1, double eta2) {
  if (!(eta1 >= 0.0) || !(eta2 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "eta thresholds must be >= 0");
}

}  // namespace

std::vector<AttributionPair> build_s_sim(const Benchmark& benchmark, const ScoreVector& dist_scores,
                                         const ScoreVector& sim_scores, double eta1, double eta2, bool dist_only,
                                         unsigned jobs) {
  check_etas(eta1, eta2);
  return enumerate_pairs(benchmark, dist_scores, sim_scores, jobs, [&](const AttributionPair& p) {
    return std::abs(p.delta_d) <= eta1 && (dist_only || std::abs(p.delta_s) >= eta2);
  });
}

std::vector<AttributionPair> build_s_div(const Benchmark& benchmark, const ScoreVector& dist_scores,
                                         const ScoreVector& sim_scores, double eta1, double eta2, unsigned jobs) {
  check_etas(eta1, eta2);
  return enumerate_pairs(benchmark, dist_scores, sim_scores, jobs, [&](const AttributionPair& p) {
    return std::abs(p.delta_s) <= eta1 && std::abs(p.delta_d) >= eta2;
  });
}

std::pair<std::vector<AttributionPair>, std::vector<AttributionPair>> split_s_div(
    const std::vector<AttributionPair>& pairs, double threshold) {
  std::pair<std::vector<AttributionPair>, std::vector<AttributionPair>> out;
  for (const auto& p : pairs) {
    (std::min(p.dist_xj, p.dist_xk) <= threshold ? out.first : out.second).push_back(p);
  }
  return out;
}

CorrelationReport pair_delta_correlation(const std::vector<AttributionPair>& pairs, DeltaQuantity quantity,
                                         const ScoreVector* metric) {
  if (pairs.size() < 3) {
    throw Error(ErrorCode::TooFewPairs, "pair correlation needs at least 3 pairs, got " + std::to_string(pairs.size()));
  }
  if (quantity == DeltaQuantity::DeltaM && !metric) {
    throw Error(ErrorCode::InvalidArgument, "delta_m needs per-instance metric scores");
  }
  std::vector<double> delta(pairs.size()), dh(pairs.size());
  std::string id;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    dh[i] = p.delta_h;
    switch (quantity) {
      case DeltaQuantity::DeltaS: delta[i] = p.delta_s; break;
      case DeltaQuantity::DeltaD: delta[i] = p.delta_d; break;
      case DeltaQuantity::DeltaM: {
        if (std::max(p.j, p.k) >= metric->size()) {
          throw Error(ErrorCode::LengthMismatch, "metric scores do not cover the paired instances");
        }
        delta[i] = (*metric)[p.j] - (*metric)[p.k];
        break;
      }
    }
  }
  switch (quantity) {
    case DeltaQuantity::DeltaS: id = "delta_s"; break;
    case DeltaQuantity::DeltaD: id = "delta_d"; break;
    case DeltaQuantity::DeltaM: id = "delta_m:" + metric->metric_id; break;
  }
  return correlate(std::move(id), delta, dh);
}

}  // namespace paraeval

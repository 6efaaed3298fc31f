#pragma once

#include <optional>
#include <string>
#include <vector>

#include "paraeval/core.hpp"
#include "paraeval/lexical.hpp"
#include "paraeval/meta_eval.hpp"
#include "paraeval/parascore.hpp"
#include "paraeval/similarity.hpp"

namespace paraeval {

struct MetricOptions {
  BleuConfig bleu;
  double alpha = 0.2;  // iBLEU
  double beta = 4.0;   // BERT-iBLEU
  ParaScoreConfig parascore;
};

/// Metric ids accepted by score_metric, in a fixed order.
const std::vector<std::string>& known_metrics();
bool is_known_metric(const std::string& id);
/// True for metrics that read the reference.
bool needs_reference(const std::string& id);
/// The reference-free twin of a reference-based metric, if there is one.
std::optional<std::string> free_counterpart(const std::string& id);

double score_instance(const TokenizedInstance& inst, const std::string& metric_id, const MetricOptions& options,
                      const SimilarityBackend& backend);

/// Per-instance scores in benchmark order; identical for any `jobs`.
ScoreVector score_metric(const Benchmark& benchmark, const std::string& metric_id, const MetricOptions& options,
                         const SimilarityBackend& backend, unsigned jobs = 1);

/// NED from each candidate to its reference or to its input.
ScoreVector distance_scores(const Benchmark& benchmark, DistKey key, unsigned jobs = 1);

/// Sim(X, C) per instance under `backend`.
ScoreVector similarity_scores(const Benchmark& benchmark, const SimilarityBackend& backend, unsigned jobs = 1);

}  // namespace paraeval

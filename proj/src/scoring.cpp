#include "paraeval/scoring.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "paraeval/parallel.hpp"

namespace paraeval {

namespace {

const TokenSequence& reference_of(const TokenizedInstance& inst, const std::string& metric) {
  if (!inst.reference) throw Error(ErrorCode::MissingReference, "metric '" + metric + "' needs a reference");
  return *inst.reference;
}

using Scorer = std::function<double(const TokenizedInstance&, const MetricOptions&, const SimilarityBackend&,
                                    const std::string&)>;

const std::map<std::string, std::pair<bool, Scorer>>& registry() {
  static const std::map<std::string, std::pair<bool, Scorer>> table = {
      {"bleu4", {true, [](const auto& t, const auto& o, const auto&, const auto& id) {
                   return bleu(t.candidate, reference_of(t, id), o.bleu);
                 }}},
      {"bleu4-free", {false, [](const auto& t, const auto& o, const auto&, const auto&) {
                        return bleu(t.candidate, t.input, o.bleu);
                      }}},
      {"selfbleu", {false, [](const auto& t, const auto& o, const auto&, const auto&) {
                      return self_bleu(t.candidate, t.input, o.bleu);
                    }}},
      {"ibleu", {true, [](const auto& t, const auto& o, const auto&, const auto& id) {
                   return ibleu(t.candidate, reference_of(t, id), t.input, o.alpha, o.bleu);
                 }}},
      {"rouge1", {true, [](const auto& t, const auto&, const auto&, const auto& id) {
                    return rouge(t.candidate, reference_of(t, id), RougeVariant::R1).f1;
                  }}},
      {"rouge1-free", {false, [](const auto& t, const auto&, const auto&, const auto&) {
                         return rouge(t.candidate, t.input, RougeVariant::R1).f1;
                       }}},
      {"rouge2", {true, [](const auto& t, const auto&, const auto&, const auto& id) {
                    return rouge(t.candidate, reference_of(t, id), RougeVariant::R2).f1;
                  }}},
      {"rouge2-free", {false, [](const auto& t, const auto&, const auto&, const auto&) {
                         return rouge(t.candidate, t.input, RougeVariant::R2).f1;
                       }}},
      {"rougeL", {true, [](const auto& t, const auto&, const auto&, const auto& id) {
                    return rouge(t.candidate, reference_of(t, id), RougeVariant::RL).f1;
                  }}},
      {"rougeL-free", {false, [](const auto& t, const auto&, const auto&, const auto&) {
                         return rouge(t.candidate, t.input, RougeVariant::RL).f1;
                       }}},
      {"ned", {false, [](const auto& t, const auto&, const auto&, const auto&) { return ned(t.input, t.candidate); }}},
      {"bertscore", {true, [](const auto& t, const auto&, const auto& b, const auto& id) {
                       return b.greedy(t.candidate, reference_of(t, id)).f1;
                     }}},
      {"bertscore-free", {false, [](const auto& t, const auto&, const auto& b, const auto&) {
                            return b.greedy(t.candidate, t.input).f1;
                          }}},
      {"bert-ibleu", {false, [](const auto& t, const auto& o, const auto& b, const auto&) {
                        return bert_ibleu(t.input, t.candidate, o.beta, b, o.bleu);
                      }}},
      {"parascore", {true, [](const auto& t, const auto& o, const auto& b, const auto&) {
                       return parascore(t.input, t.reference, t.candidate, o.parascore, b).total;
                     }}},
      {"parascore-free", {false, [](const auto& t, const auto& o, const auto& b, const auto&) {
                            return parascore_free(t.input, t.candidate, o.parascore, b).total;
                          }}},
  };
  return table;
}

const std::pair<bool, Scorer>& lookup(const std::string& id) {
  const auto& table = registry();
  auto it = table.find(id);
  if (it == table.end()) throw Error(ErrorCode::InvalidArgument, "unknown metric '" + id + "'");
  return it->second;
}

}  // namespace

const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> ids = {
      "bleu4",  "bleu4-free",  "selfbleu",  "ibleu",     "rouge1",         "rouge1-free", "rouge2",    "rouge2-free",
      "rougeL", "rougeL-free", "ned",       "bertscore", "bertscore-free", "bert-ibleu",  "parascore", "parascore-free",
  };
  return ids;
}

bool is_known_metric(const std::string& id) { return registry().contains(id); }

bool needs_reference(const std::string& id) { return lookup(id).first; }

std::optional<std::string> free_counterpart(const std::string& id) {
  if (!needs_reference(id) || id == "ibleu") return std::nullopt;
  return id + "-free";
}

double score_instance(const TokenizedInstance& inst, const std::string& metric_id, const MetricOptions& options,
                      const SimilarityBackend& backend) {
  return lookup(metric_id).second(inst, options, backend, metric_id);
}

ScoreVector score_metric(const Benchmark& benchmark, const std::string& metric_id, const MetricOptions& options,
                         const SimilarityBackend& backend, unsigned jobs) {
  const auto& scorer = lookup(metric_id).second;
  options.bleu.validate();
  options.parascore.validate();
  ScoreVector out{metric_id, std::vector<double>(benchmark.size())};
  parallel_for(benchmark.size(), jobs,
               [&](std::size_t i) { out.values[i] = scorer(benchmark.tokens(i), options, backend, metric_id); });
  return out;
}

ScoreVector distance_scores(const Benchmark& benchmark, DistKey key, unsigned jobs) {
  ScoreVector out{key == DistKey::ToReference ? "ned-to-reference" : "ned-to-input",
                  std::vector<double>(benchmark.size())};
  parallel_for(benchmark.size(), jobs, [&](std::size_t i) {
    const auto& t = benchmark.tokens(i);
    out.values[i] = key == DistKey::ToReference ? ned(reference_of(t, "ned-to-reference"), t.candidate)
                                                : ned(t.input, t.candidate);
  });
  return out;
}

ScoreVector similarity_scores(const Benchmark& benchmark, const SimilarityBackend& backend, unsigned jobs) {
  ScoreVector out{"sim", std::vector<double>(benchmark.size())};
  parallel_for(benchmark.size(), jobs, [&](std::size_t i) {
    const auto& t = benchmark.tokens(i);
    out.values[i] = backend.sim(t.input, t.candidate);
  });
  return out;
}

}  // namespace paraeval

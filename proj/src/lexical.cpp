#include "paraeval/lexical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "paraeval/error.hpp"

namespace paraeval {

PrecisionRecallF1 PrecisionRecallF1::from(double precision, double recall) {
  const double sum = precision + recall;
  return {precision, recall, sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum};
}

void BleuConfig::validate() const {
  if (max_n < 1 || max_n > 8) throw Error(ErrorCode::InvalidArgument, "BLEU max_n must lie in [1,8]");
  if (smoothing == Smoothing::AddK && !(k > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "add-k smoothing needs k > 0");
  }
}

namespace {

void require_non_empty(const TokenSequence& a, const TokenSequence& b, const char* what) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::EmptySequence, std::string(what) + " needs non-empty candidate and target");
  }
}

std::size_t clipped_matches(const NgramCounts& cand, const NgramCounts& target) {
  std::size_t matches = 0;
  for (const auto& [gram, count] : cand) {
    if (auto it = target.find(gram); it != target.end()) matches += std::min(count, it->second);
  }
  return matches;
}

}  // namespace

double bleu(const TokenSequence& candidate, const TokenSequence& target, const BleuConfig& config) {
  config.validate();
  require_non_empty(candidate, target, "bleu");

  double log_sum = 0.0;
  for (int n = 1; n <= config.max_n; ++n) {
    const auto cand = ngrams(candidate, static_cast<std::size_t>(n));
    const auto targ = ngrams(target, static_cast<std::size_t>(n));
    const auto matches = static_cast<double>(clipped_matches(cand, targ));
    const auto total = static_cast<double>(total_count(cand));
    double precision = 0.0;
    if (config.smoothing == Smoothing::AddK) {
      precision = (matches + config.k) / (total + config.k);
    } else if (total > 0.0) {
      precision = matches / total;
    }
    if (precision <= 0.0) return 0.0;
    log_sum += std::log(precision);
  }

  const auto c = static_cast<double>(candidate.size());
  const auto r = static_cast<double>(target.size());
  const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);
  const double score = brevity * std::exp(log_sum / config.max_n);
  return std::clamp(score, 0.0, 1.0);
}

double self_bleu(const TokenSequence& candidate, const TokenSequence& input, const BleuConfig& config) {
  return bleu(candidate, input, config);
}

double ibleu(const TokenSequence& candidate, const TokenSequence& reference, const TokenSequence& input,
             double alpha, const BleuConfig& config) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "iBLEU alpha must lie in [0,1]");
  const double based = bleu(candidate, reference, config);
  if (alpha == 0.0) return based;
  return based - alpha * self_bleu(candidate, input, config);
}

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PrecisionRecallF1 rouge(const TokenSequence& candidate, const TokenSequence& target, RougeVariant variant) {
  require_non_empty(candidate, target, "rouge");
  double overlap = 0.0;
  double cand_total = 0.0;
  double targ_total = 0.0;
  if (variant == RougeVariant::RL) {
    overlap = static_cast<double>(lcs_length(candidate, target));
    cand_total = static_cast<double>(candidate.size());
    targ_total = static_cast<double>(target.size());
  } else {
    const std::size_t n = variant == RougeVariant::R1 ? 1 : 2;
    const auto cand = ngrams(candidate, n);
    const auto targ = ngrams(target, n);
    overlap = static_cast<double>(clipped_matches(cand, targ));
    cand_total = static_cast<double>(total_count(cand));
    targ_total = static_cast<double>(total_count(targ));
  }
  // A single-token side has no bigrams; its ratio is reported as 0.
  const double p = cand_total > 0.0 ? overlap / cand_total : 0.0;
  const double r = targ_total > 0.0 ? overlap / targ_total : 0.0;
  return PrecisionRecallF1::from(p, r);
}

std::size_t edit_distance(const TokenSequence& a, const TokenSequence& b) {
  const auto& shorter = a.size() <= b.size() ? a : b;
  const auto& longer = a.size() <= b.size() ? b : a;
  std::vector<std::size_t> row(shorter.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= longer.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= shorter.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t cost = longer[i - 1] == shorter[j - 1] ? 0 : 1;
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + cost});
      diag = up;
    }
  }
  return row[shorter.size()];
}

double ned(const TokenSequence& a, const TokenSequence& b) {
  if (a.empty() && b.empty()) throw Error(ErrorCode::BothEmpty, "normalized edit distance of two empty sequences");
  return static_cast<double>(edit_distance(a, b)) / static_cast<double>(std::max(a.size(), b.size()));
}

}  // namespace paraeval

#pragma once

#include <cstddef>

#include "paraeval/core.hpp"

namespace paraeval {

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  /// f1 is 0 when precision + recall is 0, the harmonic mean otherwise.
  static PrecisionRecallF1 from(double precision, double recall);
};

enum class Smoothing { None, AddK };

struct BleuConfig {
  int max_n = 4;
  Smoothing smoothing = Smoothing::AddK;
  double k = 1.0;

  /// Throws InvalidArgument unless 1 <= max_n <= 8 and k > 0 under add-k.
  void validate() const;
};

/// Sentence-level BLEU: geometric mean of clipped n-gram precisions for
/// orders 1..max_n times the brevity penalty. Under add-k smoothing each
/// order's precision is (matches + k) / (candidate n-grams + k). Without
/// smoothing any zero precision (including an order with no candidate
/// n-grams) makes the score 0.
double bleu(const TokenSequence& candidate, const TokenSequence& target, const BleuConfig& config = {});

/// BLEU of the candidate against its own input; high values flag copying.
double self_bleu(const TokenSequence& candidate, const TokenSequence& input, const BleuConfig& config = {});

/// bleu(candidate, reference) - alpha * self_bleu(candidate, input). May be negative.
double ibleu(const TokenSequence& candidate, const TokenSequence& reference, const TokenSequence& input,
             double alpha, const BleuConfig& config = {});

enum class RougeVariant { R1, R2, RL };

PrecisionRecallF1 rouge(const TokenSequence& candidate, const TokenSequence& target, RougeVariant variant);

/// Length of the longest common subsequence.
std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b);

/// Levenshtein distance with unit insert, delete, and substitute costs.
std::size_t edit_distance(const TokenSequence& a, const TokenSequence& b);

/// edit_distance / max(|a|, |b|). Throws BothEmpty when both are empty.
double ned(const TokenSequence& a, const TokenSequence& b);

}  // namespace paraeval

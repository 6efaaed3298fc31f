#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace paraeval {

enum class TokenScheme { Whitespace, Character };

std::string_view to_string(TokenScheme scheme);
/// Accepts "whitespace" or "character"; throws InvalidArgument otherwise.
TokenScheme parse_token_scheme(std::string_view name);

/// Character tokens for CJK language tags (zh, ja, ko and their regional
/// variants), whitespace tokens for everything else.
TokenScheme default_scheme_for_language(std::string_view language_tag);

struct TokenizerConfig {
  TokenScheme scheme = TokenScheme::Whitespace;
  // ASCII case folding; only applied under the whitespace scheme.
  bool lowercase = true;
};

struct TokenSequence {
  std::vector<std::string> tokens;
  TokenScheme scheme = TokenScheme::Whitespace;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens[i]; }

  /// Inverse of tokenization: space-joined for whitespace tokens, concatenated
  /// for character tokens.
  std::string joined() const;

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

TokenSequence tokenize(std::string_view text, TokenScheme scheme, bool lowercase = true);
TokenSequence tokenize(std::string_view text, const TokenizerConfig& config);

using Ngram = std::vector<std::string>;
using NgramCounts = std::map<Ngram, std::size_t>;

/// All contiguous n-grams of `seq` with multiplicity. `n` must be >= 1.
NgramCounts ngrams(const TokenSequence& seq, std::size_t n);

/// Sum of the multiplicities in `counts`.
std::size_t total_count(const NgramCounts& counts);

struct EvalInstance {
  std::string input;
  std::optional<std::string> reference;
  std::string candidate;
  double human_score = 0.0;

  friend bool operator==(const EvalInstance&, const EvalInstance&) = default;
};

struct TokenizedInstance {
  TokenSequence input;
  std::optional<TokenSequence> reference;
  TokenSequence candidate;
};

struct InputGroup {
  std::string input;
  std::vector<std::size_t> indices;
};

/// A validated, immutable collection of instances grouped by input sentence.
///
/// Groups appear in order of first occurrence of their input text; indices
/// inside a group are ascending. Tokenized forms are computed once at
/// construction under the benchmark's tokenizer.
class Benchmark {
 public:
  /// Validates every instance (non-empty input and candidate, finite score in
  /// [0,1]) and that instances sharing an input share the same reference.
  static Benchmark build(std::string name, std::string language_tag, TokenizerConfig tokenizer,
                         std::vector<EvalInstance> instances);

  const std::string& name() const noexcept { return name_; }
  const std::string& language_tag() const noexcept { return language_tag_; }
  const TokenizerConfig& tokenizer() const noexcept { return tokenizer_; }

  std::size_t size() const noexcept { return instances_.size(); }
  bool empty() const noexcept { return instances_.empty(); }
  const std::vector<EvalInstance>& instances() const noexcept { return instances_; }
  const EvalInstance& instance(std::size_t i) const { return instances_.at(i); }
  const TokenizedInstance& tokens(std::size_t i) const { return tokenized_.at(i); }
  const std::vector<InputGroup>& groups() const noexcept { return groups_; }

  bool all_have_reference() const;
  std::vector<double> human_scores() const;

  /// New benchmark containing the given groups (by position in groups()), in
  /// the given order, keeping this benchmark's name, tag, and tokenizer.
  Benchmark select_groups(const std::vector<std::size_t>& group_positions) const;

 private:
  Benchmark() = default;

  std::string name_;
  std::string language_tag_;
  TokenizerConfig tokenizer_;
  std::vector<EvalInstance> instances_;
  std::vector<TokenizedInstance> tokenized_;
  std::vector<InputGroup> groups_;
};

/// Per-instance outputs of one metric, aligned with a benchmark's instance order.
struct ScoreVector {
  std::string metric_id;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Throws LengthMismatch / DomainError when `scores` is not aligned with
/// `benchmark` or holds non-finite values.
void check_aligned(const Benchmark& benchmark, const ScoreVector& scores);

}  // namespace paraeval

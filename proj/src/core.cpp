#include "paraeval/core.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "paraeval/error.hpp"

namespace paraeval {

std::string_view to_string(TokenScheme scheme) {
  return scheme == TokenScheme::Whitespace ? "whitespace" : "character";
}

TokenScheme parse_token_scheme(std::string_view name) {
  if (name == "whitespace") return TokenScheme::Whitespace;
  if (name == "character") return TokenScheme::Character;
  throw Error(ErrorCode::InvalidArgument, "unknown tokenization scheme '" + std::string(name) + "'");
}

TokenScheme default_scheme_for_language(std::string_view tag) {
  const auto primary = tag.substr(0, tag.find_first_of("-_"));
  std::string lowered;
  for (char ch : primary) lowered += static_cast<char>(ch >= 'A' && ch <= 'Z' ? ch - 'A' + 'a' : ch);
  if (lowered == "zh" || lowered == "ja" || lowered == "ko") return TokenScheme::Character;
  return TokenScheme::Whitespace;
}

namespace {

struct Scalar {
  char32_t value;
  std::size_t length;  // bytes consumed
};

// Invalid or truncated sequences decode as a single byte so that no input is
// ever dropped; the raw byte is carried through unchanged.
Scalar decode_utf8(std::string_view s, std::size_t pos) {
  const auto lead = static_cast<unsigned char>(s[pos]);
  std::size_t length = 0;
  char32_t value = 0;
  if (lead < 0x80) return {lead, 1};
  if ((lead & 0xE0) == 0xC0) {
    length = 2;
    value = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    length = 3;
    value = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    length = 4;
    value = lead & 0x07;
  } else {
    return {0xFFFD, 1};
  }
  if (pos + length > s.size()) return {0xFFFD, 1};
  for (std::size_t i = 1; i < length; ++i) {
    const auto cont = static_cast<unsigned char>(s[pos + i]);
    if ((cont & 0xC0) != 0x80) return {0xFFFD, 1};
    value = (value << 6) | (cont & 0x3F);
  }
  return {value, length};
}

bool is_unicode_space(char32_t c) {
  switch (c) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

void fold_ascii(std::string& token) {
  for (auto& ch : token) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
}

}  // namespace

std::string TokenSequence::joined() const {
  std::string out;
  const bool spaced = scheme == TokenScheme::Whitespace;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (spaced && i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

TokenSequence tokenize(std::string_view text, TokenScheme scheme, bool lowercase) {
  TokenSequence seq;
  seq.scheme = scheme;
  std::string current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto [cp, len] = decode_utf8(text, pos);
    const auto bytes = text.substr(pos, len);
    pos += len;
    if (is_unicode_space(cp)) {
      if (!current.empty()) seq.tokens.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (scheme == TokenScheme::Character) {
      seq.tokens.emplace_back(bytes);
    } else {
      current.append(bytes);
    }
  }
  if (!current.empty()) seq.tokens.push_back(std::move(current));
  if (lowercase && scheme == TokenScheme::Whitespace) {
    for (auto& token : seq.tokens) fold_ascii(token);
  }
  return seq;
}

TokenSequence tokenize(std::string_view text, const TokenizerConfig& config) {
  return tokenize(text, config.scheme, config.lowercase);
}

NgramCounts ngrams(const TokenSequence& seq, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "n-gram order must be >= 1");
  NgramCounts counts;
  if (seq.size() < n) return counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) {
    ++counts[Ngram(seq.tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   seq.tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::size_t total_count(const NgramCounts& counts) {
  std::size_t total = 0;
  for (const auto& [gram, count] : counts) total += count;
  return total;
}

Benchmark Benchmark::build(std::string name, std::string language_tag, TokenizerConfig tokenizer,
                           std::vector<EvalInstance> instances) {
  Benchmark b;
  b.name_ = std::move(name);
  b.language_tag_ = std::move(language_tag);
  b.tokenizer_ = tokenizer;

  std::unordered_map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const auto where = " (instance " + std::to_string(i) + ")";
    if (inst.input.empty()) throw Error(ErrorCode::ParseError, "empty input text" + where);
    if (inst.candidate.empty()) throw Error(ErrorCode::ParseError, "empty candidate text" + where);
    if (!std::isfinite(inst.human_score) || inst.human_score < 0.0 || inst.human_score > 1.0) {
      throw Error(ErrorCode::ScoreOutOfRange,
                  "human score " + std::to_string(inst.human_score) + " outside [0,1]" + where);
    }
    auto [it, inserted] = group_of.try_emplace(inst.input, b.groups_.size());
    if (inserted) {
      b.groups_.push_back(InputGroup{inst.input, {}});
    } else {
      const auto& first = instances[b.groups_[it->second].indices.front()];
      if (first.reference != inst.reference) {
        throw Error(ErrorCode::InconsistentGroup, "instances sharing an input disagree on the reference" + where);
      }
    }
    b.groups_[it->second].indices.push_back(i);
  }

  b.tokenized_.reserve(instances.size());
  for (const auto& inst : instances) {
    TokenizedInstance t;
    t.input = tokenize(inst.input, tokenizer);
    t.candidate = tokenize(inst.candidate, tokenizer);
    if (inst.reference) t.reference = tokenize(*inst.reference, tokenizer);
    if (t.input.empty() || t.candidate.empty() || (t.reference && t.reference->empty())) {
      throw Error(ErrorCode::ParseError,
                  "text without tokens (instance " + std::to_string(b.tokenized_.size()) + ")");
    }
    b.tokenized_.push_back(std::move(t));
  }
  b.instances_ = std::move(instances);
  return b;
}

bool Benchmark::all_have_reference() const {
  for (const auto& inst : instances_) {
    if (!inst.reference) return false;
  }
  return true;
}

std::vector<double> Benchmark::human_scores() const {
  std::vector<double> h;
  h.reserve(instances_.size());
  for (const auto& inst : instances_) h.push_back(inst.human_score);
  return h;
}

Benchmark Benchmark::select_groups(const std::vector<std::size_t>& group_positions) const {
  std::vector<EvalInstance> picked;
  for (auto g : group_positions) {
    for (auto i : groups_.at(g).indices) picked.push_back(instances_[i]);
  }
  return build(name_, language_tag_, tokenizer_, std::move(picked));
}

void check_aligned(const Benchmark& benchmark, const ScoreVector& scores) {
  if (scores.size() != benchmark.size()) {
    throw Error(ErrorCode::LengthMismatch, "score vector '" + scores.metric_id + "' has " +
                                               std::to_string(scores.size()) + " values for " +
                                               std::to_string(benchmark.size()) + " instances");
  }
  for (double v : scores.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::DomainError, "non-finite value in '" + scores.metric_id + "'");
  }
}

}  // namespace paraeval

#pragma once

// Slow, definitional re-implementations used to cross-check the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

namespace detail {

inline std::size_t edit_rec(const Tokens& a, const Tokens& b, std::size_t i, std::size_t j,
                            std::vector<std::vector<long>>& memo) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  auto& slot = memo[i][j];
  if (slot >= 0) return static_cast<std::size_t>(slot);
  std::size_t best;
  if (a[i] == b[j]) {
    best = edit_rec(a, b, i + 1, j + 1, memo);
  } else {
    best = 1 + std::min({edit_rec(a, b, i + 1, j, memo), edit_rec(a, b, i, j + 1, memo),
                         edit_rec(a, b, i + 1, j + 1, memo)});
  }
  slot = static_cast<long>(best);
  return best;
}

}  // namespace detail

// Levenshtein distance by the suffix recursion, memoized on (i, j).
inline std::size_t edit_distance(const Tokens& a, const Tokens& b) {
  std::vector<std::vector<long>> memo(a.size() + 1, std::vector<long>(b.size() + 1, -1));
  return detail::edit_rec(a, b, 0, 0, memo);
}

inline bool is_subsequence(const Tokens& sub, const Tokens& seq) {
  std::size_t i = 0;
  for (const auto& t : seq) {
    if (i < sub.size() && sub[i] == t) ++i;
  }
  return i == sub.size();
}

// Longest common subsequence by enumerating every subsequence of `a`.
inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::size_t best = 0;
  for (unsigned long mask = 0; mask < (1ul << a.size()); ++mask) {
    Tokens sub;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (mask & (1ul << i)) sub.push_back(a[i]);
    }
    if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
  }
  return best;
}

inline long double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Rank = 1 + (#smaller) + (#equal others) / 2.
inline std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::size_t less = 0, equal = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] < x[i]) ++less;
      if (j != i && x[j] == x[i]) ++equal;
    }
    r[i] = 1.0 + static_cast<double>(less) + static_cast<double>(equal) / 2.0;
  }
  return r;
}

inline long double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

inline std::size_t occurrences(const Tokens& seq, const Tokens& gram) {
  std::size_t count = 0;
  for (std::size_t i = 0; i + gram.size() <= seq.size(); ++i) {
    if (std::equal(gram.begin(), gram.end(), seq.begin() + static_cast<long>(i))) ++count;
  }
  return count;
}

// Sentence BLEU with add-k on every order, counting n-grams by scanning.
inline double bleu(const Tokens& cand, const Tokens& target, int max_n, double k) {
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const std::size_t un = static_cast<std::size_t>(n);
    double clipped = 0.0;
    double total = cand.size() >= un ? static_cast<double>(cand.size() - un + 1) : 0.0;
    std::vector<Tokens> seen;
    for (std::size_t i = 0; i + un <= cand.size(); ++i) {
      Tokens gram(cand.begin() + static_cast<long>(i), cand.begin() + static_cast<long>(i + un));
      if (std::find(seen.begin(), seen.end(), gram) != seen.end()) continue;
      seen.push_back(gram);
      clipped += static_cast<double>(std::min(occurrences(cand, gram), occurrences(target, gram)));
    }
    log_sum += std::log((clipped + k) / (total + k));
  }
  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(target.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / max_n);
}

}  // namespace oracle

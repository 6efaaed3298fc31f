#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "paraeval/core.hpp"
#include "paraeval/error.hpp"
#include "paraeval/lexical.hpp"

namespace paraeval {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One embedding row per token. Providers hand these out with unit-norm rows.
template <typename Scalar>
struct BasicTokenEmbeddings {
  RowMatrix<Scalar> matrix;
  std::vector<std::string> tokens;

  Eigen::Index rows() const noexcept { return matrix.rows(); }
  Eigen::Index dim() const noexcept { return matrix.cols(); }
};

using TokenEmbeddings = BasicTokenEmbeddings<double>;

/// Scales every non-zero row to unit L2 norm in place.
template <typename Derived>
void normalize_rows(Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto norm = m.row(i).norm();
    if (norm > 0) m.row(i) /= norm;
  }
}

struct IdfTable {
  std::unordered_map<std::string, double> weights;
  double default_weight = 0.0;

  double weight(const std::string& token) const {
    auto it = weights.find(token);
    return it == weights.end() ? default_weight : it->second;
  }
};

enum class IdfSource { References, Inputs };

/// weight(t) = ln((N+1)/(df(t)+1)) over the distinct source sentences of each
/// input group; unseen tokens get ln(N+1).
IdfTable build_idf(const Benchmark& benchmark, IdfSource source);

namespace detail {

// Dot products summed in a fixed order, so that swapping the two matrices
// yields exactly the transposed result.
template <typename DerivedA, typename DerivedB>
Eigen::MatrixXd pairwise_dots(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) acc += double(a(i, k)) * double(b(j, k));
      out(i, j) = acc;
    }
  }
  return out;
}

inline double weighted_mean(const Eigen::VectorXd& values, const Eigen::VectorXd& weights) {
  const double total = weights.sum();
  if (!(total > 0.0)) return values.mean();
  return values.dot(weights) / total;
}

}  // namespace detail

/// Greedy matching over unit-norm rows: each candidate row is matched to its
/// most similar target row (precision) and vice versa (recall). Negative
/// cosines count as 0. Weights, when given, are per-row importance weights;
/// a side whose weights sum to 0 falls back to uniform weighting.
template <typename DerivedC, typename DerivedT>
PrecisionRecallF1 greedy_match(const Eigen::MatrixBase<DerivedC>& cand, const Eigen::MatrixBase<DerivedT>& targ,
                               const Eigen::VectorXd* cand_weights = nullptr,
                               const Eigen::VectorXd* targ_weights = nullptr) {
  if (cand.rows() == 0 || targ.rows() == 0) throw Error(ErrorCode::EmptyEmbeddings, "greedy matching needs rows on both sides");
  if (cand.cols() != targ.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "embedding widths differ: " + std::to_string(cand.cols()) + " vs " +
                                                  std::to_string(targ.cols()));
  }
  const Eigen::MatrixXd cos = detail::pairwise_dots(cand, targ).cwiseMax(0.0);
  const Eigen::VectorXd best_for_cand = cos.rowwise().maxCoeff();
  const Eigen::VectorXd best_for_targ = cos.colwise().maxCoeff().transpose();

  const double p = cand_weights ? detail::weighted_mean(best_for_cand, *cand_weights) : best_for_cand.mean();
  const double r = targ_weights ? detail::weighted_mean(best_for_targ, *targ_weights) : best_for_targ.mean();
  return PrecisionRecallF1::from(std::clamp(p, 0.0, 1.0), std::clamp(r, 0.0, 1.0));
}

PrecisionRecallF1 greedy_match_score(const TokenEmbeddings& cand, const TokenEmbeddings& targ,
                                     const IdfTable* idf = nullptr);

/// Cosine of the mean-pooled rows, clamped to [0,1].
double mean_pool_cosine(const TokenEmbeddings& a, const TokenEmbeddings& b);

enum class ProviderKind { DeterministicFallback, EmbeddingFile, RemoteService };
enum class SentenceSimMode { GreedyF1, MeanPoolCosine };

std::string_view to_string(SentenceSimMode mode);
SentenceSimMode parse_sim_mode(std::string_view name);

struct SimilarityBackendDescriptor {
  ProviderKind provider = ProviderKind::DeterministicFallback;
  SentenceSimMode sentence_sim_mode = SentenceSimMode::GreedyF1;
  bool idf_enabled = false;
  std::string endpoint_or_path;

  int fallback_dim = 64;
  std::uint64_t fallback_seed = 0x5eed;
  std::size_t max_in_flight = 8;
  int remote_timeout_ms = 10000;
  int remote_retries = 3;

  void validate() const;

  /// "fallback", "file:PATH" or "remote:URL".
  static SimilarityBackendDescriptor parse(std::string_view spec);
  std::string describe() const;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// Must be safe to call concurrently.
  virtual TokenEmbeddings embed(const TokenSequence& seq) const = 0;
  virtual Eigen::Index dim() const = 0;
  virtual std::string id() const = 0;
};

/// Hash-seeded pseudo-random unit vectors, one per distinct token string.
class FallbackProvider final : public EmbeddingProvider {
 public:
  explicit FallbackProvider(int dim = 64, std::uint64_t seed = 0x5eed);

  TokenEmbeddings embed(const TokenSequence& seq) const override;
  Eigen::Index dim() const override { return dim_; }
  std::string id() const override;

  Eigen::VectorXd token_vector(std::string_view token) const;

 private:
  int dim_;
  std::uint64_t seed_;
};

/// Token vectors read from a text file: a header line with the width, then one
/// "token v1 ... vdim" record per line. A `<unk>` record, when present, serves
/// out-of-vocabulary tokens.
class FileProvider final : public EmbeddingProvider {
 public:
  static constexpr std::string_view kDefaultToken = "<unk>";

  static std::shared_ptr<FileProvider> load(const std::string& path);

  TokenEmbeddings embed(const TokenSequence& seq) const override;
  Eigen::Index dim() const override { return dim_; }
  std::string id() const override { return "file:" + path_; }

 private:
  FileProvider() = default;

  std::string path_;
  Eigen::Index dim_ = 0;
  std::unordered_map<std::string, Eigen::Index> index_;
  RowMatrix<double> vectors_;
  std::optional<Eigen::Index> default_row_;
};

std::shared_ptr<EmbeddingProvider> make_provider(const SimilarityBackendDescriptor& descriptor);

/// Sim(·,·) over a configured provider, with a per-backend embedding cache.
/// Thread-safe.
class SimilarityBackend {
 public:
  explicit SimilarityBackend(SimilarityBackendDescriptor descriptor);
  SimilarityBackend(SimilarityBackendDescriptor descriptor, std::shared_ptr<EmbeddingProvider> provider);

  const SimilarityBackendDescriptor& descriptor() const noexcept { return descriptor_; }
  const EmbeddingProvider& provider() const noexcept { return *provider_; }

  /// IDF weighting is applied in greedy matching only when the descriptor
  /// enables it and a table has been attached.
  void set_idf(IdfTable table);
  const IdfTable* idf() const noexcept;

  std::shared_ptr<const TokenEmbeddings> embed(const TokenSequence& seq) const;
  PrecisionRecallF1 greedy(const TokenSequence& cand, const TokenSequence& targ) const;
  double sim(const TokenSequence& a, const TokenSequence& b) const;

 private:
  SimilarityBackendDescriptor descriptor_;
  std::shared_ptr<EmbeddingProvider> provider_;
  std::optional<IdfTable> idf_;
  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<std::string, std::shared_ptr<const TokenEmbeddings>> cache_;
};

TokenEmbeddings embed(const SimilarityBackendDescriptor& descriptor, const TokenSequence& seq);
double sim(const SimilarityBackendDescriptor& descriptor, const TokenSequence& a, const TokenSequence& b);

}  // namespace paraeval

#include "paraeval/similarity.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "paraeval/remote.hpp"

namespace paraeval {

IdfTable build_idf(const Benchmark& benchmark, IdfSource source) {
  if (benchmark.empty()) throw Error(ErrorCode::TooFewInstances, "IDF needs a non-empty benchmark");
  std::unordered_map<std::string, std::size_t> df;
  std::size_t sentences = 0;
  for (const auto& group : benchmark.groups()) {
    const auto& toks = benchmark.tokens(group.indices.front());
    const TokenSequence* seq = &toks.input;
    if (source == IdfSource::References) {
      if (!toks.reference) continue;
      seq = &*toks.reference;
    }
    ++sentences;
    for (const auto& t : std::set<std::string>(seq->tokens.begin(), seq->tokens.end())) ++df[t];
  }
  const double n = static_cast<double>(sentences);
  IdfTable table;
  table.default_weight = std::log(n + 1.0);
  for (const auto& [token, count] : df) {
    table.weights.emplace(token, std::log((n + 1.0) / (static_cast<double>(count) + 1.0)));
  }
  return table;
}

PrecisionRecallF1 greedy_match_score(const TokenEmbeddings& cand, const TokenEmbeddings& targ, const IdfTable* idf) {
  if (!idf) return greedy_match(cand.matrix, targ.matrix);
  auto weights_for = [idf](const TokenEmbeddings& e) {
    Eigen::VectorXd w(e.rows());
    for (Eigen::Index i = 0; i < e.rows(); ++i) w(i) = idf->weight(e.tokens[static_cast<std::size_t>(i)]);
    return w;
  };
  const auto wc = weights_for(cand);
  const auto wt = weights_for(targ);
  return greedy_match(cand.matrix, targ.matrix, &wc, &wt);
}

double mean_pool_cosine(const TokenEmbeddings& a, const TokenEmbeddings& b) {
  if (a.rows() == 0 || b.rows() == 0) throw Error(ErrorCode::EmptyEmbeddings, "mean pooling needs rows on both sides");
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "embedding widths differ");
  const Eigen::RowVectorXd ma = a.matrix.colwise().mean();
  const Eigen::RowVectorXd mb = b.matrix.colwise().mean();
  const double denom = ma.norm() * mb.norm();
  if (denom == 0.0) return 0.0;
  return std::clamp(ma.dot(mb) / denom, 0.0, 1.0);
}

std::string_view to_string(SentenceSimMode mode) {
  return mode == SentenceSimMode::GreedyF1 ? "greedy_f1" : "mean_pool_cosine";
}

SentenceSimMode parse_sim_mode(std::string_view name) {
  if (name == "greedy_f1" || name == "greedy-f1") return SentenceSimMode::GreedyF1;
  if (name == "mean_pool_cosine" || name == "mean-pool-cosine") return SentenceSimMode::MeanPoolCosine;
  throw Error(ErrorCode::InvalidArgument, "unknown sentence similarity mode '" + std::string(name) + "'");
}

void SimilarityBackendDescriptor::validate() const {
  if (provider != ProviderKind::DeterministicFallback && endpoint_or_path.empty()) {
    throw Error(ErrorCode::InvalidArgument, "file and remote providers need a path or endpoint");
  }
  if (fallback_dim < 1) throw Error(ErrorCode::InvalidArgument, "fallback dimension must be positive");
  if (max_in_flight < 1) throw Error(ErrorCode::InvalidArgument, "remote in-flight limit must be positive");
}

SimilarityBackendDescriptor SimilarityBackendDescriptor::parse(std::string_view spec) {
  SimilarityBackendDescriptor d;
  if (spec == "fallback") {
    d.provider = ProviderKind::DeterministicFallback;
  } else if (spec.starts_with("file:")) {
    d.provider = ProviderKind::EmbeddingFile;
    d.endpoint_or_path = std::string(spec.substr(5));
  } else if (spec.starts_with("remote:")) {
    d.provider = ProviderKind::RemoteService;
    d.endpoint_or_path = std::string(spec.substr(7));
  } else {
    throw Error(ErrorCode::InvalidArgument, "backend must be fallback, file:PATH or remote:URL, got '" +
                                                std::string(spec) + "'");
  }
  d.validate();
  return d;
}

std::string SimilarityBackendDescriptor::describe() const {
  switch (provider) {
    case ProviderKind::DeterministicFallback: return "fallback";
    case ProviderKind::EmbeddingFile: return "file:" + endpoint_or_path;
    case ProviderKind::RemoteService: return "remote:" + endpoint_or_path;
  }
  return "unknown";
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

FallbackProvider::FallbackProvider(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "fallback dimension must be positive");
}

std::string FallbackProvider::id() const { return "fallback-" + std::to_string(dim_); }

Eigen::VectorXd FallbackProvider::token_vector(std::string_view token) const {
  std::uint64_t state = fnv1a(token) ^ seed_;
  Eigen::VectorXd v(dim_);
  for (int i = 0; i < dim_; ++i) {
    const double unit = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;  // [0,1)
    v(i) = 2.0 * unit - 1.0;
  }
  const double norm = v.norm();
  // Practically unreachable; keeps the unit-norm contract anyway.
  if (norm == 0.0) {
    v.setZero();
    v(0) = 1.0;
    return v;
  }
  return v / norm;
}

TokenEmbeddings FallbackProvider::embed(const TokenSequence& seq) const {
  TokenEmbeddings out;
  out.tokens = seq.tokens;
  out.matrix.resize(static_cast<Eigen::Index>(seq.size()), dim_);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    out.matrix.row(static_cast<Eigen::Index>(i)) = token_vector(seq[i]).transpose();
  }
  return out;
}

std::shared_ptr<FileProvider> FileProvider::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ProviderUnavailable, "cannot open embedding file '" + path + "'");
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "embedding file is empty", line_no);
  long long dim = 0;
  {
    std::istringstream header(line);
    if (!(header >> dim) || dim < 1) throw Error(ErrorCode::ParseError, "header must hold a positive width", line_no);
  }

  std::shared_ptr<FileProvider> provider(new FileProvider());
  provider->path_ = path;
  provider->dim_ = static_cast<Eigen::Index>(dim);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream record(line);
    std::string token;
    record >> token;
    std::vector<double> values;
    double x = 0.0;
    while (record >> x) values.push_back(x);
    if (!record.eof()) throw Error(ErrorCode::ParseError, "malformed float in embedding record", line_no);
    if (static_cast<long long>(values.size()) != dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  "record for '" + token + "' has " + std::to_string(values.size()) + " values, header says " +
                      std::to_string(dim),
                  line_no);
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw Error(ErrorCode::ParseError, "non-finite embedding value", line_no);
    }
    if (!provider->index_.emplace(token, static_cast<Eigen::Index>(rows.size())).second) {
      throw Error(ErrorCode::DuplicateRecord, "token '" + token + "' listed twice", line_no);
    }
    rows.push_back(std::move(values));
  }

  provider->vectors_.resize(static_cast<Eigen::Index>(rows.size()), provider->dim_);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    provider->vectors_.row(static_cast<Eigen::Index>(r)) =
        Eigen::Map<const Eigen::RowVectorXd>(rows[r].data(), provider->dim_);
    if (provider->vectors_.row(static_cast<Eigen::Index>(r)).norm() == 0.0) {
      throw Error(ErrorCode::ParseError, "zero vector cannot be normalized (record " + std::to_string(r + 1) + ")");
    }
  }
  normalize_rows(provider->vectors_);
  if (auto it = provider->index_.find(std::string(kDefaultToken)); it != provider->index_.end()) {
    provider->default_row_ = it->second;
  }
  return provider;
}

TokenEmbeddings FileProvider::embed(const TokenSequence& seq) const {
  TokenEmbeddings out;
  out.tokens = seq.tokens;
  out.matrix.resize(static_cast<Eigen::Index>(seq.size()), dim_);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    Eigen::Index row = 0;
    if (auto it = index_.find(seq[i]); it != index_.end()) {
      row = it->second;
    } else if (default_row_) {
      row = *default_row_;
    } else {
      throw Error(ErrorCode::MissingEmbedding, "no vector for token '" + seq[i] + "' in " + path_);
    }
    out.matrix.row(static_cast<Eigen::Index>(i)) = vectors_.row(row);
  }
  return out;
}

std::shared_ptr<EmbeddingProvider> make_provider(const SimilarityBackendDescriptor& d) {
  d.validate();
  switch (d.provider) {
    case ProviderKind::DeterministicFallback:
      return std::make_shared<FallbackProvider>(d.fallback_dim, d.fallback_seed);
    case ProviderKind::EmbeddingFile:
      return FileProvider::load(d.endpoint_or_path);
    case ProviderKind::RemoteService: {
      RemoteOptions options;
      options.endpoint = d.endpoint_or_path;
      options.max_in_flight = d.max_in_flight;
      options.timeout_ms = d.remote_timeout_ms;
      options.retries = d.remote_retries;
      return std::make_shared<RemoteProvider>(options);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown provider kind");
}

SimilarityBackend::SimilarityBackend(SimilarityBackendDescriptor descriptor)
    : SimilarityBackend(descriptor, make_provider(descriptor)) {}

SimilarityBackend::SimilarityBackend(SimilarityBackendDescriptor descriptor, std::shared_ptr<EmbeddingProvider> provider)
    : descriptor_(std::move(descriptor)), provider_(std::move(provider)) {
  if (!provider_) throw Error(ErrorCode::InvalidArgument, "similarity backend needs a provider");
}

void SimilarityBackend::set_idf(IdfTable table) { idf_ = std::move(table); }

const IdfTable* SimilarityBackend::idf() const noexcept {
  return descriptor_.idf_enabled && idf_ ? &*idf_ : nullptr;
}

std::shared_ptr<const TokenEmbeddings> SimilarityBackend::embed(const TokenSequence& seq) const {
  std::string key(1, seq.scheme == TokenScheme::Whitespace ? 'w' : 'c');
  for (const auto& t : seq.tokens) {
    key += '\x1f';
    key += t;
  }
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto computed = std::make_shared<const TokenEmbeddings>(provider_->embed(seq));
  std::lock_guard lock(cache_mutex_);
  return cache_.try_emplace(std::move(key), std::move(computed)).first->second;
}

PrecisionRecallF1 SimilarityBackend::greedy(const TokenSequence& cand, const TokenSequence& targ) const {
  const auto ec = embed(cand);
  const auto et = embed(targ);
  return greedy_match_score(*ec, *et, idf());
}

double SimilarityBackend::sim(const TokenSequence& a, const TokenSequence& b) const {
  if (descriptor_.sentence_sim_mode == SentenceSimMode::MeanPoolCosine) {
    return mean_pool_cosine(*embed(a), *embed(b));
  }
  return greedy(a, b).f1;
}

TokenEmbeddings embed(const SimilarityBackendDescriptor& descriptor, const TokenSequence& seq) {
  return make_provider(descriptor)->embed(seq);
}

double sim(const SimilarityBackendDescriptor& descriptor, const TokenSequence& a, const TokenSequence& b) {
  return SimilarityBackend(descriptor).sim(a, b);
}

}  // namespace paraeval

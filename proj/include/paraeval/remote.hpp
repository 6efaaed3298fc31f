#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "paraeval/similarity.hpp"

namespace paraeval {

// Wire format shared with the embedding service.
//
//   POST /embed   {"texts": [..], "pooling": "tokens"|"sentence", "layer": -1}
//             ->  {"model_id": .., "dim": D,
//                  "results": [{"tokens": [..], "matrix": [[..D floats..], ..]}, ..]}
//   GET /health -> {"model_id": .., "dim": D, "status": "ready"|"loading"}
//
// layer -1 means the encoder's last layer.

enum class Pooling { Tokens, Sentence };

struct EmbedRequest {
  std::vector<std::string> texts;
  Pooling pooling = Pooling::Tokens;
  int layer = -1;
};

struct EmbedResult {
  std::vector<std::string> tokens;
  RowMatrix<double> matrix;
};

struct EmbedResponse {
  std::string model_id;
  Eigen::Index dim = 0;
  std::vector<EmbedResult> results;
};

struct HealthInfo {
  std::string model_id;
  Eigen::Index dim = 0;
  std::string status;
};

std::string encode_embed_request(const EmbedRequest& request);
/// Throws ParseError on malformed JSON and DimensionMismatch when a row count
/// disagrees with the token count or a row width disagrees with `dim`.
EmbedResponse decode_embed_response(const std::string& body, Pooling pooling = Pooling::Tokens);
HealthInfo decode_health(const std::string& body);

/// Value of PARAEVAL_REMOTE_TIMEOUT_MS, or 10000 when unset or malformed.
int remote_timeout_from_env();

struct RemoteOptions {
  std::string endpoint;  // e.g. http://127.0.0.1:8080
  std::size_t max_in_flight = 8;
  int timeout_ms = 10000;
  int retries = 3;
};

/// Client side of the embedding service. At most `max_in_flight` requests are
/// outstanding at once; transport failures and 5xx replies are retried since
/// /embed is idempotent.
class RemoteProvider final : public EmbeddingProvider {
 public:
  explicit RemoteProvider(RemoteOptions options);
  ~RemoteProvider() override;

  TokenEmbeddings embed(const TokenSequence& seq) const override;
  Eigen::Index dim() const override;
  std::string id() const override;

  HealthInfo health() const;
  EmbedResponse embed_texts(const EmbedRequest& request) const;

 private:
  struct Limiter;

  std::string post(const std::string& path, const std::string& body) const;
  std::string get(const std::string& path) const;

  RemoteOptions options_;
  std::string base_;
  std::string prefix_;
  std::unique_ptr<Limiter> limiter_;
  mutable std::once_flag health_once_;
  mutable std::optional<HealthInfo> health_;
};

}  // namespace paraeval

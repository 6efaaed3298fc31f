#include "paraeval/remote.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <json.hpp>
#include <thread>

namespace paraeval {

using nlohmann::json;

std::string encode_embed_request(const EmbedRequest& request) {
  json j;
  j["texts"] = request.texts;
  j["pooling"] = request.pooling == Pooling::Tokens ? "tokens" : "sentence";
  j["layer"] = request.layer;
  return j.dump();
}

EmbedResponse decode_embed_response(const std::string& body, Pooling pooling) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("embed response is not JSON: ") + e.what());
  }
  EmbedResponse out;
  try {
    out.model_id = j.at("model_id").get<std::string>();
    out.dim = j.at("dim").get<Eigen::Index>();
    for (const auto& item : j.at("results")) {
      EmbedResult r;
      r.tokens = item.at("tokens").get<std::vector<std::string>>();
      const auto& rows = item.at("matrix");
      const auto expected_rows = pooling == Pooling::Tokens ? r.tokens.size() : std::size_t{1};
      if (rows.size() != expected_rows) {
        throw Error(ErrorCode::DimensionMismatch, "embed response has " + std::to_string(rows.size()) +
                                                      " rows for " + std::to_string(expected_rows) + " expected");
      }
      r.matrix.resize(static_cast<Eigen::Index>(rows.size()), out.dim);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto values = rows[i].get<std::vector<double>>();
        if (static_cast<Eigen::Index>(values.size()) != out.dim) {
          throw Error(ErrorCode::DimensionMismatch, "embed response row width " + std::to_string(values.size()) +
                                                        " differs from dim " + std::to_string(out.dim));
        }
        for (std::size_t k = 0; k < values.size(); ++k) {
          if (!std::isfinite(values[k])) throw Error(ErrorCode::ParseError, "non-finite value in embed response");
          r.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = values[k];
        }
      }
      out.results.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed embed response: ") + e.what());
  }
  return out;
}

HealthInfo decode_health(const std::string& body) {
  try {
    const auto j = json::parse(body);
    return {j.at("model_id").get<std::string>(), j.at("dim").get<Eigen::Index>(), j.at("status").get<std::string>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed health response: ") + e.what());
  }
}

int remote_timeout_from_env() {
  if (const char* raw = std::getenv("PARAEVAL_REMOTE_TIMEOUT_MS")) {
    char* end = nullptr;
    const long v = std::strtol(raw, &end, 10);
    if (end != raw && *end == '\0' && v > 0 && v < 3'600'000) return static_cast<int>(v);
  }
  return 10000;
}

struct RemoteProvider::Limiter {
  explicit Limiter(std::size_t limit) : available(limit) {}

  void acquire() {
    std::unique_lock lock(mutex);
    cv.wait(lock, [this] { return available > 0; });
    --available;
  }
  void release() {
    {
      std::lock_guard lock(mutex);
      ++available;
    }
    cv.notify_one();
  }

  std::mutex mutex;
  std::condition_variable cv;
  std::size_t available;
};

namespace {

template <typename L>
class Permit {
 public:
  explicit Permit(L& limiter) : limiter_(limiter) { limiter_.acquire(); }
  ~Permit() { limiter_.release(); }
  Permit(const Permit&) = delete;
  Permit& operator=(const Permit&) = delete;

 private:
  L& limiter_;
};

}  // namespace

RemoteProvider::RemoteProvider(RemoteOptions options)
    : options_(std::move(options)), limiter_(std::make_unique<Limiter>(std::max<std::size_t>(1, options_.max_in_flight))) {
  if (options_.endpoint.empty()) throw Error(ErrorCode::InvalidArgument, "remote provider needs an endpoint");
  const auto scheme_end = options_.endpoint.find("://");
  const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = options_.endpoint.find('/', host_start);
  base_ = options_.endpoint.substr(0, path_start);
  if (scheme_end == std::string::npos) base_ = "http://" + base_;
  if (path_start != std::string::npos) {
    prefix_ = options_.endpoint.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }
}

RemoteProvider::~RemoteProvider() = default;

std::string RemoteProvider::id() const { return "remote:" + options_.endpoint; }

std::string RemoteProvider::post(const std::string& path, const std::string& body) const {
  Permit permit(*limiter_);
  std::string last_error = "no attempt made";
  const int attempts = std::max(1, options_.retries);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(50 << attempt));
    httplib::Client client(base_);
    const auto timeout = std::chrono::milliseconds(options_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(prefix_ + path, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return res->body;
    last_error = "HTTP " + std::to_string(res->status);
    if (res->status < 500) break;
  }
  throw Error(ErrorCode::ProviderUnavailable, "POST " + base_ + prefix_ + path + " failed: " + last_error);
}

std::string RemoteProvider::get(const std::string& path) const {
  Permit permit(*limiter_);
  std::string last_error = "no attempt made";
  const int attempts = std::max(1, options_.retries);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(50 << attempt));
    httplib::Client client(base_);
    const auto timeout = std::chrono::milliseconds(options_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    auto res = client.Get(prefix_ + path);
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return res->body;
    last_error = "HTTP " + std::to_string(res->status);
    if (res->status < 500) break;
  }
  throw Error(ErrorCode::ProviderUnavailable, "GET " + base_ + prefix_ + path + " failed: " + last_error);
}

HealthInfo RemoteProvider::health() const {
  std::call_once(health_once_, [this] { health_ = decode_health(get("/health")); });
  return *health_;
}

Eigen::Index RemoteProvider::dim() const { return health().dim; }

EmbedResponse RemoteProvider::embed_texts(const EmbedRequest& request) const {
  auto response = decode_embed_response(post("/embed", encode_embed_request(request)), request.pooling);
  if (response.results.size() != request.texts.size()) {
    throw Error(ErrorCode::DimensionMismatch, "embed response holds " + std::to_string(response.results.size()) +
                                                  " results for " + std::to_string(request.texts.size()) + " texts");
  }
  if (const auto expected = health().dim; response.dim != expected) {
    throw Error(ErrorCode::DimensionMismatch, "service answered with dim " + std::to_string(response.dim) +
                                                  " but reports dim " + std::to_string(expected));
  }
  return response;
}

TokenEmbeddings RemoteProvider::embed(const TokenSequence& seq) const {
  if (seq.empty()) {
    TokenEmbeddings empty;
    empty.matrix.resize(0, dim());
    return empty;
  }
  auto response = embed_texts(EmbedRequest{{seq.joined()}, Pooling::Tokens, -1});
  auto& result = response.results.front();
  TokenEmbeddings out;
  out.tokens = std::move(result.tokens);
  out.matrix = std::move(result.matrix);
  normalize_rows(out.matrix);
  return out;
}

}  // namespace paraeval

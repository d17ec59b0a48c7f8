#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cas/text.hpp"

namespace cas {

// Token-level log-probabilities (natural log) of a continuation given a
// prefix. offsets[i] is the character range of tokens[i] inside the
// continuation string that was sent.
struct TokenScoreResult {
  std::vector<std::string> tokens;
  std::vector<double> logprobs;
  std::vector<text::CharSpan> offsets;
  std::size_t prefix_token_count = 0;

  double sum() const;
};

struct GenerationRequest {
  std::string prompt;
  std::size_t num_samples = 1;
  double nucleus_p = 0.9;
  std::size_t max_new_tokens = 15;
  // Applied client-side: cut each sample after its first . ! or ?
  bool stop_at_sentence_end = true;
  // Passed through to the server; the stub ignores it.
  std::uint64_t seed = 0;

  void validate() const;
};

struct EmbeddingResult {
  std::vector<std::vector<double>> vectors;
};

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Cuts text after the first sentence terminator and trims it.
std::string truncate_at_sentence_end(std::string_view text);

// One interface for the three model roles: scoring, generation, embedding.
// Implementations must be safe to call from several threads at once.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;

  virtual TokenScoreResult score(std::string_view prefix, std::string_view continuation) = 0;
  virtual std::vector<std::string> generate(const GenerationRequest& request) = 0;
  virtual EmbeddingResult embed(std::span<const std::string> texts) = 0;
  // Recorded in run metadata, e.g. "stub:3f2a..." or "http://host:8000".
  virtual std::string identity() const = 0;
};

// ---------------------------------------------------------------------------
// Stub backend

// Deterministic offline backend driven by a JSON config:
//
//   {
//     "seed": 0,
//     "mode": "constant" | "hashed",        // fallback for unknown tokens
//     "default_logprob": -1.0,              // used by "constant"
//     "hashed_range": [-8.0, -0.05],        // used by "hashed"
//     "sequences": [{"prefix": "...", "continuation": "...", "logprobs": [...]}],
//     "tokens": [{"context": "...", "token": "...", "logprob": -0.7}],
//     "words": {"sue": -0.05},
//     "samples": ["..."],
//     "samples_by_prompt": {"<prompt>": ["..."]},
//     "embedding_dim": 4096
//   }
//
// Tokenization is on whitespace. The context of continuation token j is the
// prefix tokens and continuation tokens < j joined by single spaces. A token's
// log-probability is looked up in this order: a whole-sequence entry, a
// (context, token) entry, a per-word entry, then the fallback.
struct StubConfig {
  struct Sequence {
    std::string prefix;
    std::string continuation;
    std::vector<double> logprobs;
  };
  enum class Mode { kConstant, kHashed };

  std::uint64_t seed = 0;
  Mode mode = Mode::kConstant;
  double default_logprob = -1.0;
  double hashed_min = -8.0;
  double hashed_max = -0.05;
  std::vector<Sequence> sequences;
  std::map<std::pair<std::string, std::string>, double> tokens;
  std::map<std::string, double> words;
  std::vector<std::string> samples;
  std::map<std::string, std::vector<std::string>> samples_by_prompt;
  std::size_t embedding_dim = 4096;

  static StubConfig from_json(const nlohmann::json& j);
  static StubConfig from_file(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

class StubBackend final : public ModelBackend {
 public:
  explicit StubBackend(StubConfig config);

  TokenScoreResult score(std::string_view prefix, std::string_view continuation) override;
  std::vector<std::string> generate(const GenerationRequest& request) override;
  EmbeddingResult embed(std::span<const std::string> texts) override;
  std::string identity() const override;

  const StubConfig& config() const { return config_; }

 private:
  double token_logprob(const std::string& context, const std::string& token) const;
  std::vector<double> embed_one(std::string_view text) const;

  StubConfig config_;
  std::map<std::pair<std::string, std::string>, std::vector<double>> sequence_index_;
  std::string identity_;
};

// ---------------------------------------------------------------------------
// HTTP backend

// Client for the JSON protocol
//   POST /v1/score    {prefix, continuation} -> {tokens, logprobs, prefix_token_count[, offsets]}
//   POST /v1/generate {prompt, n, top_p, max_new_tokens, seed} -> {samples}
//   POST /v1/embed    {texts} -> {vectors}
struct HttpBackendConfig {
  std::string endpoint;  // e.g. "http://127.0.0.1:8000"
  std::chrono::milliseconds timeout{60000};
  std::size_t max_retries = 3;
  std::chrono::milliseconds retry_backoff{200};
  std::size_t max_in_flight = 4;
  std::string auth_header;  // sent verbatim as Authorization when non-empty

  // CAS_LM_ENDPOINT and CAS_LM_AUTH.
  static HttpBackendConfig from_environment();
};

class HttpBackend final : public ModelBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  TokenScoreResult score(std::string_view prefix, std::string_view continuation) override;
  std::vector<std::string> generate(const GenerationRequest& request) override;
  EmbeddingResult embed(std::span<const std::string> texts) override;
  std::string identity() const override { return config_.endpoint; }

 private:
  nlohmann::json post(const std::string& path, const nlohmann::json& body);

  HttpBackendConfig config_;
  std::string scheme_host_port_;
  std::string base_path_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

// Protocol helpers shared by client, server and tests.
nlohmann::json score_result_to_json(const TokenScoreResult& r);
TokenScoreResult score_result_from_json(const nlohmann::json& j, std::string_view continuation);
// Character offsets of each token inside the continuation, found by scanning
// left to right. Tokens that cannot be located get an empty span at the scan
// position.
std::vector<text::CharSpan> align_tokens(std::span<const std::string> tokens, std::string_view continuation);

// ---------------------------------------------------------------------------
// Caching decorator

// Memoizes score() and embed() per input; generate() is passed through.
class CachingBackend final : public ModelBackend {
 public:
  explicit CachingBackend(std::shared_ptr<ModelBackend> inner);

  TokenScoreResult score(std::string_view prefix, std::string_view continuation) override;
  std::vector<std::string> generate(const GenerationRequest& request) override;
  EmbeddingResult embed(std::span<const std::string> texts) override;
  std::string identity() const override { return inner_->identity(); }

  std::size_t score_hits() const;
  std::size_t score_misses() const;

 private:
  std::shared_ptr<ModelBackend> inner_;
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, TokenScoreResult> scores_;
  std::unordered_map<std::string, std::vector<double>> embeddings_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

// ---------------------------------------------------------------------------
// Bundled stub server

// Serves the HTTP protocol from any backend (normally a StubBackend).
class ModelServer {
 public:
  explicit ModelServer(std::shared_ptr<ModelBackend> backend);
  ~ModelServer();
  ModelServer(const ModelServer&) = delete;
  ModelServer& operator=(const ModelServer&) = delete;

  // Binds to host:port (port 0 picks a free port) and serves on a background
  // thread. Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cas

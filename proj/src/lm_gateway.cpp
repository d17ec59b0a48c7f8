#include <cctype>
#include <cmath>
#include <numeric>

#include "cas/errors.hpp"
#include "cas/lm_gateway.hpp"

namespace cas {

double TokenScoreResult::sum() const { return std::accumulate(logprobs.begin(), logprobs.end(), 0.0); }

void GenerationRequest::validate() const {
  if (num_samples < 1) throw InvalidArgument("num_samples must be >= 1");
  if (!(nucleus_p > 0.0 && nucleus_p <= 1.0)) throw InvalidArgument("nucleus_p must be in (0, 1]");
  if (max_new_tokens < 1) throw InvalidArgument("max_new_tokens must be >= 1");
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("cosine of vectors with different dimensions");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::string truncate_at_sentence_end(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!text::is_sentence_terminator(s[i])) continue;
    // Keep runs like "?!" and decimals like "3.5" intact.
    if (s[i] == '.' && i > 0 && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i - 1])) &&
        std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
      continue;
    }
    std::size_t end = i + 1;
    while (end < s.size() && text::is_sentence_terminator(s[end])) ++end;
    return std::string(text::trim(s.substr(0, end)));
  }
  return std::string(text::trim(s));
}

// ---------------------------------------------------------------------------
// Protocol helpers

std::vector<text::CharSpan> align_tokens(std::span<const std::string> tokens, std::string_view continuation) {
  std::vector<text::CharSpan> out;
  out.reserve(tokens.size());
  std::size_t cursor = 0;
  for (const auto& tok : tokens) {
    if (tok.empty()) {
      out.push_back({cursor, cursor});
      continue;
    }
    std::size_t at = continuation.find(tok, cursor);
    std::size_t len = tok.size();
    if (at == std::string_view::npos) {
      // Tokenizers often report a leading space that the text does not have.
      const std::string_view bare = text::trim(tok);
      at = bare.empty() ? std::string_view::npos : continuation.find(bare, cursor);
      len = bare.size();
    }
    if (at == std::string_view::npos) {
      out.push_back({cursor, cursor});
      continue;
    }
    out.push_back({at, at + len});
    cursor = at + len;
  }
  return out;
}

nlohmann::json score_result_to_json(const TokenScoreResult& r) {
  nlohmann::json offsets = nlohmann::json::array();
  for (const auto& o : r.offsets) offsets.push_back({o.begin, o.end});
  return {{"tokens", r.tokens},
          {"logprobs", r.logprobs},
          {"prefix_token_count", r.prefix_token_count},
          {"offsets", offsets}};
}

TokenScoreResult score_result_from_json(const nlohmann::json& j, std::string_view continuation) {
  TokenScoreResult r;
  r.tokens = j.at("tokens").get<std::vector<std::string>>();
  r.logprobs = j.at("logprobs").get<std::vector<double>>();
  r.prefix_token_count = j.at("prefix_token_count").get<std::size_t>();
  if (r.tokens.size() != r.logprobs.size()) {
    throw BackendInputError("score response has " + std::to_string(r.tokens.size()) + " tokens but " +
                            std::to_string(r.logprobs.size()) + " logprobs");
  }
  if (r.tokens.empty()) throw BackendInputError("continuation tokenized to nothing");
  for (double lp : r.logprobs) {
    if (!std::isfinite(lp) || lp > 0.0) throw BackendInputError("score response has a logprob outside (-inf, 0]");
  }
  if (j.contains("offsets") && j["offsets"].is_array() && j["offsets"].size() == r.tokens.size()) {
    for (const auto& o : j["offsets"]) r.offsets.push_back({o.at(0).get<std::size_t>(), o.at(1).get<std::size_t>()});
  } else {
    r.offsets = align_tokens(r.tokens, continuation);
  }
  return r;
}

// ---------------------------------------------------------------------------
// CachingBackend

CachingBackend::CachingBackend(std::shared_ptr<ModelBackend> inner) : inner_(std::move(inner)) {
  if (!inner_) throw InvalidArgument("CachingBackend needs an inner backend");
}

TokenScoreResult CachingBackend::score(std::string_view prefix, std::string_view continuation) {
  std::pair<std::string, std::string> key{std::string(prefix), std::string(continuation)};
  {
    std::lock_guard lock(mu_);
    if (auto it = scores_.find(key); it != scores_.end()) {
      ++hits_;
      return it->second;
    }
  }
  // Computed outside the lock; concurrent misses on one key just race to
  // store identical values.
  TokenScoreResult result = inner_->score(prefix, continuation);
  std::lock_guard lock(mu_);
  ++misses_;
  scores_.emplace(std::move(key), result);
  return result;
}

std::vector<std::string> CachingBackend::generate(const GenerationRequest& request) {
  return inner_->generate(request);
}

EmbeddingResult CachingBackend::embed(std::span<const std::string> texts) {
  EmbeddingResult out;
  out.vectors.resize(texts.size());
  std::vector<std::string> missing;
  std::vector<std::size_t> missing_at;
  {
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (auto it = embeddings_.find(texts[i]); it != embeddings_.end()) {
        out.vectors[i] = it->second;
      } else {
        missing.push_back(texts[i]);
        missing_at.push_back(i);
      }
    }
  }
  if (missing.empty()) return out;
  EmbeddingResult fresh = inner_->embed(missing);
  if (fresh.vectors.size() != missing.size()) {
    throw BackendInputError("embed returned " + std::to_string(fresh.vectors.size()) + " vectors for " +
                            std::to_string(missing.size()) + " texts");
  }
  std::lock_guard lock(mu_);
  for (std::size_t k = 0; k < missing.size(); ++k) {
    embeddings_.emplace(missing[k], fresh.vectors[k]);
    out.vectors[missing_at[k]] = std::move(fresh.vectors[k]);
  }
  return out;
}

std::size_t CachingBackend::score_hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::size_t CachingBackend::score_misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

}  // namespace cas

#include "cas/scoring.hpp"

#include <cmath>

#include "cas/errors.hpp"

namespace cas {

std::string_view normalization_name(Normalization n) {
  switch (n) {
    case Normalization::kSum:
      return "sum";
    case Normalization::kAnswerMean:
      return "answer_mean";
    case Normalization::kStatementPlusAnswer:
      return "statement_plus_answer";
  }
  return "statement_plus_answer";
}

std::optional<Normalization> normalization_from_name(std::string_view name) {
  if (name == "sum") return Normalization::kSum;
  if (name == "answer_mean") return Normalization::kAnswerMean;
  if (name == "statement_plus_answer") return Normalization::kStatementPlusAnswer;
  return std::nullopt;
}

TokenScoreResult score_answer(ModelBackend& backend, std::string_view statement, std::string_view answer) {
  if (text::trim(answer).empty()) throw InvalidArgument("answer is empty");
  const bool spaced = !statement.empty();
  std::string continuation = spaced ? " " : "";
  continuation += answer;
  TokenScoreResult r = backend.score(statement, continuation);
  if (spaced) {
    for (auto& o : r.offsets) {
      o.begin = o.begin > 0 ? o.begin - 1 : 0;
      o.end = o.end > 0 ? o.end - 1 : 0;
    }
  }
  return r;
}

double normalized_sum(std::span<const double> values, std::size_t prefix_tokens, Normalization n) {
  double sum = 0.0;
  for (double v : values) sum += v;
  switch (n) {
    case Normalization::kSum:
      return sum;
    case Normalization::kAnswerMean:
      return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
    case Normalization::kStatementPlusAnswer: {
      const std::size_t d = prefix_tokens + values.size();
      return d == 0 ? 0.0 : sum / static_cast<double>(d);
    }
  }
  return sum;
}

double basic_score(const TokenScoreResult& scored, Normalization n) {
  return normalized_sum(scored.logprobs, scored.prefix_token_count, n);
}

double basic_score(ModelBackend& backend, std::string_view statement, std::string_view answer, Normalization n) {
  return basic_score(score_answer(backend, statement, answer), n);
}

double score_edge(const KGEdge& edge, ModelBackend& backend) {
  const RelationPrompt prompt = relation_prompt(edge.relation, edge.start, edge.end);
  const TokenScoreResult r = backend.score(prompt.prefix, " " + prompt.target);
  return r.sum() / static_cast<double>(r.logprobs.size());
}

double path_value(std::span<const double> edge_logprobs, double summary_logprob) {
  double sum = summary_logprob;
  for (double e : edge_logprobs) sum += e;
  return sum / static_cast<double>(edge_logprobs.size() + 1);
}

PathScore score_path(const KGPath& path, ModelBackend& backend) {
  if (path.steps.empty()) throw InvalidArgument("path has no edges");
  PathScore s;
  s.path = path;
  s.edge_logprobs.reserve(path.size());
  for (const auto& step : path.steps) s.edge_logprobs.push_back(score_edge(step.edge, backend));
  s.summary_logprob = score_edge(path.summary_edge(), backend);
  s.value = path_value(s.edge_logprobs, s.summary_logprob);
  return s;
}

double aggregate_paths(std::span<const PathScore> scores) {
  if (scores.empty()) throw InvalidArgument("aggregate_paths needs at least one path");
  double sum = 0.0;
  for (const auto& s : scores) sum += s.value;
  return sum;
}

void WeightConfig::validate() const {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  if (!literal && !(w_floor > 0.0 && w_floor <= 1.0 && w_ceil >= 1.0)) {
    throw InvalidArgument("weight bounds must satisfy 0 < w_floor <= 1 <= w_ceil");
  }
}

double normalized_evidence(double aggregate, std::size_t path_count, const WeightConfig& config) {
  const double per_path = aggregate / static_cast<double>(std::max<std::size_t>(1, path_count));
  return std::exp(per_path) - std::exp(config.uniform_logprob);
}

double keyword_weight(double aggregate, std::size_t path_count, const WeightConfig& config) {
  if (config.literal) return 1.0 + config.lambda * aggregate;
  const double w = 1.0 + config.lambda * normalized_evidence(aggregate, path_count, config);
  return std::clamp(w, config.w_floor, config.w_ceil);
}

std::vector<KeywordWeight> assign_weights(const ConnectedKeywords& connected, const WeightConfig& config,
                                          ModelBackend& backend) {
  config.validate();
  std::vector<KeywordWeight> out;
  out.reserve(connected.size());
  for (const auto& entry : connected.entries) {
    KeywordWeight kw;
    kw.keyword = entry.keyword;
    kw.occurrences = entry.occurrences;
    for (const auto& p : entry.paths) kw.paths.push_back(score_path(p, backend));
    kw.aggregate = aggregate_paths(kw.paths);
    kw.evidence = config.literal ? kw.aggregate : normalized_evidence(kw.aggregate, kw.paths.size(), config);
    kw.weight = keyword_weight(kw.aggregate, kw.paths.size(), config);
    out.push_back(std::move(kw));
  }
  return out;
}

std::vector<KeywordWeight> static_weights(const ConnectedKeywords& connected, double weight) {
  std::vector<KeywordWeight> out;
  for (const auto& entry : connected.entries) {
    KeywordWeight kw;
    kw.keyword = entry.keyword;
    kw.occurrences = entry.occurrences;
    kw.weight = weight;
    out.push_back(std::move(kw));
  }
  return out;
}

std::vector<KeywordWeight> static_weights(const KeywordSet& keywords, double weight) {
  std::vector<KeywordWeight> out;
  for (const auto& k : keywords.keywords) {
    KeywordWeight kw;
    kw.keyword = k.term;
    kw.occurrences = k.occurrences;
    kw.weight = weight;
    out.push_back(std::move(kw));
  }
  return out;
}

std::vector<double> token_weights(std::span<const text::CharSpan> token_offsets,
                                  std::span<const KeywordWeight> weights) {
  std::vector<double> out(token_offsets.size(), 1.0);
  for (std::size_t t = 0; t < token_offsets.size(); ++t) {
    const auto& span = token_offsets[t];
    if (span.begin == span.end) continue;
    bool found = false;
    for (const auto& kw : weights) {
      for (const auto& occ : kw.occurrences) {
        if (occ.chars.overlaps(span)) {
          out[t] = kw.weight;
          found = true;
          break;
        }
      }
      if (found) break;
    }
  }
  return out;
}

AnswerScore weighted_score(const TokenScoreResult& scored, std::string_view answer,
                           std::span<const KeywordWeight> weights, Normalization n,
                           WeightApplication application) {
  AnswerScore a;
  a.answer_text = std::string(answer);
  a.tokens = scored.tokens;
  a.token_logprobs = scored.logprobs;
  a.token_offsets = scored.offsets;
  a.prefix_token_count = scored.prefix_token_count;
  a.token_weights = token_weights(scored.offsets, weights);
  a.basic_score = basic_score(scored, n);

  std::vector<double> terms(scored.logprobs.size());
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const double w = a.token_weights[j];
    if (application == WeightApplication::kScaleLogprob) {
      terms[j] = w * scored.logprobs[j];
    } else {
      if (!(w > 0.0)) throw InvalidArgument("token weight must be positive when added as log W");
      terms[j] = scored.logprobs[j] + std::log(w);
    }
  }
  a.weighted_score = normalized_sum(terms, scored.prefix_token_count, n);
  return a;
}

AnswerScore weighted_score(ModelBackend& backend, std::string_view statement, std::string_view answer,
                           std::span<const KeywordWeight> weights, Normalization n, WeightApplication application) {
  return weighted_score(score_answer(backend, statement, answer), answer, weights, n, application);
}

std::size_t select_answer(std::span<const double> scores) {
  if (scores.empty()) throw InvalidArgument("select_answer needs at least one score");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

}  // namespace cas

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cas/kb_graph.hpp"
#include "cas/keywords.hpp"
#include "cas/lm_gateway.hpp"

namespace cas {

// How a sum of token log-probabilities is turned into an answer score.
enum class Normalization {
  kSum,                 // plain sum (LM_sum)
  kAnswerMean,          // divided by the answer's token count (LM_avg)
  kStatementPlusAnswer  // divided by n_s + n_A
};

std::string_view normalization_name(Normalization n);
std::optional<Normalization> normalization_from_name(std::string_view name);

// The answer is scored as the continuation " " + answer after the statement
// (no space when the statement is empty). Offsets in the result are moved
// back to answer coordinates.
TokenScoreResult score_answer(ModelBackend& backend, std::string_view statement, std::string_view answer);

// Normalized sum of values over the answer tokens, given n_s prefix tokens.
double normalized_sum(std::span<const double> values, std::size_t prefix_tokens, Normalization n);

double basic_score(const TokenScoreResult& scored, Normalization n = Normalization::kStatementPlusAnswer);
double basic_score(ModelBackend& backend, std::string_view statement, std::string_view answer,
                   Normalization n = Normalization::kStatementPlusAnswer);

// log S(E): mean log-probability of the edge's last-slot node after the
// template prefix, e.g. log P(law | "sue is related to").
double score_edge(const KGEdge& edge, ModelBackend& backend);

struct PathScore {
  KGPath path;
  std::vector<double> edge_logprobs;
  double summary_logprob = 0.0;
  double value = 0.0;
};

// (sum of edge scores + summary score) / (|p| + 1)
double path_value(std::span<const double> edge_logprobs, double summary_logprob);
PathScore score_path(const KGPath& path, ModelBackend& backend);

// Sum of path values. Throws InvalidArgument on an empty list.
double aggregate_paths(std::span<const PathScore> scores);

struct WeightConfig {
  double lambda = 10.0;
  double w_floor = 0.25;
  double w_ceil = 4.0;
  // Log-probability of a token under a uniform distribution over a
  // GPT-2 sized vocabulary; exp of it is subtracted in normalized mode.
  double uniform_logprob = -std::log(50257.0);
  // W = 1 + lambda * S, unclamped, multiplied into each covered token's
  // log-probability instead of added as log W.
  bool literal = false;

  void validate() const;
};

// n(S) = exp(S / max(1, paths)) - exp(uniform_logprob)
double normalized_evidence(double aggregate, std::size_t path_count, const WeightConfig& config);
// Weight for one connected keyword under config (either mode).
double keyword_weight(double aggregate, std::size_t path_count, const WeightConfig& config);

struct KeywordWeight {
  std::string keyword;
  std::vector<TokenSpan> occurrences;  // character spans inside the answer
  std::vector<PathScore> paths;
  double aggregate = 0.0;
  double evidence = 0.0;  // n(S), or S itself in literal mode
  double weight = 1.0;
};

std::vector<KeywordWeight> assign_weights(const ConnectedKeywords& connected, const WeightConfig& config,
                                          ModelBackend& backend);
// Fixed weight for each keyword (static weighting ablation).
std::vector<KeywordWeight> static_weights(const ConnectedKeywords& connected, double weight);
std::vector<KeywordWeight> static_weights(const KeywordSet& keywords, double weight);

// How token weights enter the score.
enum class WeightApplication {
  kAddLog,           // log P + log W
  kScaleLogprob,     // W * log P (literal mode)
};

struct AnswerScore {
  std::string answer_text;
  std::vector<std::string> tokens;
  std::vector<double> token_logprobs;
  std::vector<double> token_weights;
  std::vector<text::CharSpan> token_offsets;
  std::size_t prefix_token_count = 0;
  double basic_score = 0.0;
  double weighted_score = 0.0;
};

// Per-token weights: a token takes the weight of the first keyword (in list
// order) with an occurrence overlapping it, else 1.
std::vector<double> token_weights(std::span<const text::CharSpan> token_offsets,
                                  std::span<const KeywordWeight> weights);

AnswerScore weighted_score(const TokenScoreResult& scored, std::string_view answer,
                           std::span<const KeywordWeight> weights, Normalization n = Normalization::kStatementPlusAnswer,
                           WeightApplication application = WeightApplication::kAddLog);
AnswerScore weighted_score(ModelBackend& backend, std::string_view statement, std::string_view answer,
                           std::span<const KeywordWeight> weights, Normalization n = Normalization::kStatementPlusAnswer,
                           WeightApplication application = WeightApplication::kAddLog);

// Index of the maximum; ties go to the lowest index. Throws on empty input.
std::size_t select_answer(std::span<const double> scores);

}  // namespace cas

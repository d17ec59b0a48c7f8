#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cas/kb_graph.hpp"
#include "cas/keywords.hpp"
#include "cas/lm_gateway.hpp"
#include "cas/scoring.hpp"

namespace cas {

struct ExpansionConfig {
  std::size_t n_candidates = 100;
  double nucleus_p = 0.9;
  std::size_t max_new_tokens = 15;
  bool stop_at_sentence_end = true;
  double s_sim = 0.5;
  PathQuery connection_query;
  std::size_t keywords_per_answer = 5;
  // Compute connection scores for every choice, not only the ones that pass
  // the similarity threshold. Only changes what gets recorded.
  bool evaluate_all_connections = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Candidate {
  std::string text;
  std::size_t sample_index = 0;  // position in the raw generation order
};

// Samples continuations of the statement. Exact duplicates keep their first
// occurrence; empty samples are dropped.
std::vector<Candidate> generate_candidates(std::string_view statement, ModelBackend& backend,
                                           const ExpansionConfig& config);

// Connection score between a generated answer and an original choice: the
// candidate's keywords are linked to the choice's keywords and every
// connected keyword contributes exp(S / #paths). Zero iff nothing connects.
double connection_score(const KnowledgeGraph& graph, const KeywordSet& candidate_keywords,
                        const KeywordSet& choice_keywords, const PathQuery& query, ModelBackend& backend);

struct GeneratedAnswer {
  std::string text;
  std::size_t sample_index = 0;
  std::vector<double> similarity_to;
  // nullopt where the connection was not evaluated.
  std::vector<std::optional<double>> connection_to;
  std::optional<std::size_t> assigned_to;
};

// Picks the choice with the highest similarity among those with
// similarity >= s_sim and connection > 0; ties go to the lowest index.
std::optional<std::size_t> assign_candidate(std::span<const double> similarity,
                                            std::span<const std::optional<double>> connection, double s_sim);

std::vector<GeneratedAnswer> map_candidates(std::span<const Candidate> candidates,
                                            std::span<const std::string> choices,
                                            std::span<const KeywordSet> choice_keywords,
                                            const KnowledgeGraph& graph, ModelBackend& backend,
                                            const ExpansionConfig& config,
                                            const KeywordExtractor& extractor = KeywordExtractor());

struct CandidateGroup {
  std::size_t choice_index = 0;
  std::string original_answer;
  std::vector<std::string> members;  // original first
  std::vector<double> member_scores;

  double best() const;
};

// Index of the group with the highest best member; ties go to the lowest
// index.
std::size_t select_by_cluster(std::span<const CandidateGroup> groups);

}  // namespace cas

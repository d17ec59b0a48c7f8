#include "cas/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "cas/errors.hpp"

namespace cas {

void ExpansionConfig::validate() const {
  if (n_candidates < 1) throw InvalidArgument("n_candidates must be >= 1");
  if (!(s_sim > 0.0 && s_sim < 1.0)) throw InvalidArgument("s_sim must be in (0, 1)");
  if (connection_query.max_hops < 1) throw InvalidArgument("connection k must be >= 1");
}

std::vector<Candidate> generate_candidates(std::string_view statement, ModelBackend& backend,
                                           const ExpansionConfig& config) {
  if (config.n_candidates < 1) throw InvalidArgument("n_candidates must be >= 1");
  GenerationRequest req;
  req.prompt = std::string(statement);
  req.num_samples = config.n_candidates;
  req.nucleus_p = config.nucleus_p;
  req.max_new_tokens = config.max_new_tokens;
  req.stop_at_sentence_end = config.stop_at_sentence_end;
  req.seed = config.seed;
  const std::vector<std::string> samples = backend.generate(req);

  std::vector<Candidate> out;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::string t = config.stop_at_sentence_end ? truncate_at_sentence_end(samples[i])
                                                : std::string(text::trim(samples[i]));
    if (t.empty()) continue;
    if (!seen.insert(t).second) continue;
    out.push_back({std::move(t), i});
  }
  return out;
}

double connection_score(const KnowledgeGraph& graph, const KeywordSet& candidate_keywords,
                        const KeywordSet& choice_keywords, const PathQuery& query, ModelBackend& backend) {
  const ConnectedKeywords connected = connect_keywords(graph, choice_keywords, candidate_keywords, query);
  double total = 0.0;
  for (const auto& entry : connected.entries) {
    std::vector<PathScore> scores;
    scores.reserve(entry.paths.size());
    for (const auto& p : entry.paths) scores.push_back(score_path(p, backend));
    total += std::exp(aggregate_paths(scores) / static_cast<double>(scores.size()));
  }
  return total;
}

std::optional<std::size_t> assign_candidate(std::span<const double> similarity,
                                            std::span<const std::optional<double>> connection, double s_sim) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < similarity.size(); ++i) {
    if (similarity[i] < s_sim) continue;
    if (i >= connection.size() || !connection[i] || !(*connection[i] > 0.0)) continue;
    if (!best || similarity[i] > similarity[*best]) best = i;
  }
  return best;
}

std::vector<GeneratedAnswer> map_candidates(std::span<const Candidate> candidates,
                                            std::span<const std::string> choices,
                                            std::span<const KeywordSet> choice_keywords,
                                            const KnowledgeGraph& graph, ModelBackend& backend,
                                            const ExpansionConfig& config, const KeywordExtractor& extractor) {
  config.validate();
  if (choice_keywords.size() != choices.size()) throw InvalidArgument("one keyword set per choice is required");
  std::vector<GeneratedAnswer> out;
  if (candidates.empty()) return out;

  std::vector<std::string> texts(choices.begin(), choices.end());
  for (const auto& c : candidates) texts.push_back(c.text);
  const EmbeddingResult emb = backend.embed(texts);
  if (emb.vectors.size() != texts.size()) throw BackendInputError("embed returned the wrong number of vectors");

  out.reserve(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    GeneratedAnswer g;
    g.text = candidates[c].text;
    g.sample_index = candidates[c].sample_index;
    const auto& v = emb.vectors[choices.size() + c];
    for (std::size_t i = 0; i < choices.size(); ++i) g.similarity_to.push_back(cosine_similarity(v, emb.vectors[i]));

    const KeywordSet kw = extractor.extract(g.text, config.keywords_per_answer);
    g.connection_to.resize(choices.size());
    for (std::size_t i = 0; i < choices.size(); ++i) {
      if (!config.evaluate_all_connections && g.similarity_to[i] < config.s_sim) continue;
      g.connection_to[i] = connection_score(graph, kw, choice_keywords[i], config.connection_query, backend);
    }
    g.assigned_to = assign_candidate(g.similarity_to, g.connection_to, config.s_sim);
    out.push_back(std::move(g));
  }
  return out;
}

double CandidateGroup::best() const {
  if (member_scores.empty()) throw InvalidArgument("candidate group has no members");
  return *std::max_element(member_scores.begin(), member_scores.end());
}

std::size_t select_by_cluster(std::span<const CandidateGroup> groups) {
  if (groups.empty()) throw InvalidArgument("select_by_cluster needs at least one group");
  std::vector<double> best;
  best.reserve(groups.size());
  for (const auto& g : groups) best.push_back(g.best());
  return select_answer(best);
}

}  // namespace cas

#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "cas/kb_graph.hpp"
#include "cas/text.hpp"

namespace cas {

// Lowercase stopword lookup.
class StopwordSet {
 public:
  StopwordSet() = default;
  // One word per line; blank lines and lines starting with '#' are ignored.
  static StopwordSet parse(std::string_view text);
  static StopwordSet from_file(const std::filesystem::path& path);
  // The English list shipped in data/stopwords_en.txt.
  static std::shared_ptr<const StopwordSet> bundled();

  bool contains(std::string_view lowercase_word) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

std::string_view bundled_stopword_text();

struct Token {
  std::string text;
  text::CharSpan span;
  std::size_t sentence = 0;
  bool punctuation = false;
};

// Tokens [token_begin, token_end) of KeywordSet::tokens and the characters
// they cover in the source text.
struct TokenSpan {
  std::size_t token_begin = 0;
  std::size_t token_end = 0;
  text::CharSpan chars;

  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct Keyword {
  std::string text;  // surface form at the first occurrence
  std::string term;  // lowercased
  double score = 0.0;  // YAKE score, lower is more important
  std::vector<TokenSpan> occurrences;  // every place the n-gram appears, in order

  const TokenSpan& span() const { return occurrences.front(); }
};

struct KeywordSet {
  std::string source_text;
  std::vector<Token> tokens;
  std::vector<Keyword> keywords;  // ascending score

  bool empty() const { return keywords.empty(); }
  std::size_t size() const { return keywords.size(); }
};

struct YakeConfig {
  std::size_t ngram_max = 2;
  std::size_t window = 1;
  // Candidates more similar than this to an already selected keyword are
  // skipped (Levenshtein similarity). >= 1 disables deduplication.
  double dedup_threshold = 0.9;
};

// Unsupervised single-document keyword extraction in the YAKE style: terms
// are scored from casing, position, frequency, relatedness to context and
// sentence spread; n-gram candidates combine their terms' scores.
class KeywordExtractor {
 public:
  explicit KeywordExtractor(std::shared_ptr<const StopwordSet> stopwords = StopwordSet::bundled(),
                            YakeConfig config = {});

  KeywordSet extract(std::string_view text, std::size_t max_keywords) const;

  const YakeConfig& config() const { return config_; }

 private:
  std::shared_ptr<const StopwordSet> stopwords_;
  YakeConfig config_;
};

// Convenience wrapper using the bundled stopwords and default settings.
KeywordSet extract_keywords(std::string_view text, std::size_t max_keywords);

// Tokenization used by the extractor, exposed for tests and alignment.
std::vector<Token> tokenize_for_keywords(std::string_view text);

// An answer keyword together with every path that links it to a question
// keyword (pooled over all question keywords).
struct ConnectedKeyword {
  std::string keyword;  // Keyword::term
  std::vector<TokenSpan> occurrences;
  std::vector<KGPath> paths;
};

struct ConnectedKeywords {
  std::vector<ConnectedKeyword> entries;  // in answer-keyword order

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  const ConnectedKeyword* find(std::string_view keyword) const;
};

// Keeps the answer keywords that reach at least one question keyword in the
// graph within query.max_hops edges. Keywords that match no concept can
// never connect.
ConnectedKeywords connect_keywords(const KnowledgeGraph& graph, const KeywordSet& key_q,
                                   const KeywordSet& key_a, const PathQuery& query);

}  // namespace cas

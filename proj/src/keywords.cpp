#include "cas/keywords.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "cas/errors.hpp"

namespace cas {

// ---------------------------------------------------------------------------
// Stopwords

StopwordSet StopwordSet::parse(std::string_view text) {
  StopwordSet set;
  for (const auto& raw : text::split(text, '\n')) {
    const auto word = text::trim(raw);
    if (word.empty() || word.front() == '#') continue;
    set.words_.insert(text::ascii_lower(word));
  }
  return set;
}

StopwordSet StopwordSet::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read stopword file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::shared_ptr<const StopwordSet> StopwordSet::bundled() {
  static const auto set = std::make_shared<const StopwordSet>(parse(bundled_stopword_text()));
  return set;
}

bool StopwordSet::contains(std::string_view lowercase_word) const {
  return words_.contains(std::string(lowercase_word));
}

// ---------------------------------------------------------------------------
// Tokenization

namespace {

bool is_ascii_punct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}
bool is_ascii_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

// Length of a multi-byte UTF-8 punctuation mark at s[i] (general punctuation
// block, guillemets), or 0.
std::size_t utf8_punct_len(std::string_view s, std::size_t i) {
  const auto b = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  if (i + 2 < s.size() && b(i) == 0xE2 && (b(i + 1) == 0x80 || b(i + 1) == 0x81)) return 3;
  if (i + 1 < s.size() && b(i) == 0xC2 && (b(i + 1) == 0xAB || b(i + 1) == 0xBB)) return 2;
  return 0;
}

bool is_nbsp(std::string_view s, std::size_t i) {
  return i + 1 < s.size() && static_cast<unsigned char>(s[i]) == 0xC2 &&
         static_cast<unsigned char>(s[i + 1]) == 0xA0;
}

bool is_word_byte(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (c >= 0x80) return utf8_punct_len(s, i) == 0 && !is_nbsp(s, i);
  return is_ascii_alpha(c) || is_digit(c);
}

bool is_right_quote(std::string_view s, std::size_t i) { return s.compare(i, 3, "\xE2\x80\x99") == 0; }

// Length of an in-word joiner at s[i] ("'", "’", "-", "." or "," inside
// numbers), or 0.
std::size_t joiner_len(std::string_view s, std::size_t i, std::size_t word_start) {
  if (i == word_start) return 0;
  const auto prev = static_cast<unsigned char>(s[i - 1]);
  const char c = s[i];
  std::size_t len = 0;
  if (c == '\'' || c == '-') {
    len = 1;
  } else if ((c == '.' || c == ',') && is_digit(prev)) {
    len = 1;
  } else if (is_right_quote(s, i)) {
    len = 3;
  }
  if (len == 0 || i + len >= s.size()) return 0;
  const auto next = static_cast<unsigned char>(s[i + len]);
  if (c == '.' || c == ',') return is_digit(next) ? len : 0;
  return is_word_byte(s, i + len) || is_digit(next) ? len : 0;
}

void push_word(std::string_view s, std::size_t begin, std::size_t end, std::size_t sentence,
               std::vector<Token>& out) {
  std::string_view word = s.substr(begin, end - begin);
  std::size_t apos = word.find('\'');
  std::size_t apos_len = 1;
  if (const std::size_t curly = word.find("\xE2\x80\x99"); curly != std::string_view::npos &&
                                                             (apos == std::string_view::npos || curly < apos)) {
    apos = curly;
    apos_len = 3;
  }
  if (apos == std::string_view::npos || apos == 0) {
    out.push_back({std::string(word), {begin, end}, sentence, false});
    return;
  }
  // did|n't, she|'s (the 's part is dropped like other apostrophe-led pieces)
  const bool negation = apos >= 2 && (word[apos - 1] == 'n' || word[apos - 1] == 'N') &&
                        word.size() == apos + apos_len + 1 && (word.back() == 't' || word.back() == 'T');
  if (negation) {
    const std::size_t split = apos - 1;
    out.push_back({std::string(word.substr(0, split)), {begin, begin + split}, sentence, false});
    out.push_back({std::string(word.substr(split)), {begin + split, end}, sentence, false});
    return;
  }
  out.push_back({std::string(word.substr(0, apos)), {begin, begin + apos}, sentence, false});
}

}  // namespace

std::vector<Token> tokenize_for_keywords(std::string_view s) {
  std::vector<Token> out;
  std::size_t sentence = 0;
  bool break_pending = false;
  bool sentence_open = false;

  auto start_token = [&]() {
    if (break_pending && sentence_open) {
      ++sentence;
      sentence_open = false;
    }
    break_pending = false;
    sentence_open = true;
  };

  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c == '\n') {
      break_pending = true;
      ++i;
      continue;
    }
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (is_nbsp(s, i)) {
      i += 2;
      continue;
    }
    if (const std::size_t plen = utf8_punct_len(s, i); plen > 0 || (c < 0x80 && !is_word_byte(s, i))) {
      const std::size_t len = plen > 0 ? plen : 1;
      // Closing punctuation stays with the sentence it ends.
      if (!sentence_open) start_token();
      out.push_back({std::string(s.substr(i, len)), {i, i + len}, sentence, true});
      if (len == 1 && text::is_sentence_terminator(static_cast<char>(c))) break_pending = true;
      i += len;
      continue;
    }
    start_token();
    const std::size_t begin = i;
    while (i < s.size()) {
      if (is_word_byte(s, i)) {
        ++i;
      } else if (const std::size_t j = joiner_len(s, i, begin); j > 0) {
        i += j;
      } else {
        break;
      }
    }
    push_word(s, begin, i, sentence, out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// YAKE scoring

namespace {

bool is_exclude_only(const Token& t) {
  if (t.punctuation) return true;
  return std::all_of(t.text.begin(), t.text.end(),
                     [](char c) { return is_ascii_punct(static_cast<unsigned char>(c)); });
}

bool looks_numeric(std::string_view w) {
  std::string s;
  for (char c : w) {
    if (c != ',') s.push_back(c);
  }
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t digits = 0;
  while (i < s.size() && is_digit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && is_digit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
  }
  if (digits == 0) return false;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < s.size() && is_digit(static_cast<unsigned char>(s[i]))) ++i, ++exp_digits;
    if (exp_digits == 0) return false;
  }
  return i == s.size();
}

// d: number, u: unparsable, a: acronym, n: proper noun, p: plain.
char tag_of(std::string_view word, std::size_t pos_in_sentence) {
  if (looks_numeric(word)) return 'd';
  std::size_t digits = 0, alpha = 0, punct = 0, upper = 0;
  for (unsigned char c : word) {
    if (is_digit(c)) ++digits;
    if (is_ascii_alpha(c) || c >= 0x80) ++alpha;
    if (is_ascii_punct(c)) ++punct;
    if (c >= 'A' && c <= 'Z') ++upper;
  }
  if ((digits > 0 && alpha > 0) || (digits == 0 && alpha == 0) || punct > 1) return 'u';
  if (upper == word.size()) return 'a';
  if (upper == 1 && word.size() > 1 && word[0] >= 'A' && word[0] <= 'Z' && pos_in_sentence > 0) return 'n';
  return 'p';
}

struct Term {
  bool stopword = false;
  double tf = 0, tf_a = 0, tf_n = 0;
  std::vector<std::size_t> sentences;  // distinct, ascending
  double out_degree = 0, out_weight = 0, in_degree = 0, in_weight = 0;
  double h = 0;
};

struct Entry {
  char tag;
  std::size_t term;
  std::size_t token;
};

struct Candidate {
  std::string unique_kw;
  std::string surface;
  std::vector<std::size_t> terms;
  std::vector<std::string> tags;
  bool edge_stopword = false;
  double tf = 0;
  double h = 1.0;
  std::vector<TokenSpan> occurrences;

  bool valid() const {
    const bool ok_tag = std::any_of(tags.begin(), tags.end(), [](const std::string& t) {
      return t.find('u') == std::string::npos && t.find('d') == std::string::npos;
    });
    return ok_tag && !edge_stopword;
  }
};

double median(const std::vector<std::size_t>& sorted) {
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return static_cast<double>(sorted[n / 2]);
  return (static_cast<double>(sorted[n / 2 - 1]) + static_cast<double>(sorted[n / 2])) / 2.0;
}

class YakeDocument {
 public:
  YakeDocument(const StopwordSet& stopwords, const YakeConfig& config, const std::vector<Token>& tokens)
      : stopwords_(stopwords), config_(config), tokens_(tokens) {
    build();
  }

  std::vector<Keyword> top(std::size_t max_keywords) {
    std::vector<Keyword> out;
    if (max_keywords == 0 || !score_terms()) return out;

    std::vector<Candidate*> ranked;
    for (auto& c : candidates_) {
      if (!c.valid()) continue;
      score_candidate(c);
      ranked.push_back(&c);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const Candidate* x, const Candidate* y) { return x->h < y->h; });

    for (const Candidate* c : ranked) {
      bool keep = true;
      if (config_.dedup_threshold < 1.0) {
        for (const auto& chosen : out) {
          if (text::levenshtein_similarity(c->unique_kw, chosen.term) > config_.dedup_threshold) {
            keep = false;
            break;
          }
        }
      }
      if (keep) out.push_back({c->surface, c->unique_kw, c->h, c->occurrences});
      if (out.size() == max_keywords) break;
    }
    return out;
  }

 private:
  std::size_t term_for(const std::string& word) {
    std::string key = text::ascii_lower(word);
    const bool plain_stop = stopwords_.contains(key);
    if (key.size() > 3 && key.back() == 's') key.pop_back();
    if (auto it = term_index_.find(key); it != term_index_.end()) return it->second;

    std::string stripped;
    for (char c : key) {
      if (!is_ascii_punct(static_cast<unsigned char>(c))) stripped.push_back(c);
    }
    Term t;
    t.stopword = plain_stop || stopwords_.contains(key) || stripped.size() < 3;
    terms_.push_back(t);
    term_index_.emplace(std::move(key), terms_.size() - 1);
    return terms_.size() - 1;
  }

  void add_candidate(std::span<const Entry> entries) {
    std::string unique_kw, surface, tags;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const Token& tok = tokens_[entries[k].token];
      if (k > 0) {
        unique_kw.push_back(' ');
        surface.push_back(' ');
      }
      unique_kw += text::ascii_lower(tok.text);
      surface += tok.text;
      tags.push_back(entries[k].tag);
    }
    const Token& first = tokens_[entries.front().token];
    const Token& last = tokens_[entries.back().token];
    const TokenSpan span{entries.front().token, entries.back().token + 1, {first.span.begin, last.span.end}};

    auto it = candidate_index_.find(unique_kw);
    if (it == candidate_index_.end()) {
      Candidate c;
      c.unique_kw = unique_kw;
      c.surface = std::move(surface);
      for (const auto& e : entries) c.terms.push_back(e.term);
      c.edge_stopword = terms_[c.terms.front()].stopword || terms_[c.terms.back()].stopword;
      candidates_.push_back(std::move(c));
      it = candidate_index_.emplace(std::move(unique_kw), candidates_.size() - 1).first;
    }
    Candidate& c = candidates_[it->second];
    if (std::find(c.tags.begin(), c.tags.end(), tags) == c.tags.end()) c.tags.push_back(tags);
    c.tf += 1.0;
    c.occurrences.push_back(span);
  }

  void build() {
    std::vector<Entry> block;
    std::size_t current_sentence = static_cast<std::size_t>(-1);
    std::size_t pos_in_sentence = 0;
    auto is_discarded = [](char tag) { return tag == 'u' || tag == 'd'; };

    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      const Token& tok = tokens_[i];
      if (tok.sentence != current_sentence) {
        current_sentence = tok.sentence;
        pos_in_sentence = 0;
        block.clear();
        ++sentence_count_;
      }
      const std::size_t pos = pos_in_sentence++;
      if (is_exclude_only(tok)) {
        block.clear();
        continue;
      }
      const char tag = tag_of(tok.text, pos);
      const std::size_t term = term_for(tok.text);
      Term& t = terms_[term];
      t.tf += 1.0;
      if (tag == 'a') t.tf_a += 1.0;
      if (tag == 'n') t.tf_n += 1.0;
      if (t.sentences.empty() || t.sentences.back() != tok.sentence) t.sentences.push_back(tok.sentence);

      if (!is_discarded(tag)) {
        const std::size_t from = block.size() > config_.window ? block.size() - config_.window : 0;
        for (std::size_t w = from; w < block.size(); ++w) {
          if (!is_discarded(block[w].tag)) cooccur_[{block[w].term, term}] += 1.0;
        }
      }

      const Entry current{tag, term, i};
      block.push_back(current);
      const std::size_t longest = std::min(config_.ngram_max, block.size());
      for (std::size_t len = 1; len <= longest; ++len) {
        add_candidate(std::span<const Entry>(block).last(len));
      }
    }
  }

  bool score_terms() {
    std::vector<double> valid_tf;
    double max_tf = 0;
    for (const Term& t : terms_) {
      if (!t.stopword) valid_tf.push_back(t.tf);
      max_tf = std::max(max_tf, t.tf);
    }
    if (valid_tf.empty()) return false;
    double mean = 0;
    for (double v : valid_tf) mean += v;
    mean /= static_cast<double>(valid_tf.size());
    double var = 0;
    for (double v : valid_tf) var += (v - mean) * (v - mean);
    const double stddev = std::sqrt(var / static_cast<double>(valid_tf.size()));

    for (const auto& [edge, tf] : cooccur_) {
      Term& left = terms_[edge.first];
      Term& right = terms_[edge.second];
      left.out_degree += 1;
      left.out_weight += tf;
      right.in_degree += 1;
      right.in_weight += tf;
    }

    for (Term& t : terms_) {
      const double pwl = t.in_weight == 0 ? 0.0 : t.in_degree / t.in_weight;
      const double pwr = t.out_weight == 0 ? 0.0 : t.out_degree / t.out_weight;
      const double rel = (0.5 + pwl * (t.tf / max_tf)) + (0.5 + pwr * (t.tf / max_tf));
      const double freq = t.tf / (mean + stddev);
      const double spread = static_cast<double>(t.sentences.size()) / static_cast<double>(sentence_count_);
      const double casing = std::max(t.tf_a, t.tf_n) / (1.0 + std::log(t.tf));
      const double position = std::log(std::log(3.0 + median(t.sentences)));
      t.h = (position * rel) / (casing + freq / rel + spread / rel);
    }
    return true;
  }

  void score_candidate(Candidate& c) const {
    double sum_h = 0.0;
    double prod_h = 1.0;
    for (std::size_t k = 0; k < c.terms.size(); ++k) {
      const Term& t = terms_[c.terms[k]];
      if (!t.stopword) {
        sum_h += t.h;
        prod_h *= t.h;
        continue;
      }
      // Interior stopwords weigh by how strongly they bind their neighbours.
      double p1 = 0.0, p2 = 0.0;
      if (k > 0) {
        if (auto it = cooccur_.find({c.terms[k - 1], c.terms[k]}); it != cooccur_.end()) {
          p1 = it->second / terms_[c.terms[k - 1]].tf;
        }
      }
      if (k + 1 < c.terms.size()) {
        if (auto it = cooccur_.find({c.terms[k], c.terms[k + 1]}); it != cooccur_.end()) {
          p2 = it->second / terms_[c.terms[k + 1]].tf;
        }
      }
      const double prob = p1 * p2;
      prod_h *= 1.0 + (1.0 - prob);
      sum_h -= 1.0 - prob;
    }
    c.h = prod_h / ((sum_h + 1.0) * c.tf);
  }

  const StopwordSet& stopwords_;
  const YakeConfig& config_;
  const std::vector<Token>& tokens_;
  std::vector<Term> terms_;
  std::unordered_map<std::string, std::size_t> term_index_;
  std::map<std::pair<std::size_t, std::size_t>, double> cooccur_;
  std::vector<Candidate> candidates_;
  std::unordered_map<std::string, std::size_t> candidate_index_;
  std::size_t sentence_count_ = 0;
};

}  // namespace

KeywordExtractor::KeywordExtractor(std::shared_ptr<const StopwordSet> stopwords, YakeConfig config)
    : stopwords_(std::move(stopwords)), config_(config) {
  if (!stopwords_) throw InvalidArgument("KeywordExtractor needs a stopword set");
  if (config_.ngram_max == 0) throw InvalidArgument("ngram_max must be >= 1");
}

KeywordSet KeywordExtractor::extract(std::string_view text, std::size_t max_keywords) const {
  KeywordSet out;
  out.source_text = std::string(text);
  if (text::trim(text).empty()) return out;
  out.tokens = tokenize_for_keywords(out.source_text);
  YakeDocument doc(*stopwords_, config_, out.tokens);
  out.keywords = doc.top(max_keywords);
  return out;
}

KeywordSet extract_keywords(std::string_view text, std::size_t max_keywords) {
  static const KeywordExtractor extractor;
  return extractor.extract(text, max_keywords);
}

// ---------------------------------------------------------------------------
// Key_{A|Q}

const ConnectedKeyword* ConnectedKeywords::find(std::string_view keyword) const {
  for (const auto& e : entries) {
    if (e.keyword == keyword) return &e;
  }
  return nullptr;
}

ConnectedKeywords connect_keywords(const KnowledgeGraph& graph, const KeywordSet& key_q,
                                   const KeywordSet& key_a, const PathQuery& query) {
  if (query.max_hops == 0) throw InvalidArgument("connect_keywords needs max_hops >= 1");
  ConnectedKeywords out;
  if (graph.edge_count() == 0) return out;

  std::vector<std::vector<std::string>> question_concepts;
  question_concepts.reserve(key_q.keywords.size());
  for (const auto& q : key_q.keywords) question_concepts.push_back(match_concepts(graph, q.term));

  for (const auto& a : key_a.keywords) {
    ConnectedKeyword entry{a.term, a.occurrences, {}};
    for (const auto& source : match_concepts(graph, a.term)) {
      for (const auto& targets : question_concepts) {
        for (const auto& target : targets) {
          auto paths = find_paths(graph, source, target, query);
          std::move(paths.begin(), paths.end(), std::back_inserter(entry.paths));
        }
      }
    }
    if (!entry.paths.empty()) out.entries.push_back(std::move(entry));
  }
  return out;
}

}  // namespace cas

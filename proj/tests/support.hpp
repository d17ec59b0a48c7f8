#pragma once

// Helpers shared by the test binaries: fixture paths, a random graph
// generator and independent oracles for path search and scoring.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cas/kb_graph.hpp"
#include "cas/lm_gateway.hpp"
#include "cas/relations.hpp"

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(CAS_FIXTURES_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct RawEdge {
  std::string start;
  cas::Relation relation;
  std::string end;
};

struct RandomGraph {
  std::vector<RawEdge> edges;  // after dedup and self-loop removal
  cas::KnowledgeGraph graph;
  std::vector<std::string> nodes;
};

// nodes are named n00..nNN; some are two words to exercise multi-token
// targets.
inline RandomGraph random_graph(std::mt19937_64& rng, std::size_t max_nodes, std::size_t max_edges,
                                std::size_t relation_pool = cas::kRelationCount) {
  std::uniform_int_distribution<std::size_t> n_nodes(2, max_nodes);
  std::uniform_int_distribution<std::size_t> n_edges(0, max_edges);
  const std::size_t nn = n_nodes(rng);
  const std::size_t ne = n_edges(rng);
  RandomGraph g;
  for (std::size_t i = 0; i < nn; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "n%02zu", i);
    g.nodes.push_back(i % 5 == 4 ? std::string(buf) + " x" : std::string(buf));
  }
  std::uniform_int_distribution<std::size_t> pick(0, nn - 1);
  std::uniform_int_distribution<std::size_t> rel(0, relation_pool - 1);
  cas::GraphBuilder b;
  std::set<std::tuple<std::string, int, std::string>> seen;
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& s = g.nodes[pick(rng)];
    const auto& t = g.nodes[pick(rng)];
    const auto r = static_cast<cas::Relation>(rel(rng));
    b.add(s, r, t);
    if (s != t && seen.insert({s, static_cast<int>(r), t}).second) g.edges.push_back({s, r, t});
  }
  g.graph = std::move(b).build();
  return g;
}

// A path as comparable data: the node sequence plus each step's
// (start, relation, end, reversed).
using PathKey = std::pair<std::vector<std::string>, std::vector<std::tuple<std::string, int, std::string, bool>>>;

inline PathKey key_of(const cas::KGPath& p) {
  PathKey k;
  k.first = p.nodes();
  for (const auto& s : p.steps) {
    k.second.emplace_back(s.edge.start, static_cast<int>(s.edge.relation), s.edge.end,
                          s.direction == cas::Direction::kReverse);
  }
  return k;
}

// Brute force over the raw edge list: every walk of <= k edges with no
// repeated node. directed == true walks one-way relations along their
// template arrow only.
inline std::set<PathKey> oracle_paths(const std::vector<RawEdge>& edges, const std::string& a, const std::string& q,
                                      std::size_t k, bool directed = false) {
  std::set<PathKey> out;
  if (a == q) return out;
  auto allowed = [&](cas::Relation r, bool reverse) {
    if (!directed) return true;
    switch (cas::relation_info(r).arrow) {
      case cas::Arrow::kBoth:
        return true;
      case cas::Arrow::kForward:
        return !reverse;
      case cas::Arrow::kBackward:
        return reverse;
    }
    return false;
  };
  PathKey cur;
  cur.first.push_back(a);
  std::function<void(const std::string&)> dfs = [&](const std::string& at) {
    if (at == q) {
      out.insert(cur);
      return;
    }
    if (cur.second.size() == k) return;
    for (const auto& e : edges) {
      for (bool reverse : {false, true}) {
        const std::string& from = reverse ? e.end : e.start;
        const std::string& to = reverse ? e.start : e.end;
        if (from != at || !allowed(e.relation, reverse)) continue;
        if (std::find(cur.first.begin(), cur.first.end(), to) != cur.first.end()) continue;
        cur.first.push_back(to);
        cur.second.emplace_back(e.start, static_cast<int>(e.relation), e.end, reverse);
        dfs(to);
        cur.first.pop_back();
        cur.second.pop_back();
      }
    }
  };
  dfs(a);
  return out;
}

// Template table read from the golden file: relation name -> sentence with
// literal A and B slots.
inline std::map<std::string, std::string> golden_templates() {
  std::map<std::string, std::string> out;
  std::ifstream in(fixture("relation_templates.golden"));
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

// Splits a golden template for edge (a, r, b) into the words before the
// last slot and the last slot's filler.
inline std::pair<std::string, std::string> oracle_prompt(const std::string& pattern, const std::string& a,
                                                         const std::string& b) {
  std::istringstream words(pattern);
  std::vector<std::string> toks;
  for (std::string w; words >> w;) toks.push_back(w);
  std::size_t last = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i] == "A" || toks[i] == "B") last = i;
  }
  std::string prefix;
  for (std::size_t i = 0; i < last; ++i) {
    if (!prefix.empty()) prefix += " ";
    prefix += toks[i] == "A" ? a : toks[i] == "B" ? b : toks[i];
  }
  return {prefix, toks[last] == "A" ? a : b};
}

// Random (context, token) -> logprob table shared by a stub backend and the
// direct-formula oracles below. Keys are registered on demand; a fraction
// is left out so the stub's fallback path is exercised too.
struct LogprobTable {
  std::map<std::pair<std::string, std::string>, double> entries;
  double fallback = -1.0;

  double lookup(const std::string& context, const std::string& token) const {
    const auto it = entries.find({context, token});
    return it == entries.end() ? fallback : it->second;
  }

  cas::StubConfig stub() const {
    cas::StubConfig c;
    c.default_logprob = fallback;
    c.tokens = entries;
    return c;
  }
};

inline std::vector<std::string> words_of(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline std::string join_words(const std::vector<std::string>& ws, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + ws[i];
  return out;
}

// Log-probabilities of each word of `continuation` after `prefix`, read
// straight from the table with the stub's whitespace tokenization.
inline std::vector<double> oracle_token_logprobs(const LogprobTable& t, const std::string& prefix,
                                                 const std::string& continuation) {
  std::vector<std::string> all = words_of(prefix);
  const std::size_t n_prefix = all.size();
  for (auto& w : words_of(continuation)) all.push_back(w);
  std::vector<double> out;
  for (std::size_t j = n_prefix; j < all.size(); ++j) out.push_back(t.lookup(join_words(all, j), all[j]));
  return out;
}

// Registers every (context, token) pair the continuation touches with a
// random logprob, keeping about one in five on the fallback.
inline void fill_table(LogprobTable& t, std::mt19937_64& rng, const std::string& prefix,
                       const std::string& continuation) {
  std::uniform_real_distribution<double> lp(-6.0, 0.0);
  std::bernoulli_distribution keep(0.8);
  std::vector<std::string> all = words_of(prefix);
  const std::size_t n_prefix = all.size();
  for (auto& w : words_of(continuation)) all.push_back(w);
  for (std::size_t j = n_prefix; j < all.size(); ++j) {
    if (keep(rng)) t.entries.emplace(std::make_pair(join_words(all, j), all[j]), lp(rng));
  }
}

// log S(E) from the golden template: mean logprob of the last slot's words.
inline double oracle_edge(const std::map<std::string, std::string>& golden, const LogprobTable& t,
                          const std::string& a, cas::Relation r, const std::string& b) {
  const auto [prefix, target] = oracle_prompt(golden.at(std::string(cas::relation_name(r))), a, b);
  const auto lps = oracle_token_logprobs(t, prefix, target);
  double sum = 0.0;
  for (double x : lps) sum += x;
  return sum / static_cast<double>(lps.size());
}

inline void fill_edge(const std::map<std::string, std::string>& golden, LogprobTable& t, std::mt19937_64& rng,
                      const std::string& a, cas::Relation r, const std::string& b) {
  const auto [prefix, target] = oracle_prompt(golden.at(std::string(cas::relation_name(r))), a, b);
  fill_table(t, rng, prefix, target);
}

// Path value computed edge by edge plus the RelatedTo summary, over |p|+1.
inline double oracle_path_value(const std::map<std::string, std::string>& golden, const LogprobTable& t,
                                const cas::KGPath& p) {
  double sum = oracle_edge(golden, t, p.source, cas::Relation::kRelatedTo, p.target);
  for (const auto& s : p.steps) sum += oracle_edge(golden, t, s.edge.start, s.edge.relation, s.edge.end);
  return sum / static_cast<double>(p.steps.size() + 1);
}

// Length-normalized answer log-likelihood over statement plus answer tokens.
inline double oracle_basic_score(const LogprobTable& t, const std::string& statement, const std::string& answer) {
  const auto lps = oracle_token_logprobs(t, statement, answer);
  double sum = 0.0;
  for (double x : lps) sum += x;
  return sum / static_cast<double>(words_of(statement).size() + lps.size());
}

inline std::string random_sentence(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words) {
  static const std::vector<std::string> vocab{"the", "woman", "hired", "a", "lawyer", "she", "decided", "to",
                                              "sue", "her", "employer", "run", "for", "office", "because", "so"};
  std::uniform_int_distribution<std::size_t> len(min_words, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  const std::size_t n = len(rng);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + vocab[pick(rng)];
  return out;
}

}  // namespace testing

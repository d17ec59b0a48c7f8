#include "cas/kb_graph.hpp"

#include <zlib.h>

#include <algorithm>
#include <istream>
#include <unordered_set>

#include "cas/errors.hpp"
#include "cas/text.hpp"

namespace cas {

std::vector<std::string> KGPath::nodes() const {
  std::vector<std::string> out;
  out.reserve(steps.size() + 1);
  out.push_back(source);
  for (const auto& step : steps) out.push_back(step.to());
  return out;
}

std::uint64_t IngestConfig::fingerprint() const {
  std::string key = "lang=" + language + ";strip_pos=" + (strip_pos ? "1" : "0");
  return text::fnv1a(key);
}

// ---------------------------------------------------------------------------
// KnowledgeGraph

std::optional<KnowledgeGraph::TermId> KnowledgeGraph::find(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

KGEdge KnowledgeGraph::edge(std::uint32_t index) const {
  const Edge& e = edges_.at(index);
  return {terms_[e.start], e.relation, terms_[e.end]};
}

std::vector<KGEdge> KnowledgeGraph::edges() const {
  std::vector<KGEdge> out;
  out.reserve(edges_.size());
  for (std::uint32_t i = 0; i < edges_.size(); ++i) out.push_back(edge(i));
  return out;
}

std::span<const KnowledgeGraph::Step> KnowledgeGraph::steps(TermId id) const {
  if (id + 1 >= step_offsets_.size()) return {};
  return std::span<const Step>(steps_).subspan(step_offsets_[id],
                                               step_offsets_[id + 1] - step_offsets_[id]);
}

std::span<const KnowledgeGraph::Step> KnowledgeGraph::steps(std::string_view term) const {
  const auto id = find(term);
  if (!id) return {};
  return steps(*id);
}

void KnowledgeGraph::build_index() {
  index_.clear();
  index_.reserve(terms_.size());
  for (TermId i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i], i);

  std::vector<std::uint32_t> degree(terms_.size() + 1, 0);
  for (const Edge& e : edges_) {
    ++degree[e.start];
    ++degree[e.end];
  }
  step_offsets_.assign(terms_.size() + 1, 0);
  for (std::size_t i = 0; i < terms_.size(); ++i) step_offsets_[i + 1] = step_offsets_[i] + degree[i];

  steps_.assign(step_offsets_.back(), Step{});
  std::vector<std::uint32_t> fill(step_offsets_.begin(), step_offsets_.end() - 1);
  for (std::uint32_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    steps_[fill[e.start]++] = {e.end, i, Direction::kForward};
    steps_[fill[e.end]++] = {e.start, i, Direction::kReverse};
  }
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    auto first = steps_.begin() + step_offsets_[t];
    auto last = steps_.begin() + step_offsets_[t + 1];
    std::sort(first, last, [this](const Step& x, const Step& y) {
      if (x.neighbor != y.neighbor) return x.neighbor < y.neighbor;
      const auto rx = edges_[x.edge].relation;
      const auto ry = edges_[y.edge].relation;
      if (rx != ry) return rx < ry;
      if (x.direction != y.direction) return x.direction < y.direction;
      return x.edge < y.edge;
    });
  }
}

// ---------------------------------------------------------------------------
// GraphBuilder

bool GraphBuilder::add(std::string_view start, Relation relation, std::string_view end) {
  if (start.empty() || end.empty()) {
    ++stats_.malformed;
    return false;
  }
  if (start == end) {
    ++stats_.self_loops;
    return false;
  }
  edges_.push_back({std::string(start), relation, std::string(end)});
  return true;
}

KnowledgeGraph GraphBuilder::build() && {
  KnowledgeGraph g;
  std::vector<std::string> terms;
  terms.reserve(edges_.size() * 2);
  for (const auto& e : edges_) {
    terms.push_back(e.start);
    terms.push_back(e.end);
  }
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  g.terms_ = std::move(terms);

  auto id_of = [&g](const std::string& t) {
    auto it = std::lower_bound(g.terms_.begin(), g.terms_.end(), t);
    return static_cast<KnowledgeGraph::TermId>(it - g.terms_.begin());
  };
  g.edges_.reserve(edges_.size());
  for (const auto& e : edges_) g.edges_.push_back({id_of(e.start), id_of(e.end), e.relation});
  edges_.clear();

  auto key = [](const KnowledgeGraph::Edge& e) { return std::tuple(e.start, e.relation, e.end); };
  std::sort(g.edges_.begin(), g.edges_.end(),
            [&](const auto& x, const auto& y) { return key(x) < key(y); });
  const std::size_t before = g.edges_.size();
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());
  stats_.duplicates += before - g.edges_.size();
  stats_.edges = g.edges_.size();

  g.stats_ = stats_;
  g.build_index();
  return g;
}

// ---------------------------------------------------------------------------
// Ingest

std::optional<ConceptUri> parse_concept_uri(std::string_view uri, const IngestConfig& config) {
  if (!uri.starts_with("/c/")) return std::nullopt;
  uri.remove_prefix(3);
  const std::size_t slash = uri.find('/');
  if (slash == std::string_view::npos || slash == 0) return std::nullopt;
  ConceptUri out;
  out.language = std::string(uri.substr(0, slash));
  std::string_view rest = uri.substr(slash + 1);
  if (config.strip_pos) rest = rest.substr(0, rest.find('/'));
  out.term = text::normalize_term(rest);
  if (out.term.empty()) return std::nullopt;
  return out;
}

namespace {

// Returns false for lines that are not assertions at all.
bool ingest_line(std::string_view line, const IngestConfig& config, GraphBuilder& builder) {
  IngestStats& stats = builder.stats();
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (text::trim(line).empty()) return false;
  ++stats.lines;

  std::string_view fields[4];
  std::size_t start = 0;
  for (int i = 0; i < 4; ++i) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      if (i < 3) {
        ++stats.malformed;
        return true;
      }
      fields[i] = line.substr(start);
    } else {
      fields[i] = line.substr(start, tab - start);
      start = tab + 1;
    }
  }
  const std::string_view rel_uri = fields[1];
  if (!rel_uri.starts_with("/r/") || !fields[2].starts_with("/c/") || !fields[3].starts_with("/c/")) {
    ++stats.malformed;
    return true;
  }
  const auto relation = relation_from_name(rel_uri);
  if (!relation) {
    ++stats.untemplated_relation;
    return true;
  }
  const auto head = parse_concept_uri(fields[2], config);
  const auto tail = parse_concept_uri(fields[3], config);
  if (!head || !tail) {
    ++stats.malformed;
    return true;
  }
  if (head->language != config.language || tail->language != config.language) {
    ++stats.other_language;
    return true;
  }
  builder.add(head->term, *relation, tail->term);
  return true;
}

}  // namespace

KnowledgeGraph load_graph(std::istream& in, const IngestConfig& config) {
  GraphBuilder builder;
  std::string line;
  while (std::getline(in, line)) ingest_line(line, config, builder);
  return std::move(builder).build();
}

KnowledgeGraph load_graph_file(const std::filesystem::path& path, const IngestConfig& config) {
  // gzread passes uncompressed files through unchanged.
  gzFile file = gzopen(path.string().c_str(), "rb");
  if (file == nullptr) throw DataError("cannot open graph file " + path.string());
  gzbuffer(file, 1 << 17);

  GraphBuilder builder;
  std::string pending;
  std::vector<char> buffer(1 << 16);
  while (true) {
    const int n = gzread(file, buffer.data(), static_cast<unsigned>(buffer.size()));
    if (n < 0) {
      int code = 0;
      std::string message = gzerror(file, &code);
      gzclose(file);
      throw DataError("error reading " + path.string() + ": " + message);
    }
    if (n == 0) break;
    std::string_view chunk(buffer.data(), static_cast<std::size_t>(n));
    std::size_t pos = 0;
    while (true) {
      const std::size_t nl = chunk.find('\n', pos);
      if (nl == std::string_view::npos) {
        pending.append(chunk.substr(pos));
        break;
      }
      if (pending.empty()) {
        ingest_line(chunk.substr(pos, nl - pos), config, builder);
      } else {
        pending.append(chunk.substr(pos, nl - pos));
        ingest_line(pending, config, builder);
        pending.clear();
      }
      pos = nl + 1;
    }
  }
  gzclose(file);
  if (!pending.empty()) ingest_line(pending, config, builder);
  return std::move(builder).build();
}

// ---------------------------------------------------------------------------
// Verbalization

std::string verbalize_edge(const KGEdge& edge) {
  return render_relation(edge.relation, edge.start, edge.end);
}

std::vector<std::string> verbalize_path(const KGPath& path) {
  std::vector<std::string> out;
  out.reserve(path.steps.size() + 1);
  for (const auto& step : path.steps) out.push_back(verbalize_edge(step.edge));
  out.push_back(verbalize_edge(path.summary_edge()));
  return out;
}

// ---------------------------------------------------------------------------
// Keyword to concept matching

namespace {

std::optional<std::string> match_single(const KnowledgeGraph& graph, const std::string& term) {
  if (graph.contains(term)) return term;
  for (auto& variant : text::lemma_variants(term)) {
    if (graph.contains(variant)) return std::move(variant);
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::string> match_concepts(const KnowledgeGraph& graph, std::string_view phrase) {
  const std::string term = text::normalize_term(phrase);
  if (term.empty()) return {};
  if (auto whole = match_single(graph, term)) return {std::move(*whole)};
  if (term.find(' ') == std::string::npos) return {};

  std::vector<std::string> out;
  for (const auto& word : text::split(term, ' ')) {
    if (word.empty()) continue;
    if (auto hit = match_single(graph, word)) {
      if (std::find(out.begin(), out.end(), *hit) == out.end()) out.push_back(std::move(*hit));
    }
  }
  return out;
}

}  // namespace cas

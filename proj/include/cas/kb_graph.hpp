#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cas/relations.hpp"

namespace cas {

// One ConceptNet assertion between two normalized concept terms. start and
// end are the stored orientation; verbalization always uses it.
struct KGEdge {
  std::string start;
  Relation relation = Relation::kRelatedTo;
  std::string end;

  friend bool operator==(const KGEdge&, const KGEdge&) = default;
};

// How an edge was walked inside a path: kForward goes start -> end.
enum class Direction : std::uint8_t { kForward, kReverse };

struct PathStep {
  KGEdge edge;
  Direction direction = Direction::kForward;

  const std::string& from() const { return direction == Direction::kForward ? edge.start : edge.end; }
  const std::string& to() const { return direction == Direction::kForward ? edge.end : edge.start; }
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

// A simple path source ~> target of one or more steps.
struct KGPath {
  std::string source;
  std::string target;
  std::vector<PathStep> steps;

  std::size_t size() const { return steps.size(); }
  // Node sequence source, ..., target.
  std::vector<std::string> nodes() const;
  // Synthetic (source, RelatedTo, target) edge scored alongside the real ones.
  KGEdge summary_edge() const { return {source, Relation::kRelatedTo, target}; }

  friend bool operator==(const KGPath&, const KGPath&) = default;
};

struct IngestConfig {
  std::string language = "en";
  // Drop the "/n", "/v/wn/..." tail of concept URIs.
  bool strip_pos = true;

  // Stable fingerprint used to invalidate snapshot caches.
  std::uint64_t fingerprint() const;
};

struct IngestStats {
  std::size_t lines = 0;
  std::size_t edges = 0;
  std::size_t malformed = 0;
  std::size_t untemplated_relation = 0;
  std::size_t other_language = 0;
  std::size_t self_loops = 0;
  std::size_t duplicates = 0;

  friend bool operator==(const IngestStats&, const IngestStats&) = default;
};

// Which way an edge may be walked during path search.
enum class Traversal : std::uint8_t {
  // Any edge in either direction (ConceptNet paths mix arrow directions,
  // e.g. sue -RelatedTo-> law <-HasContext- lawyer).
  kUndirected,
  // Symmetric relations both ways; one-way relations only along their
  // template's reading direction.
  kTemplateDirection,
};

struct PathQuery {
  std::size_t max_hops = 3;
  // 0 disables the cap.
  std::size_t max_paths = 50;
  Traversal traversal = Traversal::kUndirected;
};

// Immutable indexed multigraph of templated ConceptNet edges. Term ids are
// assigned in lexicographic order of the term text, so id order equals
// string order.
class KnowledgeGraph {
 public:
  using TermId = std::uint32_t;

  struct Edge {
    TermId start;
    TermId end;
    Relation relation;
    friend bool operator==(const Edge&, const Edge&) = default;
  };

  // Incident edge as seen from one endpoint.
  struct Step {
    TermId neighbor;
    std::uint32_t edge;
    Direction direction;  // kForward when this endpoint is the edge start
    friend bool operator==(const Step&, const Step&) = default;
  };

  KnowledgeGraph() = default;

  std::size_t edge_count() const { return edges_.size(); }
  std::size_t term_count() const { return terms_.size(); }
  bool contains(std::string_view term) const { return find(term).has_value(); }
  std::optional<TermId> find(std::string_view term) const;
  const std::string& term(TermId id) const { return terms_[id]; }
  std::span<const std::string> terms() const { return terms_; }
  std::span<const Edge> raw_edges() const { return edges_; }
  KGEdge edge(std::uint32_t index) const;
  std::vector<KGEdge> edges() const;

  // Incident steps sorted by (neighbor, relation, direction). Empty for ids
  // that have no edges.
  std::span<const Step> steps(TermId id) const;
  // Same, by term text; empty for absent terms.
  std::span<const Step> steps(std::string_view term) const;

  const IngestStats& stats() const { return stats_; }

  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    return a.terms_ == b.terms_ && a.edges_ == b.edges_;
  }

 private:
  friend class GraphBuilder;
  friend void save_snapshot(const KnowledgeGraph&, const IngestConfig&, const std::filesystem::path&);
  friend std::optional<KnowledgeGraph> load_snapshot(const std::filesystem::path&, const IngestConfig&);

  void build_index();

  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> index_;
  std::vector<Edge> edges_;  // sorted by (start, relation, end), unique
  std::vector<std::uint32_t> step_offsets_;
  std::vector<Step> steps_;
  IngestStats stats_;
};

// Collects edges and produces a KnowledgeGraph. Duplicate triples and
// self-loops are dropped and counted.
class GraphBuilder {
 public:
  // Returns false when the edge was dropped.
  bool add(std::string_view start, Relation relation, std::string_view end);
  IngestStats& stats() { return stats_; }
  KnowledgeGraph build() &&;

 private:
  struct RawEdge {
    std::string start;
    Relation relation;
    std::string end;
  };
  std::vector<RawEdge> edges_;
  IngestStats stats_;
};

// Parses a ConceptNet concept URI "/c/<lang>/<term>[/<pos>/...]". Returns
// nullopt if the URI is not a concept or is not in config.language.
struct ConceptUri {
  std::string language;
  std::string term;
};
std::optional<ConceptUri> parse_concept_uri(std::string_view uri, const IngestConfig& config);

// Reads a ConceptNet 5 assertions TSV stream. Lines that do not parse are
// counted, never fatal.
KnowledgeGraph load_graph(std::istream& in, const IngestConfig& config = {});
// Same for a file path; gzip-compressed files are detected and inflated.
KnowledgeGraph load_graph_file(const std::filesystem::path& path, const IngestConfig& config = {});

// Binary snapshot of a built graph. load_snapshot returns nullopt when the
// file is missing, has another format version, or was built with a
// different IngestConfig.
void save_snapshot(const KnowledgeGraph& graph, const IngestConfig& config,
                   const std::filesystem::path& path);
std::optional<KnowledgeGraph> load_snapshot(const std::filesystem::path& path,
                                            const IngestConfig& config);

// Whether walking `relation` in `direction` is allowed under `traversal`.
bool traversable(Relation relation, Direction direction, Traversal traversal);

// All simple paths from a to q with at most query.max_hops edges, ordered
// lexicographically by node sequence and then by (relation, direction) of
// each step. Stops after query.max_paths paths when the cap is set.
std::vector<KGPath> find_paths(const KnowledgeGraph& graph, std::string_view a, std::string_view q,
                               const PathQuery& query);
inline std::vector<KGPath> find_paths(const KnowledgeGraph& graph, std::string_view a,
                                      std::string_view q, std::size_t max_hops) {
  return find_paths(graph, a, q, PathQuery{.max_hops = max_hops});
}

std::string verbalize_edge(const KGEdge& edge);
// One sentence per step in path order, then the summary-edge sentence.
std::vector<std::string> verbalize_path(const KGPath& path);

// Maps a keyword phrase onto graph concepts: the whole normalized phrase,
// then its lemma variants, then (for multi-word phrases) each word the same
// way. Returns an empty list when nothing matches.
std::vector<std::string> match_concepts(const KnowledgeGraph& graph, std::string_view phrase);

}  // namespace cas

#include <cstring>
#include <fstream>

#include "cas/errors.hpp"
#include "cas/kb_graph.hpp"

// Snapshot layout (little-endian host order, not portable across
// architectures):
//   magic "CASKG\0\0\0" | u32 version | u64 ingest fingerprint
//   u64 term count | { u32 length | bytes }*
//   u64 edge count | { u32 start | u32 end | u8 relation }*
//   7 x u64 ingest stats

namespace cas {
namespace {

constexpr char kMagic[8] = {'C', 'A', 'S', 'K', 'G', 0, 0, 0};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return static_cast<bool>(in);
}

}  // namespace

void save_snapshot(const KnowledgeGraph& graph, const IngestConfig& config,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write snapshot " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, config.fingerprint());
  put<std::uint64_t>(out, graph.terms_.size());
  for (const auto& t : graph.terms_) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.size()));
    out.write(t.data(), static_cast<std::streamsize>(t.size()));
  }
  put<std::uint64_t>(out, graph.edges_.size());
  for (const auto& e : graph.edges_) {
    put(out, e.start);
    put(out, e.end);
    put(out, static_cast<std::uint8_t>(e.relation));
  }
  const IngestStats& s = graph.stats_;
  for (std::size_t v : {s.lines, s.edges, s.malformed, s.untemplated_relation, s.other_language,
                        s.self_loops, s.duplicates}) {
    put<std::uint64_t>(out, v);
  }
  if (!out) throw DataError("failed writing snapshot " + path.string());
}

std::optional<KnowledgeGraph> load_snapshot(const std::filesystem::path& path,
                                            const IngestConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) return std::nullopt;
  std::uint32_t version = 0;
  std::uint64_t fingerprint = 0;
  if (!get(in, version) || version != kVersion) return std::nullopt;
  if (!get(in, fingerprint) || fingerprint != config.fingerprint()) return std::nullopt;

  KnowledgeGraph g;
  std::uint64_t term_count = 0;
  if (!get(in, term_count)) return std::nullopt;
  g.terms_.resize(term_count);
  for (auto& t : g.terms_) {
    std::uint32_t len = 0;
    if (!get(in, len)) return std::nullopt;
    t.resize(len);
    in.read(t.data(), len);
    if (!in) return std::nullopt;
  }
  std::uint64_t edge_count = 0;
  if (!get(in, edge_count)) return std::nullopt;
  g.edges_.resize(edge_count);
  for (auto& e : g.edges_) {
    std::uint8_t rel = 0;
    if (!get(in, e.start) || !get(in, e.end) || !get(in, rel)) return std::nullopt;
    if (rel >= kRelationCount || e.start >= term_count || e.end >= term_count) return std::nullopt;
    e.relation = static_cast<Relation>(rel);
  }
  IngestStats& s = g.stats_;
  for (std::size_t* v : {&s.lines, &s.edges, &s.malformed, &s.untemplated_relation,
                         &s.other_language, &s.self_loops, &s.duplicates}) {
    std::uint64_t x = 0;
    if (!get(in, x)) return std::nullopt;
    *v = x;
  }
  g.build_index();
  return g;
}

}  // namespace cas

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace cas {

// The ConceptNet relations that have a sentence template. Anything else in a
// ConceptNet dump is dropped at ingest time.
enum class Relation : std::uint8_t {
  kRelatedTo,
  kFormOf,
  kIsA,
  kPartOf,
  kHasA,
  kUsedFor,
  kNotUsedFor,
  kCapableOf,
  kNotCapableOf,
  kAtLocation,
  kCauses,
  kHasSubevent,
  kHasFirstSubevent,
  kHasLastSubevent,
  kHasPrerequisite,
  kHasProperty,
  kNotHasProperty,
  kMotivatedByGoal,
  kObstructedBy,
  kDesires,
  kNotDesires,
  kCreatedBy,
  kSynonym,
  kAntonym,
  kDistinctFrom,
  kDerivedFrom,
  kSymbolOf,
  kDefinedAs,
  kMannerOf,
  kLocatedNear,
  kHasContext,
  kSimilarTo,
  kEtymologicallyRelatedTo,
  kEtymologicallyDerivedFrom,
  kCausesDesire,
  kMadeOf,
  kReceivesAction,
};

inline constexpr std::size_t kRelationCount = 37;

// Reading direction of a relation's template relative to the stored edge
// (start = A, end = B). kBackward templates read B first, e.g. HasSubevent
// renders as "B happens as a subevent of A".
enum class Arrow : std::uint8_t { kForward, kBackward, kBoth };

struct RelationInfo {
  Relation id;
  std::string_view name;  // ConceptNet name without the /r/ prefix
  // Sentence pattern; "{A}" is the edge start, "{B}" the edge end.
  std::string_view pattern;
  Arrow arrow;
};

std::span<const RelationInfo> all_relations();
const RelationInfo& relation_info(Relation r);
std::string_view relation_name(Relation r);
bool is_symmetric(Relation r);

// Accepts "RelatedTo" or "/r/RelatedTo". Returns nullopt for relations
// without a template (dbpedia/*, ExternalURL, ...).
std::optional<Relation> relation_from_name(std::string_view name);

// Fills the template. Throws UntemplatedRelation if r is not a known value.
std::string render_relation(Relation r, std::string_view a, std::string_view b);

// Splits the rendered sentence before the slot that comes last, which is the
// node the language model is asked to predict.
struct RelationPrompt {
  std::string prefix;  // e.g. "sue is related to"
  std::string target;  // e.g. "law"
};
RelationPrompt relation_prompt(Relation r, std::string_view a, std::string_view b);

}  // namespace cas

#include "cas/relations.hpp"

#include <array>

#include "cas/errors.hpp"

namespace cas {
namespace {

using R = Relation;
using A = Arrow;

constexpr std::array<RelationInfo, kRelationCount> kRelations = {{
    {R::kRelatedTo, "RelatedTo", "{A} is related to {B}", A::kBoth},
    {R::kFormOf, "FormOf", "{A} is a form of {B}", A::kForward},
    {R::kIsA, "IsA", "{A} is a {B}", A::kForward},
    {R::kPartOf, "PartOf", "{A} is a part of {B}", A::kForward},
    {R::kHasA, "HasA", "{A} has a {B}", A::kForward},
    {R::kUsedFor, "UsedFor", "{A} is used for {B}", A::kForward},
    {R::kNotUsedFor, "NotUsedFor", "{A} is not used for {B}", A::kForward},
    {R::kCapableOf, "CapableOf", "{A} is capable of {B}", A::kForward},
    {R::kNotCapableOf, "NotCapableOf", "{A} is not capable of {B}", A::kForward},
    {R::kAtLocation, "AtLocation", "{A} is a location for {B}", A::kForward},
    {R::kCauses, "Causes", "{A} causes {B}", A::kForward},
    {R::kHasSubevent, "HasSubevent", "{B} happens as a subevent of {A}", A::kBackward},
    {R::kHasFirstSubevent, "HasFirstSubevent", "{A} begins with {B}", A::kForward},
    {R::kHasLastSubevent, "HasLastSubevent", "{A} ends with {B}", A::kForward},
    {R::kHasPrerequisite, "HasPrerequisite", "{B} is a dependency of {A}", A::kBackward},
    {R::kHasProperty, "HasProperty", "{A} can be described as {B}", A::kForward},
    {R::kNotHasProperty, "NotHasProperty", "{A} can not be described as {B}", A::kForward},
    {R::kMotivatedByGoal, "MotivatedByGoal", "Someone does {A} because they want result {B}",
     A::kForward},
    {R::kObstructedBy, "ObstructedBy", "{A} is a obstacle in the way of {B}", A::kForward},
    {R::kDesires, "Desires", "{A} desires {B}", A::kForward},
    {R::kNotDesires, "NotDesires", "{A} do not desire {B}", A::kForward},
    {R::kCreatedBy, "CreatedBy", "{A} is created by {B}", A::kForward},
    {R::kSynonym, "Synonym", "{A} is similar to {B}", A::kBoth},
    {R::kAntonym, "Antonym", "{A} is opposite to {B}", A::kBoth},
    {R::kDistinctFrom, "DistinctFrom", "{A} is distinct from {B}", A::kBoth},
    {R::kDerivedFrom, "DerivedFrom", "{A} is derived from {B}", A::kForward},
    {R::kSymbolOf, "SymbolOf", "{A} is a symbol of {B}", A::kForward},
    {R::kDefinedAs, "DefinedAs", "{A} is defined as {B}", A::kForward},
    {R::kMannerOf, "MannerOf", "{A} is a specific way to do {B}", A::kForward},
    {R::kLocatedNear, "LocatedNear", "{A} is near to {B}", A::kBoth},
    {R::kHasContext, "HasContext", "{A} is a word used in the context of {B}", A::kForward},
    {R::kSimilarTo, "SimilarTo", "{A} is similar to {B}", A::kBoth},
    {R::kEtymologicallyRelatedTo, "EtymologicallyRelatedTo", "{A} have a common origin with {B}",
     A::kBoth},
    {R::kEtymologicallyDerivedFrom, "EtymologicallyDerivedFrom", "{A} is derived from {B}",
     A::kForward},
    {R::kCausesDesire, "CausesDesire", "{A} makes someone want {B}", A::kForward},
    {R::kMadeOf, "MadeOf", "{A} is made of {B}", A::kForward},
    {R::kReceivesAction, "ReceivesAction", "{B} can be done to {A}", A::kBackward},
}};

constexpr bool table_is_indexed() {
  for (std::size_t i = 0; i < kRelations.size(); ++i) {
    if (static_cast<std::size_t>(kRelations[i].id) != i) return false;
  }
  return true;
}
static_assert(table_is_indexed(), "relation table must be ordered by enum value");

// Positions of the two slots in a pattern.
struct Slots {
  std::size_t a;
  std::size_t b;
};

Slots find_slots(std::string_view pattern) {
  return {pattern.find("{A}"), pattern.find("{B}")};
}

}  // namespace

std::span<const RelationInfo> all_relations() { return kRelations; }

const RelationInfo& relation_info(Relation r) {
  const auto i = static_cast<std::size_t>(r);
  if (i >= kRelations.size()) {
    throw UntemplatedRelation("relation id " + std::to_string(i) + " has no template");
  }
  return kRelations[i];
}

std::string_view relation_name(Relation r) { return relation_info(r).name; }

bool is_symmetric(Relation r) { return relation_info(r).arrow == Arrow::kBoth; }

std::optional<Relation> relation_from_name(std::string_view name) {
  if (name.starts_with("/r/")) name.remove_prefix(3);
  while (!name.empty() && name.back() == '/') name.remove_suffix(1);
  for (const auto& info : kRelations) {
    if (info.name == name) return info.id;
  }
  return std::nullopt;
}

std::string render_relation(Relation r, std::string_view a, std::string_view b) {
  const std::string_view pattern = relation_info(r).pattern;
  std::string out;
  out.reserve(pattern.size() + a.size() + b.size());
  for (std::size_t i = 0; i < pattern.size();) {
    if (pattern.compare(i, 3, "{A}") == 0) {
      out.append(a);
      i += 3;
    } else if (pattern.compare(i, 3, "{B}") == 0) {
      out.append(b);
      i += 3;
    } else {
      out.push_back(pattern[i++]);
    }
  }
  return out;
}

RelationPrompt relation_prompt(Relation r, std::string_view a, std::string_view b) {
  const std::string_view pattern = relation_info(r).pattern;
  const Slots slots = find_slots(pattern);
  const bool a_last = slots.a > slots.b;

  // Every template ends in its last slot, so dropping the target's text from
  // the rendered sentence leaves the prompt.
  std::string head = render_relation(r, a, b);
  const std::string_view target = a_last ? a : b;
  head.resize(head.size() - target.size());
  while (!head.empty() && head.back() == ' ') head.pop_back();
  return {std::move(head), std::string(target)};
}

}  // namespace cas

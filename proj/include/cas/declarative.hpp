#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "cas/datasets.hpp"

namespace cas {

struct DeclarativeStatement {
  std::string text;
  std::string rule;  // e.g. "copa:because", "socialiqa:xNeed", "passthrough"
};

// Rewrites an instance's context/question into a prefix the answer choices
// continue. Throws DataError for a SocialIQA question whose category cannot
// be determined.
DeclarativeStatement to_declarative(const InstanceRecord& instance);

// Answer text as it is appended after the statement. COPA choices are full
// sentences, so their first letter is lowercased ("She decided" ->
// "she decided"); other datasets are unchanged.
std::string answer_for_statement(const InstanceRecord& instance, std::string_view choice);

// SocialIQA question category (xIntent, xNeed, xAttr, xReact, xWant,
// xEffect, oReact, oWant, oEffect) and the person the question is about.
struct SocialIqaCategory {
  std::string category;
  std::string subject;
};
std::optional<SocialIqaCategory> classify_socialiqa_question(std::string_view question);

// "Before, {X} needed to" and friends; {X} is the subject.
std::optional<std::string> socialiqa_connective(std::string_view category, std::string_view subject);

}  // namespace cas

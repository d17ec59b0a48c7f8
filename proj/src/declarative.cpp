#include "cas/declarative.hpp"

#include <array>
#include <cctype>
#include <regex>

#include "cas/errors.hpp"
#include "cas/text.hpp"

namespace cas {
namespace {

std::string strip_final_period(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && s.back() == '.') s.remove_suffix(1);
  return std::string(text::trim(s));
}

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

std::string first_word(std::string_view s) {
  const auto end = s.find_first_of(" ,.;:!?'");
  return std::string(s.substr(0, end));
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool contains_word(std::string_view haystack, std::string_view word) {
  for (auto at = haystack.find(word); at != std::string_view::npos; at = haystack.find(word, at + 1)) {
    const bool left = at == 0 || !is_word_char(haystack[at - 1]);
    const std::size_t end = at + word.size();
    const bool right = end == haystack.size() || !is_word_char(haystack[end]);
    if (left && right) return true;
  }
  return false;
}

struct QuestionPattern {
  std::regex re;
  const char* category;  // for a named subject
  const char* others;    // when the subject is "others"
};

const std::vector<QuestionPattern>& question_patterns() {
  static const std::vector<QuestionPattern> patterns = [] {
    const auto flags = std::regex::icase | std::regex::ECMAScript;
    std::vector<QuestionPattern> p;
    p.push_back({std::regex(R"(^what (?:does|did|do|will) (.+?) (?:need|have) to do (?:before|first).*$)", flags),
                 "xNeed", "xNeed"});
    p.push_back({std::regex(R"(^why did (.+?) (?:do|want|decide).*$)", flags), "xIntent", "xIntent"});
    p.push_back({std::regex(R"(^how would you describe (.+?)\??$)", flags), "xAttr", "xAttr"});
    p.push_back({std::regex(R"(^how (?:would|will|did|does) (.+?) feel.*$)", flags), "xReact", "oReact"});
    p.push_back({std::regex(R"(^what (?:will|would|does|did) (.+?) want to do.*$)", flags), "xWant", "oWant"});
    p.push_back({std::regex(R"(^what will (.+?) do next.*$)", flags), "xWant", "oWant"});
    p.push_back({std::regex(R"(^what will happen to (.+?)\??$)", flags), "xEffect", "oEffect"});
    p.push_back({std::regex(R"(^what (?:will|would) (.+?) do (?:after|as a result).*$)", flags), "xWant", "oWant"});
    return p;
  }();
  return patterns;
}

bool is_others(std::string_view subject) {
  const std::string s = text::ascii_lower(subject);
  return s == "others" || s == "other people" || s == "the others";
}

}  // namespace

std::optional<SocialIqaCategory> classify_socialiqa_question(std::string_view question) {
  const std::string q(text::trim(question));
  std::smatch m;
  for (const auto& p : question_patterns()) {
    if (std::regex_match(q, m, p.re)) {
      std::string subject = m[1].str();
      if (is_others(subject)) return SocialIqaCategory{p.others, "others"};
      return SocialIqaCategory{p.category, std::move(subject)};
    }
  }
  return std::nullopt;
}

std::optional<std::string> socialiqa_connective(std::string_view category, std::string_view subject) {
  static const std::array<std::pair<std::string_view, std::string_view>, 9> kMap{{
      {"xIntent", "{X} did this because they wanted to"},
      {"xNeed", "Before, {X} needed to"},
      {"xAttr", "{X} is seen as"},
      {"xReact", "As a result, {X} felt"},
      {"xWant", "As a result, {X} wanted to"},
      {"xEffect", "As a result, {X}"},
      {"oReact", "As a result, others felt"},
      {"oWant", "As a result, others wanted to"},
      {"oEffect", "As a result, others"},
  }};
  for (const auto& [cat, pattern] : kMap) {
    if (cat != category) continue;
    std::string out(pattern);
    if (const auto at = out.find("{X}"); at != std::string::npos) out.replace(at, 3, subject);
    return out;
  }
  return std::nullopt;
}

DeclarativeStatement to_declarative(const InstanceRecord& inst) {
  switch (inst.dataset) {
    case DatasetTag::kCopa: {
      const std::string connective = inst.question_type == "cause" ? "because" : "so";
      return {strip_final_period(inst.context) + " " + connective, "copa:" + connective};
    }
    case DatasetTag::kSct:
      return {std::string(text::trim(inst.context)), "passthrough"};
    case DatasetTag::kArc:
    case DatasetTag::kObqa: {
      const std::string stem(text::trim(inst.question_text()));
      if (!stem.empty() && stem.back() == '?') return {stem + " the answer is", "question:the answer is"};
      return {stem, "passthrough"};
    }
    case DatasetTag::kSocialIqa: {
      std::optional<SocialIqaCategory> cat = classify_socialiqa_question(inst.question);
      if (!inst.question_type.empty()) {
        // An explicit category wins; the subject still comes from the question.
        const std::string subject = cat ? cat->subject : std::string("they");
        cat = SocialIqaCategory{inst.question_type, subject};
      }
      if (!cat) throw DataError("cannot map SocialIQA question to a category: '" + inst.question + "'");
      const auto connective = socialiqa_connective(cat->category, cat->subject);
      if (!connective) throw DataError("unmapped SocialIQA category '" + cat->category + "'");
      return {std::string(text::trim(inst.context)) + " " + *connective, "socialiqa:" + cat->category};
    }
  }
  throw DataError("no declarative rule for this dataset");
}

std::string answer_for_statement(const InstanceRecord& inst, std::string_view choice) {
  std::string a(text::trim(choice));
  if (a.empty() || !is_upper(a[0])) return a;
  const std::string word = first_word(a);
  if (word == "I") return a;
  if (inst.dataset == DatasetTag::kCopa) {
    a[0] = static_cast<char>(a[0] - 'A' + 'a');
  } else if (inst.dataset == DatasetTag::kSocialIqa) {
    // Keep names capitalized: only lowercase words the context never uses
    // with a capital.
    if (!contains_word(inst.question_text(), word)) a[0] = static_cast<char>(a[0] - 'A' + 'a');
  }
  return a;
}

}  // namespace cas

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cas::text {

// Character range [begin, end) into some owning string.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool overlaps(const CharSpan& o) const { return begin < o.end && o.begin < end; }
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

// Lowercases ASCII letters only; UTF-8 continuation bytes pass through.
std::string ascii_lower(std::string_view s);
std::string_view trim(std::string_view s);
// Trims and collapses interior whitespace runs to one space.
std::string squeeze_spaces(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

struct WordSpan {
  std::string text;
  CharSpan span;
};
// Whitespace tokenization with offsets.
std::vector<WordSpan> whitespace_tokens(std::string_view s);

// Normalized concept form: lowercase, '_' -> ' ', squeezed.
std::string normalize_term(std::string_view s);

// Naive suffix-stripping candidates for the last word of a term, most
// specific first (e.g. "decided" -> "decide", "decid"). Never includes the
// input itself.
std::vector<std::string> lemma_variants(std::string_view term);

// Levenshtein similarity in [0,1]: 1 - distance / max(len).
double levenshtein_similarity(std::string_view a, std::string_view b);

// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);

bool is_sentence_terminator(char c);

}  // namespace cas::text

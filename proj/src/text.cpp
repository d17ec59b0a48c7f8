#include "cas/text.hpp"

#include <algorithm>
#include <numeric>

namespace cas::text {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string squeeze_spaces(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<WordSpan> whitespace_tokens(std::string_view s) {
  std::vector<WordSpan> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    if (i >= s.size()) break;
    const std::size_t begin = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    out.push_back({std::string(s.substr(begin, i - begin)), {begin, i}});
  }
  return out;
}

std::string normalize_term(std::string_view s) {
  std::string lowered = ascii_lower(s);
  std::replace(lowered.begin(), lowered.end(), '_', ' ');
  return squeeze_spaces(lowered);
}

std::vector<std::string> lemma_variants(std::string_view term) {
  const std::size_t cut = term.rfind(' ');
  const std::string_view head = cut == std::string_view::npos ? std::string_view{} : term.substr(0, cut + 1);
  const std::string_view word = cut == std::string_view::npos ? term : term.substr(cut + 1);

  std::vector<std::string> stems;
  auto add = [&](std::string_view stem) {
    if (stem.size() < 2) return;
    std::string full = std::string(head) + std::string(stem);
    if (full == term) return;
    if (std::find(stems.begin(), stems.end(), full) == stems.end()) stems.push_back(std::move(full));
  };
  auto strip = [&](std::string_view suffix) -> std::string_view {
    return word.substr(0, word.size() - suffix.size());
  };

  if (word.ends_with("ies") && word.size() > 4) add(std::string(strip("ies")) + "y");
  if (word.ends_with("ing") && word.size() > 4) {
    add(std::string(strip("ing")) + "e");
    add(strip("ing"));
    const std::string_view base = strip("ing");
    // running -> run
    if (base.size() >= 2 && base[base.size() - 1] == base[base.size() - 2]) {
      add(base.substr(0, base.size() - 1));
    }
  }
  if (word.ends_with("ed") && word.size() > 3) {
    add(strip("d"));
    add(strip("ed"));
    const std::string_view base = strip("ed");
    if (base.size() >= 2 && base[base.size() - 1] == base[base.size() - 2]) {
      add(base.substr(0, base.size() - 1));
    }
  }
  if (word.ends_with("es") && word.size() > 3) add(strip("es"));
  if (word.ends_with("s") && !word.ends_with("ss") && word.size() > 2) add(strip("s"));
  return stems;
}

double levenshtein_similarity(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
    }
    std::swap(prev, cur);
  }
  return 1.0 - static_cast<double>(prev[b.size()]) / static_cast<double>(longest);
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool is_sentence_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace cas::text

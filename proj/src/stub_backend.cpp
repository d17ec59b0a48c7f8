#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "cas/errors.hpp"
#include "cas/lm_gateway.hpp"

namespace cas {
namespace {

using nlohmann::json;

void check_logprob(double lp, const std::string& where) {
  if (!std::isfinite(lp) || lp > 0.0) {
    throw DataError("stub config: logprob " + std::to_string(lp) + " in " + where + " is not in (-inf, 0]");
  }
}

std::string join_tokens(std::span<const text::WordSpan> a, std::span<const text::WordSpan> b) {
  std::string out;
  for (const auto& t : a) {
    if (!out.empty()) out.push_back(' ');
    out += t.text;
  }
  for (const auto& t : b) {
    if (!out.empty()) out.push_back(' ');
    out += t.text;
  }
  return out;
}

// Lowercase with leading/trailing ASCII punctuation removed.
std::string bare_word(std::string_view w) {
  auto is_edge = [](char c) { return !std::isalnum(static_cast<unsigned char>(c)) && static_cast<unsigned char>(c) < 0x80; };
  while (!w.empty() && is_edge(w.front())) w.remove_prefix(1);
  while (!w.empty() && is_edge(w.back())) w.remove_suffix(1);
  return text::ascii_lower(w);
}

std::uint64_t mix_seed(std::uint64_t seed) { return 0xcbf29ce484222325ULL ^ (seed * 0x9E3779B97F4A7C15ULL); }

}  // namespace

StubConfig StubConfig::from_json(const json& j) {
  StubConfig c;
  c.seed = j.value("seed", std::uint64_t{0});
  const std::string mode = j.value("mode", std::string("constant"));
  if (mode == "constant") {
    c.mode = Mode::kConstant;
  } else if (mode == "hashed") {
    c.mode = Mode::kHashed;
  } else {
    throw DataError("stub config: unknown mode '" + mode + "'");
  }
  c.default_logprob = j.value("default_logprob", -1.0);
  check_logprob(c.default_logprob, "default_logprob");
  if (j.contains("hashed_range")) {
    c.hashed_min = j["hashed_range"].at(0).get<double>();
    c.hashed_max = j["hashed_range"].at(1).get<double>();
  }
  check_logprob(c.hashed_min, "hashed_range");
  check_logprob(c.hashed_max, "hashed_range");
  if (c.hashed_min > c.hashed_max) throw DataError("stub config: hashed_range is reversed");

  for (const auto& s : j.value("sequences", json::array())) {
    Sequence seq{s.at("prefix").get<std::string>(), s.at("continuation").get<std::string>(),
                 s.at("logprobs").get<std::vector<double>>()};
    for (double lp : seq.logprobs) check_logprob(lp, "sequence '" + seq.continuation + "'");
    c.sequences.push_back(std::move(seq));
  }
  for (const auto& t : j.value("tokens", json::array())) {
    const double lp = t.at("logprob").get<double>();
    check_logprob(lp, "token '" + t.at("token").get<std::string>() + "'");
    c.tokens[{text::squeeze_spaces(t.at("context").get<std::string>()), t.at("token").get<std::string>()}] = lp;
  }
  const json words = j.value("words", json::object());
  for (const auto& [word, lp] : words.items()) {
    check_logprob(lp.get<double>(), "word '" + word + "'");
    c.words[bare_word(word)] = lp.get<double>();
  }
  c.samples = j.value("samples", std::vector<std::string>{});
  const json by_prompt = j.value("samples_by_prompt", json::object());
  for (const auto& [prompt, list] : by_prompt.items()) {
    c.samples_by_prompt[prompt] = list.get<std::vector<std::string>>();
  }
  c.embedding_dim = j.value("embedding_dim", std::size_t{4096});
  if (c.embedding_dim == 0) throw DataError("stub config: embedding_dim must be positive");
  return c;
}

StubConfig StubConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read stub config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("stub config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

json StubConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["mode"] = mode == Mode::kConstant ? "constant" : "hashed";
  j["default_logprob"] = default_logprob;
  j["hashed_range"] = {hashed_min, hashed_max};
  json seqs = json::array();
  for (const auto& s : sequences) {
    seqs.push_back({{"prefix", s.prefix}, {"continuation", s.continuation}, {"logprobs", s.logprobs}});
  }
  j["sequences"] = seqs;
  json toks = json::array();
  for (const auto& [key, lp] : tokens) toks.push_back({{"context", key.first}, {"token", key.second}, {"logprob", lp}});
  j["tokens"] = toks;
  j["words"] = words;
  j["samples"] = samples;
  j["samples_by_prompt"] = samples_by_prompt;
  j["embedding_dim"] = embedding_dim;
  return j;
}

StubBackend::StubBackend(StubConfig config) : config_(std::move(config)) {
  for (const auto& s : config_.sequences) {
    sequence_index_[{text::squeeze_spaces(s.prefix), text::squeeze_spaces(s.continuation)}] = s.logprobs;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(text::fnv1a(config_.to_json().dump())));
  identity_ = std::string("stub:") + hex;
}

double StubBackend::token_logprob(const std::string& context, const std::string& token) const {
  if (auto it = config_.tokens.find({context, token}); it != config_.tokens.end()) return it->second;
  if (auto it = config_.words.find(bare_word(token)); it != config_.words.end()) return it->second;
  if (config_.mode == StubConfig::Mode::kConstant) return config_.default_logprob;
  const std::uint64_t h = text::fnv1a(context + '\x1f' + token, mix_seed(config_.seed));
  const double unit = static_cast<double>(h >> 11) * 0x1.0p-53;
  return config_.hashed_min + unit * (config_.hashed_max - config_.hashed_min);
}

TokenScoreResult StubBackend::score(std::string_view prefix, std::string_view continuation) {
  const auto prefix_tokens = text::whitespace_tokens(prefix);
  const auto cont_tokens = text::whitespace_tokens(continuation);
  if (cont_tokens.empty()) throw BackendInputError("continuation tokenizes to nothing");

  TokenScoreResult r;
  r.prefix_token_count = prefix_tokens.size();
  for (const auto& t : cont_tokens) {
    r.tokens.push_back(t.text);
    r.offsets.push_back(t.span);
  }

  auto seq = sequence_index_.find({text::squeeze_spaces(prefix), text::squeeze_spaces(continuation)});
  if (seq != sequence_index_.end() && seq->second.size() == cont_tokens.size()) {
    r.logprobs = seq->second;
    return r;
  }
  r.logprobs.reserve(cont_tokens.size());
  for (std::size_t j = 0; j < cont_tokens.size(); ++j) {
    const std::string context =
        join_tokens(prefix_tokens, std::span<const text::WordSpan>(cont_tokens).first(j));
    r.logprobs.push_back(token_logprob(context, cont_tokens[j].text));
  }
  return r;
}

std::vector<std::string> StubBackend::generate(const GenerationRequest& request) {
  request.validate();
  const std::vector<std::string>* canned = &config_.samples;
  if (auto it = config_.samples_by_prompt.find(request.prompt); it != config_.samples_by_prompt.end()) {
    canned = &it->second;
  }
  std::vector<std::string> out;
  out.reserve(request.num_samples);
  for (std::size_t i = 0; i < request.num_samples; ++i) {
    if (canned->empty()) {
      out.emplace_back();
      continue;
    }
    const auto words = text::whitespace_tokens((*canned)[i % canned->size()]);
    std::string sample;
    for (std::size_t k = 0; k < words.size() && k < request.max_new_tokens; ++k) {
      if (k > 0) sample.push_back(' ');
      sample += words[k].text;
    }
    out.push_back(std::move(sample));
  }
  return out;
}

std::vector<double> StubBackend::embed_one(std::string_view text) const {
  std::vector<double> v(config_.embedding_dim, 0.0);
  for (const auto& w : text::whitespace_tokens(text)) {
    const std::string word = bare_word(w.text);
    if (word.empty()) continue;
    v[text::fnv1a(word, mix_seed(config_.seed)) % config_.embedding_dim] += 1.0;
  }
  return v;
}

EmbeddingResult StubBackend::embed(std::span<const std::string> texts) {
  if (texts.empty()) throw InvalidArgument("embed needs at least one text");
  EmbeddingResult r;
  r.vectors.reserve(texts.size());
  for (const auto& t : texts) r.vectors.push_back(embed_one(t));
  return r;
}

std::string StubBackend::identity() const { return identity_; }

}  // namespace cas

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <atomic>
#include <thread>

#include "cas/errors.hpp"
#include "cas/lm_gateway.hpp"
#include "support.hpp"

using namespace cas;

namespace {

StubConfig constant(double lp) {
  StubConfig c;
  c.default_logprob = lp;
  return c;
}

HttpBackendConfig local(int port) {
  HttpBackendConfig c;
  c.endpoint = "http://127.0.0.1:" + std::to_string(port);
  c.timeout = std::chrono::milliseconds(5000);
  c.max_retries = 1;
  c.retry_backoff = std::chrono::milliseconds(1);
  return c;
}

}  // namespace

TEST_CASE("constant stub gives the constant for every token") {
  StubBackend b(constant(-1.0));
  const auto r = b.score("The woman hired a lawyer because", " she sued them");
  CHECK(r.logprobs == std::vector<double>{-1.0, -1.0, -1.0});
  CHECK(r.tokens == std::vector<std::string>{"she", "sued", "them"});
  CHECK(r.sum() == -3.0);
}

TEST_CASE("table stub: (context, token) entry wins") {
  StubConfig c = constant(-1.0);
  c.tokens[{"The woman hired a lawyer because", "she"}] = -0.7;
  StubBackend b(c);
  const auto r = b.score("The woman hired a lawyer because", " she decided to sue her employer");
  REQUIRE(r.logprobs.size() == 6);
  CHECK(r.logprobs[0] == -0.7);
  CHECK(r.logprobs[1] == -1.0);
}

TEST_CASE("lookup order: sequence, then context, then word, then fallback") {
  StubConfig c = constant(-1.0);
  c.sequences.push_back({"p q", " x y", {-0.1, -0.2}});
  c.tokens[{"p q x", "y"}] = -0.3;
  c.words["y"] = -0.4;
  c.words["z"] = -0.5;
  StubBackend b(c);
  CHECK(b.score("p q", " x y").logprobs == std::vector<double>{-0.1, -0.2});
  CHECK(b.score("p q", " x y z").logprobs == std::vector<double>{-1.0, -0.3, -0.5});
  CHECK(b.score("r", " y").logprobs == std::vector<double>{-0.4});
}

TEST_CASE("prefix token count of a 6-token prefix is 6") {
  StubBackend b(constant(-1.0));
  CHECK(b.score("The woman hired a lawyer because", " she").prefix_token_count == 6);
  CHECK(b.score("", "she").prefix_token_count == 0);
}

TEST_CASE("offsets point into the continuation") {
  StubBackend b(constant(-1.0));
  const std::string cont = " she  decided";
  const auto r = b.score("x", cont);
  REQUIRE(r.offsets.size() == 2);
  CHECK(cont.substr(r.offsets[0].begin, r.offsets[0].end - r.offsets[0].begin) == "she");
  CHECK(cont.substr(r.offsets[1].begin, r.offsets[1].end - r.offsets[1].begin) == "decided");
}

TEST_CASE("empty continuation is an input error") {
  StubBackend b(constant(-1.0));
  CHECK_THROWS_AS(b.score("x", "   "), BackendInputError);
}

TEST_CASE("hashed stub is deterministic, in range and seed dependent") {
  StubConfig c;
  c.mode = StubConfig::Mode::kHashed;
  StubBackend a(c), a2(c);
  c.seed = 17;
  StubBackend other(c);
  const auto r1 = a.score("the cat sat", " on the mat");
  const auto r2 = a2.score("the cat sat", " on the mat");
  CHECK(r1.logprobs == r2.logprobs);
  for (double lp : r1.logprobs) {
    CHECK(lp <= -0.05);
    CHECK(lp >= -8.0);
  }
  CHECK(other.score("the cat sat", " on the mat").logprobs != r1.logprobs);
}

TEST_CASE("stub logprobs are non-positive and finite") {
  StubConfig c;
  c.mode = StubConfig::Mode::kHashed;
  StubBackend b(c);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> w(0, 30);
  for (int i = 0; i < 200; ++i) {
    std::string cont;
    for (int j = 0; j < 1 + i % 7; ++j) cont += " w" + std::to_string(w(rng));
    const auto r = b.score("ctx " + std::to_string(i), cont);
    CHECK(r.logprobs.size() == r.tokens.size());
    for (double lp : r.logprobs) {
      CHECK(lp <= 0.0);
      CHECK(std::isfinite(lp));
    }
  }
}

TEST_CASE("stub samples repeat cyclically") {
  StubConfig c;
  c.samples = {"a.", "b.", "c."};
  StubBackend b(c);
  GenerationRequest req;
  req.prompt = "anything";
  req.num_samples = 5;
  CHECK(b.generate(req) == std::vector<std::string>{"a.", "b.", "c.", "a.", "b."});
  c.samples_by_prompt["special"] = {"x."};
  StubBackend b2(c);
  req.prompt = "special";
  req.num_samples = 2;
  CHECK(b2.generate(req) == std::vector<std::string>{"x.", "x."});
}

TEST_CASE("generation requests are validated") {
  StubBackend b(StubConfig{});
  GenerationRequest req;
  req.num_samples = 0;
  CHECK_THROWS_AS(b.generate(req), InvalidArgument);
  req.num_samples = 1;
  req.nucleus_p = 0.0;
  CHECK_THROWS_AS(b.generate(req), InvalidArgument);
  req.nucleus_p = 1.0;
  req.max_new_tokens = 0;
  CHECK_THROWS_AS(b.generate(req), InvalidArgument);
}

TEST_CASE("stub samples respect max_new_tokens") {
  StubConfig c;
  c.samples = {"one two three four five six"};
  StubBackend b(c);
  GenerationRequest req;
  req.max_new_tokens = 3;
  CHECK(b.generate(req) == std::vector<std::string>{"one two three"});
}

TEST_CASE("embeddings: identical texts give identical vectors") {
  StubBackend b(StubConfig{});
  const std::vector<std::string> texts{"she wanted to sue", "she wanted to sue"};
  const auto e = b.embed(texts);
  REQUIRE(e.vectors.size() == 2);
  CHECK(e.vectors[0] == e.vectors[1]);
  CHECK(e.vectors[0].size() == 4096);
  CHECK(cosine_similarity(e.vectors[0], e.vectors[1]) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("embeddings: disjoint vocabulary is orthogonal") {
  StubBackend b(StubConfig{});
  const std::vector<std::string> texts{"lawyer court sue", "banana orange apple"};
  const auto e = b.embed(texts);
  CHECK(cosine_similarity(e.vectors[0], e.vectors[1]) == 0.0);
}

TEST_CASE("cosine of a zero vector is 0") {
  const std::vector<double> z{0, 0}, v{1, 0};
  CHECK(cosine_similarity(z, v) == 0.0);
}

TEST_CASE("sentence-end truncation") {
  CHECK(truncate_at_sentence_end("she wanted to sue her former employer. Then she") ==
        "she wanted to sue her former employer.");
  CHECK(truncate_at_sentence_end("  no terminator ") == "no terminator");
  CHECK(truncate_at_sentence_end("what? yes") == "what?");
}

TEST_CASE("stub config round-trips through JSON") {
  const auto c = StubConfig::from_file(testing::fixture("fig1_stub.json"));
  CHECK(c.default_logprob == -1.0);
  CHECK(c.words.at("sue") == -2.0);
  CHECK(c.tokens.size() == 3);
  CHECK(c.samples.size() == 3);
  const auto back = StubConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK_THROWS(StubConfig::from_json(nlohmann::json{{"mode", "nonsense"}}));
}

TEST_CASE("align_tokens finds subword pieces") {
  const std::vector<std::string> toks{"she", "dec", "ided", "??"};
  const auto o = align_tokens(toks, " she decided");
  CHECK(o[0] == text::CharSpan{1, 4});
  CHECK(o[1] == text::CharSpan{5, 8});
  CHECK(o[2] == text::CharSpan{8, 12});
  CHECK(o[3].begin == o[3].end);
}

TEST_CASE("score JSON protocol round trip") {
  TokenScoreResult r;
  r.tokens = {"she", "sued"};
  r.logprobs = {-0.5, -1.5};
  r.prefix_token_count = 3;
  r.offsets = {{1, 4}, {5, 9}};
  const auto j = score_result_to_json(r);
  CHECK(j.contains("tokens"));
  CHECK(j.contains("logprobs"));
  CHECK(j.contains("prefix_token_count"));
  const auto back = score_result_from_json(j, " she sued");
  CHECK(back.tokens == r.tokens);
  CHECK(back.logprobs == r.logprobs);
  CHECK(back.offsets == r.offsets);
  // offsets are optional on the wire
  nlohmann::json bare = {{"tokens", {"she", "sued"}}, {"logprobs", {-0.5, -1.5}}, {"prefix_token_count", 3}};
  CHECK(score_result_from_json(bare, " she sued").offsets == r.offsets);
  bare["logprobs"] = {-0.5};
  CHECK_THROWS_AS(score_result_from_json(bare, " she sued"), BackendInputError);
  bare["logprobs"] = {-0.5, 0.5};
  CHECK_THROWS_AS(score_result_from_json(bare, " she sued"), BackendInputError);
}

TEST_CASE("caching backend returns identical results and counts hits") {
  auto inner = std::make_shared<StubBackend>(constant(-1.0));
  CachingBackend cache(inner);
  const auto a = cache.score("p", " x y");
  const auto b = cache.score("p", " x y");
  CHECK(a.logprobs == b.logprobs);
  CHECK(cache.score_hits() == 1);
  CHECK(cache.score_misses() == 1);
  const std::vector<std::string> t{"a b", "c"};
  CHECK(cache.embed(t).vectors == inner->embed(t).vectors);
  CHECK(cache.identity() == inner->identity());
}

TEST_CASE("HTTP backend talks to the bundled server") {
  StubConfig c = constant(-1.0);
  c.tokens[{"The woman hired a lawyer because", "she"}] = -0.7;
  c.samples = {"a.", "b."};
  auto stub = std::make_shared<StubBackend>(c);
  ModelServer server(stub);
  const int port = server.start();
  REQUIRE(port > 0);
  HttpBackend http(local(port));

  const auto r = http.score("The woman hired a lawyer because", " she sued");
  CHECK(r.logprobs == std::vector<double>{-0.7, -1.0});
  CHECK(r.prefix_token_count == 6);
  CHECK(r.offsets == stub->score("The woman hired a lawyer because", " she sued").offsets);

  GenerationRequest req;
  req.num_samples = 3;
  CHECK(http.generate(req) == std::vector<std::string>{"a.", "b.", "a."});

  const std::vector<std::string> texts{"x y", "z"};
  CHECK(http.embed(texts).vectors == stub->embed(texts).vectors);

  // stub rejects empty continuations with 400, which surfaces as an input error
  CHECK_THROWS_AS(http.score("p", "  "), BackendInputError);
  CHECK(http.identity() == local(port).endpoint);

  // concurrent callers
  std::vector<std::jthread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      if (http.score("a b", " c").logprobs == std::vector<double>{-1.0}) ++ok;
    });
  }
  threads.clear();
  CHECK(ok == 8);
  server.stop();
}

TEST_CASE("unreachable server gives a transport error after retries") {
  int port = 0;
  {
    ModelServer s(std::make_shared<StubBackend>(StubConfig{}));
    port = s.start();
  }
  HttpBackend http(local(port));
  CHECK_THROWS_AS(http.score("a", " b"), TransportError);
}

TEST_CASE("HTTP backend config is validated") {
  CHECK_THROWS_AS(HttpBackend(HttpBackendConfig{}), InvalidArgument);
  auto c = local(1);
  c.max_in_flight = 0;
  CHECK_THROWS_AS(HttpBackend{c}, InvalidArgument);
}

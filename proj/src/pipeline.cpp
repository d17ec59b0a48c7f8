#include "cas/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "cas/declarative.hpp"
#include "cas/errors.hpp"

namespace cas {
namespace {

using nlohmann::json;

json spans_json(const std::vector<TokenSpan>& spans) {
  json out = json::array();
  for (const auto& s : spans) out.push_back({s.chars.begin, s.chars.end});
  return out;
}

json keywords_json(const KeywordSet& ks) {
  json out = json::array();
  for (const auto& k : ks.keywords) {
    out.push_back({{"term", k.term}, {"text", k.text}, {"score", k.score}, {"spans", spans_json(k.occurrences)}});
  }
  return out;
}

json path_json(const PathScore& p) {
  json steps = json::array();
  for (const auto& s : p.path.steps) {
    steps.push_back({{"start", s.edge.start},
                     {"relation", relation_name(s.edge.relation)},
                     {"end", s.edge.end},
                     {"direction", s.direction == Direction::kForward ? "forward" : "reverse"}});
  }
  return {{"nodes", p.path.nodes()},
          {"steps", steps},
          {"sentences", verbalize_path(p.path)},
          {"edge_logprobs", p.edge_logprobs},
          {"summary_logprob", p.summary_logprob},
          {"value", p.value}};
}

json weights_json(const std::vector<KeywordWeight>& weights) {
  json out = json::array();
  for (const auto& w : weights) {
    json paths = json::array();
    for (const auto& p : w.paths) paths.push_back(path_json(p));
    out.push_back({{"keyword", w.keyword},
                   {"spans", spans_json(w.occurrences)},
                   {"paths", paths},
                   {"aggregate", w.aggregate},
                   {"evidence", w.evidence},
                   {"weight", w.weight}});
  }
  return out;
}

json answer_json(const AnswerScore& a) {
  json offsets = json::array();
  for (const auto& o : a.token_offsets) offsets.push_back({o.begin, o.end});
  return {{"tokens", a.tokens},
          {"logprobs", a.token_logprobs},
          {"offsets", offsets},
          {"weights", a.token_weights},
          {"prefix_token_count", a.prefix_token_count},
          {"basic_score", a.basic_score},
          {"weighted_score", a.weighted_score}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

Normalization normalization_for(const RunConfig& c) {
  switch (c.strategy) {
    case Strategy::kLmSum:
      return Normalization::kSum;
    case Strategy::kLmAvg:
      return Normalization::kAnswerMean;
    default:
      return c.normalization;
  }
}

bool is_static(Strategy s) { return s == Strategy::kSw || s == Strategy::kSwc; }

// Keywords, weights and score for one answer text (original or generated).
struct ScoredAnswer {
  KeywordSet keywords;
  std::vector<std::string> connected;
  std::vector<KeywordWeight> weights;
  AnswerScore score;
};

ScoredAnswer score_one(std::string_view statement, const std::string& answer, const KeywordSet& key_q,
                       const RunConfig& config, const EvalContext& ctx) {
  ScoredAnswer out;
  const Normalization norm = normalization_for(config);
  if (!uses_keywords(config.strategy)) {
    out.score = weighted_score(ctx.backend, statement, answer, {}, norm);
    return out;
  }
  out.keywords = ctx.extractor.extract(answer, config.answer_keywords);
  const ConnectedKeywords connected = connect_keywords(ctx.graph, key_q, out.keywords, config.query);
  for (const auto& e : connected.entries) out.connected.push_back(e.keyword);

  WeightApplication application = WeightApplication::kAddLog;
  if (is_static(config.strategy)) {
    out.weights = config.static_all_keywords ? static_weights(out.keywords, config.static_weight)
                                             : static_weights(connected, config.static_weight);
  } else {
    out.weights = assign_weights(connected, config.weights, ctx.backend);
    if (config.weights.literal) application = WeightApplication::kScaleLogprob;
  }
  out.score = weighted_score(ctx.backend, statement, answer, out.weights, norm, application);
  return out;
}

double final_score(const ScoredAnswer& a, Strategy s) {
  return uses_keywords(s) ? a.score.weighted_score : a.score.basic_score;
}

json scored_answer_json(const ScoredAnswer& a, const std::string& text, double score) {
  return {{"text", text},
          {"keywords", keywords_json(a.keywords)},
          {"connected", a.connected},
          {"keyword_weights", weights_json(a.weights)},
          {"score", score},
          {"lm", answer_json(a.score)}};
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + p.string());
  out << content;
  if (!out) throw DataError("failed writing " + p.string());
}

}  // namespace

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kLm:
      return "lm";
    case Strategy::kLmSum:
      return "lm_sum";
    case Strategy::kLmAvg:
      return "lm_avg";
    case Strategy::kCas:
      return "cas";
    case Strategy::kCase:
      return "case";
    case Strategy::kSw:
      return "sw";
    case Strategy::kSwc:
      return "swc";
  }
  return "lm";
}

std::optional<Strategy> strategy_from_name(std::string_view name) {
  for (Strategy s : {Strategy::kLm, Strategy::kLmSum, Strategy::kLmAvg, Strategy::kCas, Strategy::kCase,
                     Strategy::kSw, Strategy::kSwc}) {
    if (strategy_name(s) == name) return s;
  }
  return std::nullopt;
}

bool uses_keywords(Strategy s) {
  return s == Strategy::kCas || s == Strategy::kCase || s == Strategy::kSw || s == Strategy::kSwc;
}

bool uses_expansion(Strategy s) { return s == Strategy::kCase || s == Strategy::kSwc; }

void RunConfig::validate() const {
  if (query.max_hops < 1) throw InvalidArgument("k must be >= 1");
  weights.validate();
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
  if (!(static_weight > 0.0)) throw InvalidArgument("static weight must be > 0");
  if (uses_expansion(strategy) && expansion.n_candidates > 0) expansion.validate();
  if (backend != "stub" && backend != "http") throw InvalidArgument("backend must be 'stub' or 'http'");
}

json RunConfig::to_json() const {
  return {
      {"dataset", dataset_name(dataset)},
      {"data", data_path},
      {"strategy", strategy_name(strategy)},
      {"graph", graph_path},
      {"graph_cache", graph_cache},
      {"backend", backend},
      {"stub_config", stub_config},
      {"endpoint", endpoint},
      {"stopwords", stopwords},
      {"k", query.max_hops},
      {"max_paths", query.max_paths},
      {"traversal", query.traversal == Traversal::kUndirected ? "undirected" : "template"},
      {"lambda", weights.lambda},
      {"w_floor", weights.w_floor},
      {"w_ceil", weights.w_ceil},
      {"uniform_logprob", weights.uniform_logprob},
      {"literal_eq6", weights.literal},
      {"normalization", normalization_name(normalization)},
      {"question_keywords", question_keywords},
      {"answer_keywords", answer_keywords},
      {"yake_ngram_max", yake.ngram_max},
      {"yake_window", yake.window},
      {"yake_dedup", yake.dedup_threshold},
      {"n_candidates", expansion.n_candidates},
      {"top_p", expansion.nucleus_p},
      {"max_new_tokens", expansion.max_new_tokens},
      {"stop_at_sentence_end", expansion.stop_at_sentence_end},
      {"s_sim", expansion.s_sim},
      {"connection_k", expansion.connection_query.max_hops},
      {"evaluate_all_connections", expansion.evaluate_all_connections},
      {"static_weight", static_weight},
      {"static_all_keywords", static_all_keywords},
      {"seed", seed},
      {"workers", workers},
      {"strict", strict},
      {"exclude_errored", exclude_errored},
  };
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  c.dataset = dataset_from_name(j.value("dataset", std::string("copa")));
  c.data_path = j.value("data", std::string());
  const auto s = strategy_from_name(j.value("strategy", std::string("cas")));
  if (!s) throw InvalidArgument("unknown strategy in config");
  c.strategy = *s;
  c.graph_path = j.value("graph", std::string());
  c.graph_cache = j.value("graph_cache", std::string());
  c.backend = j.value("backend", std::string("stub"));
  c.stub_config = j.value("stub_config", std::string());
  c.endpoint = j.value("endpoint", std::string());
  c.stopwords = j.value("stopwords", std::string());
  c.query.max_hops = j.value("k", c.query.max_hops);
  c.query.max_paths = j.value("max_paths", c.query.max_paths);
  c.query.traversal =
      j.value("traversal", std::string("undirected")) == "template" ? Traversal::kTemplateDirection : Traversal::kUndirected;
  c.weights.lambda = j.value("lambda", c.weights.lambda);
  c.weights.w_floor = j.value("w_floor", c.weights.w_floor);
  c.weights.w_ceil = j.value("w_ceil", c.weights.w_ceil);
  c.weights.uniform_logprob = j.value("uniform_logprob", c.weights.uniform_logprob);
  c.weights.literal = j.value("literal_eq6", false);
  const auto n = normalization_from_name(j.value("normalization", std::string("statement_plus_answer")));
  if (!n) throw InvalidArgument("unknown normalization in config");
  c.normalization = *n;
  c.question_keywords = j.value("question_keywords", c.question_keywords);
  c.answer_keywords = j.value("answer_keywords", c.answer_keywords);
  c.yake.ngram_max = j.value("yake_ngram_max", c.yake.ngram_max);
  c.yake.window = j.value("yake_window", c.yake.window);
  c.yake.dedup_threshold = j.value("yake_dedup", c.yake.dedup_threshold);
  c.expansion.n_candidates = j.value("n_candidates", c.expansion.n_candidates);
  c.expansion.nucleus_p = j.value("top_p", c.expansion.nucleus_p);
  c.expansion.max_new_tokens = j.value("max_new_tokens", c.expansion.max_new_tokens);
  c.expansion.stop_at_sentence_end = j.value("stop_at_sentence_end", true);
  c.expansion.s_sim = j.value("s_sim", c.expansion.s_sim);
  c.expansion.connection_query.max_hops = j.value("connection_k", c.expansion.connection_query.max_hops);
  c.expansion.connection_query.max_paths = c.query.max_paths;
  c.expansion.connection_query.traversal = c.query.traversal;
  c.expansion.evaluate_all_connections = j.value("evaluate_all_connections", false);
  c.expansion.keywords_per_answer = c.answer_keywords;
  c.static_weight = j.value("static_weight", c.static_weight);
  c.static_all_keywords = j.value("static_all_keywords", false);
  c.seed = j.value("seed", std::uint64_t{0});
  c.expansion.seed = c.seed;
  c.workers = j.value("workers", std::size_t{1});
  c.strict = j.value("strict", false);
  c.exclude_errored = j.value("exclude_errored", false);
  return c;
}

InstanceOutcome evaluate_instance(const InstanceRecord& inst, const RunConfig& config, const EvalContext& ctx) {
  InstanceOutcome out;
  out.id = inst.id;
  out.gold = inst.gold;
  if (inst.choices.size() < 2) throw DataError("instance has fewer than 2 choices");

  const DeclarativeStatement statement = to_declarative(inst);
  json audit = {{"id", inst.id},
                {"gold", inst.gold},
                {"statement", statement.text},
                {"statement_rule", statement.rule}};

  KeywordSet key_q;
  if (uses_keywords(config.strategy)) {
    key_q = ctx.extractor.extract(inst.question_text(), config.question_keywords);
    audit["question_keywords"] = keywords_json(key_q);
  }

  std::vector<std::string> answers;
  std::vector<ScoredAnswer> scored;
  std::vector<double> scores;
  json choices = json::array();
  for (const auto& choice : inst.choices) {
    answers.push_back(answer_for_statement(inst, choice));
    scored.push_back(score_one(statement.text, answers.back(), key_q, config, ctx));
    scores.push_back(final_score(scored.back(), config.strategy));
    choices.push_back(scored_answer_json(scored.back(), answers.back(), scores.back()));
  }
  audit["choices"] = choices;

  std::size_t prediction = select_answer(scores);
  if (uses_expansion(config.strategy) && config.expansion.n_candidates > 0) {
    const auto candidates = generate_candidates(statement.text, ctx.backend, config.expansion);
    std::vector<KeywordSet> choice_keywords;
    for (const auto& s : scored) choice_keywords.push_back(s.keywords);
    const auto mapped = map_candidates(candidates, answers, choice_keywords, ctx.graph, ctx.backend, config.expansion,
                                       ctx.extractor);

    std::vector<CandidateGroup> groups(inst.choices.size());
    for (std::size_t i = 0; i < groups.size(); ++i) {
      groups[i].choice_index = i;
      groups[i].original_answer = answers[i];
      groups[i].members.push_back(answers[i]);
      groups[i].member_scores.push_back(scores[i]);
    }
    json cands = json::array();
    for (const auto& g : mapped) {
      json c = {{"text", g.text}, {"sample_index", g.sample_index}, {"similarity", g.similarity_to}};
      json conn = json::array();
      for (const auto& v : g.connection_to) conn.push_back(optional_json(v));
      c["connection"] = conn;
      c["assigned_to"] = g.assigned_to ? json(*g.assigned_to) : json(nullptr);
      if (g.assigned_to) {
        const ScoredAnswer sa = score_one(statement.text, g.text, key_q, config, ctx);
        const double v = final_score(sa, config.strategy);
        groups[*g.assigned_to].members.push_back(g.text);
        groups[*g.assigned_to].member_scores.push_back(v);
        c["score"] = v;
        c["detail"] = scored_answer_json(sa, g.text, v);
      }
      cands.push_back(std::move(c));
    }
    audit["candidates"] = cands;
    json gj = json::array();
    for (const auto& g : groups) gj.push_back({{"choice", g.choice_index}, {"best", g.best()}, {"size", g.members.size()}});
    audit["groups"] = gj;
    prediction = select_by_cluster(groups);
  }

  out.prediction = prediction;
  out.correct = prediction == inst.gold;
  audit["prediction"] = prediction;
  audit["correct"] = out.correct;
  out.audit = std::move(audit);
  return out;
}

bool id_less(std::string_view a, std::string_view b) {
  auto numeric = [](std::string_view s) {
    return !s.empty() && s.size() < 19 && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (numeric(a) && numeric(b)) return std::stoll(std::string(a)) < std::stoll(std::string(b));
  return a < b;
}

RunResult run_eval(const Dataset& dataset, const RunConfig& config, const KnowledgeGraph& graph,
                   ModelBackend& backend) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const KeywordExtractor extractor(load_stopwords(config), config.yake);
  const EvalContext ctx{graph, backend, extractor};

  RunResult result;
  result.loaded = dataset.instances.size();
  result.skipped = dataset.diagnostics.skipped;
  result.diagnostics = dataset.diagnostics;
  result.backend_identity = backend.identity();
  result.outcomes.resize(dataset.instances.size());

  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    while (!abort.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= dataset.instances.size()) return;
      const auto& inst = dataset.instances[i];
      try {
        result.outcomes[i] = evaluate_instance(inst, config, ctx);
      } catch (const std::exception& e) {
        if (config.strict) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
          abort = true;
          return;
        }
        InstanceOutcome o;
        o.id = inst.id;
        o.gold = inst.gold;
        o.error = e.what();
        o.audit = {{"id", inst.id}, {"gold", inst.gold}, {"error", o.error}, {"prediction", nullptr}, {"correct", false}};
        result.outcomes[i] = std::move(o);
      }
    }
  };

  const std::size_t n_workers = std::min(config.workers, std::max<std::size_t>(1, dataset.instances.size()));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::stable_sort(result.outcomes.begin(), result.outcomes.end(),
                   [](const InstanceOutcome& a, const InstanceOutcome& b) { return id_less(a.id, b.id); });
  for (const auto& o : result.outcomes) {
    if (!o.error.empty()) ++result.errored;
    if (o.correct) ++result.correct;
  }
  result.evaluated = result.loaded - (config.exclude_errored ? result.errored : 0);
  result.accuracy = result.evaluated == 0 ? 0.0 : static_cast<double>(result.correct) / static_cast<double>(result.evaluated);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

json RunResult::summary_json(const RunConfig& config) const {
  return {{"dataset", dataset_name(config.dataset)},
          {"strategy", strategy_name(config.strategy)},
          {"backend", backend_identity},
          {"loaded", loaded},
          {"skipped", skipped},
          {"errored", errored},
          {"evaluated", evaluated},
          {"correct", correct},
          {"accuracy", accuracy},
          {"errored_excluded", config.exclude_errored},
          {"load_messages", diagnostics.messages}};
}

void write_run(const RunResult& result, const RunConfig& config, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "run.json", result.summary_json(config).dump(2) + "\n");
  write_file(out_dir / "config.json", config.to_json().dump(2) + "\n");
  std::string lines;
  for (const auto& o : result.outcomes) lines += o.audit.dump() + "\n";
  write_file(out_dir / "instances.jsonl", lines);
  write_file(out_dir / "timing.json", json{{"seconds", result.seconds}}.dump(2) + "\n");
}

std::shared_ptr<ModelBackend> make_backend(const RunConfig& config) {
  std::shared_ptr<ModelBackend> inner;
  if (config.backend == "stub") {
    StubConfig sc = config.stub_config.empty() ? StubConfig{} : StubConfig::from_file(config.stub_config);
    if (config.seed != 0) sc.seed = config.seed;
    inner = std::make_shared<StubBackend>(std::move(sc));
  } else if (config.backend == "http") {
    HttpBackendConfig hc = HttpBackendConfig::from_environment();
    if (!config.endpoint.empty()) hc.endpoint = config.endpoint;
    hc.max_in_flight = std::max<std::size_t>(hc.max_in_flight, config.workers);
    inner = std::make_shared<HttpBackend>(std::move(hc));
  } else {
    throw InvalidArgument("unknown backend '" + config.backend + "'");
  }
  return std::make_shared<CachingBackend>(std::move(inner));
}

KnowledgeGraph load_run_graph(const RunConfig& config) {
  if (config.graph_path.empty()) return {};
  const IngestConfig ingest;
  if (!config.graph_cache.empty()) {
    if (auto cached = load_snapshot(config.graph_cache, ingest)) return std::move(*cached);
  }
  if (!std::filesystem::exists(config.graph_path)) throw DataError("graph file not found: " + config.graph_path);
  KnowledgeGraph g = load_graph_file(config.graph_path, ingest);
  if (!config.graph_cache.empty()) save_snapshot(g, ingest, config.graph_cache);
  return g;
}

std::shared_ptr<const StopwordSet> load_stopwords(const RunConfig& config) {
  if (config.stopwords.empty()) return StopwordSet::bundled();
  return std::make_shared<const StopwordSet>(StopwordSet::from_file(config.stopwords));
}

}  // namespace cas

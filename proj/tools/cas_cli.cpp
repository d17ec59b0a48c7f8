// Command-line front end: batch scoring, the stub model server, and small
// inspection tools for keywords and graph paths.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "cas/errors.hpp"
#include "cas/pipeline.hpp"

namespace {

cas::ModelServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int run_score(cas::RunConfig config, const std::string& out_dir, std::size_t max_paths, const std::string& traversal,
              const std::string& normalization) {
  config.query.max_paths = max_paths;
  config.query.traversal = traversal == "template" ? cas::Traversal::kTemplateDirection : cas::Traversal::kUndirected;
  const auto norm = cas::normalization_from_name(normalization);
  if (!norm) throw cas::InvalidArgument("unknown normalization '" + normalization + "'");
  config.normalization = *norm;
  config.expansion.connection_query.max_paths = config.query.max_paths;
  config.expansion.connection_query.traversal = config.query.traversal;
  config.expansion.keywords_per_answer = config.answer_keywords;
  config.expansion.seed = config.seed;
  config.validate();

  const cas::Dataset dataset = cas::load_dataset(config.data_path, config.dataset);
  for (const auto& m : dataset.diagnostics.messages) std::cerr << "skip: " << m << "\n";
  const cas::KnowledgeGraph graph = cas::load_run_graph(config);
  if (!config.graph_path.empty()) {
    const auto& st = graph.stats();
    std::cerr << "graph: " << graph.term_count() << " terms, " << graph.edge_count() << " edges ("
              << st.malformed << " malformed, " << st.untemplated_relation << " untemplated, " << st.other_language
              << " other-language lines)\n";
  }
  auto backend = cas::make_backend(config);
  const cas::RunResult result = cas::run_eval(dataset, config, graph, *backend);
  cas::write_run(result, config, out_dir);
  std::cout << cas::strategy_name(config.strategy) << " accuracy " << result.accuracy << " (" << result.correct << "/"
            << result.evaluated << ", " << result.errored << " errored)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Commonsense-augmented answer scoring for zero-shot multiple-choice QA"};
  app.require_subcommand(1);

  // score
  cas::RunConfig config;
  std::string dataset = "copa", strategy = "cas", out_dir, traversal = "undirected",
              normalization = "statement_plus_answer";
  std::size_t max_paths = config.query.max_paths;
  auto* score = app.add_subcommand("score", "Evaluate a dataset with one scoring strategy");
  score->add_option("--dataset", dataset, "copa | sct | socialiqa | arc | obqa")->required();
  score->add_option("--data", config.data_path, "Dataset file")->required()->check(CLI::ExistingFile);
  score->add_option("--strategy", strategy, "lm | lm_sum | lm_avg | cas | case | sw | swc")->required();
  score->add_option("--graph", config.graph_path, "ConceptNet assertions TSV (.gz ok)");
  score->add_option("--graph-cache", config.graph_cache, "Binary snapshot of the built graph");
  score->add_option("--backend", config.backend, "http | stub")->check(CLI::IsMember({"http", "stub"}));
  score->add_option("--stub-config", config.stub_config, "Stub backend JSON config")->check(CLI::ExistingFile);
  score->add_option("--endpoint", config.endpoint, "Model server URL (default: $CAS_LM_ENDPOINT)");
  score->add_option("--stopwords", config.stopwords, "Stopword list, one word per line")->check(CLI::ExistingFile);
  score->add_option("--k", config.query.max_hops, "Maximum path length in edges")->check(CLI::PositiveNumber);
  score->add_option("--max-paths", max_paths, "Paths kept per keyword pair (0 = all)");
  score->add_option("--traversal", traversal, "undirected | template")->check(CLI::IsMember({"undirected", "template"}));
  score->add_option("--lambda", config.weights.lambda, "Weight coefficient");
  score->add_option("--w-floor", config.weights.w_floor, "Lower clamp for weights");
  score->add_option("--w-ceil", config.weights.w_ceil, "Upper clamp for weights");
  score->add_flag("--literal-eq6", config.weights.literal, "W = 1 + lambda*S unclamped, scaling log-probabilities");
  score->add_option("--normalization", normalization, "statement_plus_answer | answer_mean | sum");
  score->add_option("--question-keywords", config.question_keywords, "Keywords per question");
  score->add_option("--answer-keywords", config.answer_keywords, "Keywords per answer");
  score->add_option("--n-candidates", config.expansion.n_candidates, "Generated answers per instance (0 = none)");
  score->add_option("--top-p", config.expansion.nucleus_p, "Nucleus sampling mass");
  score->add_option("--max-new-tokens", config.expansion.max_new_tokens, "Generation length cap");
  score->add_option("--s-sim", config.expansion.s_sim, "Similarity threshold for mapping candidates");
  score->add_option("--connection-k", config.expansion.connection_query.max_hops, "Path length for connection scores");
  score->add_flag("--all-connections", config.expansion.evaluate_all_connections,
                  "Record connection scores for every choice");
  score->add_option("--static-weight", config.static_weight, "Weight used by sw and swc");
  score->add_flag("--static-all-keywords", config.static_all_keywords, "sw/swc weight every answer keyword");
  score->add_option("--seed", config.seed, "Seed passed to generation (and the stub)");
  score->add_option("--workers", config.workers, "Parallel instances")->check(CLI::PositiveNumber);
  score->add_flag("--strict", config.strict, "Abort on the first instance error");
  score->add_flag("--exclude-errored", config.exclude_errored, "Leave errored instances out of the denominator");
  score->add_option("--out", out_dir, "Output directory")->required();

  // serve-stub
  std::string serve_config, host = "127.0.0.1";
  int port = 8000;
  auto* serve = app.add_subcommand("serve-stub", "Serve the stub backend over the HTTP protocol");
  serve->add_option("--stub-config", serve_config, "Stub backend JSON config")->check(CLI::ExistingFile);
  serve->add_option("--host", host);
  serve->add_option("--port", port);

  // paths
  std::string paths_graph, from, to;
  std::size_t paths_k = 3, paths_max = 50;
  auto* paths = app.add_subcommand("paths", "List graph paths between two concepts");
  paths->add_option("--graph", paths_graph)->required()->check(CLI::ExistingFile);
  paths->add_option("from", from)->required();
  paths->add_option("to", to)->required();
  paths->add_option("--k", paths_k)->check(CLI::PositiveNumber);
  paths->add_option("--max-paths", paths_max);

  // keywords
  std::string kw_text, kw_stopwords;
  std::size_t kw_max = 10;
  auto* keywords = app.add_subcommand("keywords", "Extract keywords from a text");
  keywords->add_option("text", kw_text)->required();
  keywords->add_option("--max", kw_max);
  keywords->add_option("--stopwords", kw_stopwords)->check(CLI::ExistingFile);

  // sweep
  std::string sweep_dir;
  std::vector<std::size_t> sweep_ns{1, 10, 50, 100};
  auto* sweep = app.add_subcommand("sweep", "Accuracy as a function of candidate count, from a stored run");
  sweep->add_option("--run", sweep_dir, "Output directory of a case/swc run")->required()->check(CLI::ExistingDirectory);
  sweep->add_option("--n", sweep_ns, "Candidate counts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*score) {
      config.dataset = cas::dataset_from_name(dataset);
      const auto s = cas::strategy_from_name(strategy);
      if (!s) throw cas::InvalidArgument("unknown strategy '" + strategy + "'");
      config.strategy = *s;
      return run_score(config, out_dir, max_paths, traversal, normalization);
    }
    if (*serve) {
      cas::StubConfig sc = serve_config.empty() ? cas::StubConfig{} : cas::StubConfig::from_file(serve_config);
      cas::ModelServer server(std::make_shared<cas::StubBackend>(std::move(sc)));
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving stub on " << host << ":" << port << "\n";
      server.run(host, port);
      g_server = nullptr;
      return 0;
    }
    if (*paths) {
      const auto graph = cas::load_graph_file(paths_graph);
      cas::PathQuery q{.max_hops = paths_k, .max_paths = paths_max};
      for (const auto& p : cas::find_paths(graph, cas::text::normalize_term(from), cas::text::normalize_term(to), q)) {
        const auto sentences = cas::verbalize_path(p);
        for (std::size_t i = 0; i < sentences.size(); ++i) std::cout << (i ? " | " : "") << sentences[i];
        std::cout << "\n";
      }
      return 0;
    }
    if (*keywords) {
      auto sw = kw_stopwords.empty() ? cas::StopwordSet::bundled()
                                     : std::make_shared<const cas::StopwordSet>(cas::StopwordSet::from_file(kw_stopwords));
      const cas::KeywordExtractor ex(sw);
      for (const auto& k : ex.extract(kw_text, kw_max).keywords) std::cout << k.term << "\t" << k.score << "\n";
      return 0;
    }
    if (*sweep) {
      const auto audits = cas::read_audits(std::filesystem::path(sweep_dir) / "instances.jsonl");
      nlohmann::json out = nlohmann::json::array();
      for (const auto& p : cas::candidate_sweep(audits, sweep_ns)) {
        out.push_back({{"n_candidates", p.n_candidates}, {"correct", p.correct}, {"evaluated", p.evaluated},
                       {"accuracy", p.accuracy}});
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

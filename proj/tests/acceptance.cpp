// Acceptance checks: one PASS/FAIL/SKIP line per criterion. Criteria 1-8
// gate the exit code; 9 needs a live model server and data and never gates.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include "cas/declarative.hpp"
#include "cas/errors.hpp"
#include "cas/pipeline.hpp"
#include "support.hpp"

using namespace cas;
namespace fs = std::filesystem;

namespace {

// Pinned thresholds.
constexpr int kPathGraphs = 200;
constexpr std::size_t kPathMaxNodes = 25;
constexpr std::size_t kPathMaxEdges = 60;
constexpr double kPathBudgetSeconds = 10.0;
constexpr int kFormulaTables = 1000;
constexpr double kFormulaTolerance = 1e-12;
constexpr double kLiveAccuracySlack = 0.01;
constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  enum Kind { kPass, kFail, kSkip } kind;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::kFail, std::move(d)}; }

template <typename... Ts>
std::string str(const Ts&... parts) {
  std::ostringstream s;
  (s << ... << parts);
  return s.str();
}

// Every simple path of <= k edges out of `a`, grouped by end node. One DFS
// per source instead of one per pair keeps the oracle affordable.
std::map<std::string, std::set<testing::PathKey>> oracle_from(const std::vector<testing::RawEdge>& edges,
                                                              const std::string& a, std::size_t k) {
  std::map<std::string, std::set<testing::PathKey>> out;
  testing::PathKey cur;
  cur.first.push_back(a);
  std::function<void(const std::string&)> dfs = [&](const std::string& at) {
    if (cur.second.size() == k) return;
    for (const auto& e : edges) {
      for (bool reverse : {false, true}) {
        const std::string& from = reverse ? e.end : e.start;
        const std::string& to = reverse ? e.start : e.end;
        if (from != at) continue;
        if (std::find(cur.first.begin(), cur.first.end(), to) != cur.first.end()) continue;
        cur.first.push_back(to);
        cur.second.emplace_back(e.start, static_cast<int>(e.relation), e.end, reverse);
        out[to].insert(cur);
        dfs(to);
        cur.first.pop_back();
        cur.second.pop_back();
      }
    }
  };
  dfs(a);
  return out;
}

Outcome criterion_path_oracle() {
  std::mt19937_64 rng(kSeed);
  const auto start = std::chrono::steady_clock::now();
  std::size_t queries = 0, paths = 0;
  for (int round = 0; round < kPathGraphs; ++round) {
    const auto rg = testing::random_graph(rng, kPathMaxNodes, kPathMaxEdges);
    for (std::size_t k = 1; k <= 3; ++k) {
      for (const auto& a : rg.nodes) {
        const auto expected = oracle_from(rg.edges, a, k);
        for (const auto& q : rg.nodes) {
          std::set<testing::PathKey> got;
          const auto found = find_paths(rg.graph, a, q, PathQuery{.max_hops = k, .max_paths = 0});
          for (const auto& p : found) got.insert(testing::key_of(p));
          const auto it = expected.find(q);
          const bool same = got.size() == found.size() &&
                            (it == expected.end() || a == q ? got.empty() : got == it->second);
          if (!same) return fail(str("graph ", round, " k=", k, " ", a, " -> ", q, ": got ", got.size(), " paths"));
          ++queries;
          paths += got.size();
        }
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string d = str(kPathGraphs, " graphs, ", queries, " queries, ", paths, " paths, ", secs, " s");
  return secs < kPathBudgetSeconds ? pass(d) : fail(d + " over budget");
}

Outcome criterion_formula_oracles() {
  const auto golden = testing::golden_templates();
  std::mt19937_64 rng(kSeed + 1);
  double worst = 0.0;
  std::size_t path_checks = 0;
  for (int round = 0; round < kFormulaTables; ++round) {
    const auto rg = testing::random_graph(rng, 8, 16);
    std::vector<KGPath> ps;
    for (std::size_t i = 0; i < rg.nodes.size() && ps.size() < 6; ++i) {
      for (std::size_t j = 0; j < rg.nodes.size() && ps.size() < 6; ++j) {
        for (auto& p : find_paths(rg.graph, rg.nodes[i], rg.nodes[j], 3)) ps.push_back(std::move(p));
      }
    }
    const auto statement = testing::random_sentence(rng, 0, 10);
    const auto answer = testing::random_sentence(rng, 1, 8);
    testing::LogprobTable table;
    table.fallback = std::uniform_real_distribution<double>(-6.0, -0.01)(rng);
    for (const auto& p : ps) {
      testing::fill_edge(golden, table, rng, p.source, Relation::kRelatedTo, p.target);
      for (const auto& s : p.steps) testing::fill_edge(golden, table, rng, s.edge.start, s.edge.relation, s.edge.end);
    }
    testing::fill_table(table, rng, statement, answer);
    StubBackend b(table.stub());
    for (const auto& p : ps) {
      worst = std::max(worst, std::abs(score_path(p, b).value - testing::oracle_path_value(golden, table, p)));
      ++path_checks;
    }
    worst = std::max(worst, std::abs(basic_score(b, statement, answer) -
                                     testing::oracle_basic_score(table, statement, answer)));
  }
  const std::string d = str(kFormulaTables, " tables, ", path_checks, " paths, max |delta| ", worst);
  return worst <= kFormulaTolerance ? pass(d) : fail(d);
}

RunConfig mini(Strategy s) {
  RunConfig c;
  c.dataset = DatasetTag::kCopa;
  c.data_path = testing::fixture("copa_mini.jsonl");
  c.strategy = s;
  c.expansion.n_candidates = 0;
  return c;
}

StubConfig hashed_stub() {
  StubConfig c;
  c.mode = StubConfig::Mode::kHashed;
  c.seed = kSeed;
  return c;
}

Outcome criterion_degeneration() {
  const auto d = load_dataset(testing::fixture("copa_mini.jsonl"), DatasetTag::kCopa);
  StubBackend b(hashed_stub());
  const KnowledgeGraph empty;
  const auto lm = run_eval(d, mini(Strategy::kLm), empty, b);
  const auto cas = run_eval(d, mini(Strategy::kCas), empty, b);
  const auto cse = run_eval(d, mini(Strategy::kCase), empty, b);
  for (std::size_t i = 0; i < lm.outcomes.size(); ++i) {
    const auto& l = lm.outcomes[i].audit["choices"];
    const auto& c = cas.outcomes[i].audit["choices"];
    const auto& e = cse.outcomes[i].audit["choices"];
    for (std::size_t j = 0; j < l.size(); ++j) {
      const double x = l[j]["score"], y = c[j]["score"], z = e[j]["score"];
      if (x != y || y != z) return fail(str("instance ", lm.outcomes[i].id, " choice ", j, " scores differ"));
    }
    if (lm.outcomes[i].prediction != cas.outcomes[i].prediction ||
        cas.outcomes[i].prediction != cse.outcomes[i].prediction) {
      return fail(str("instance ", lm.outcomes[i].id, " predictions differ"));
    }
  }
  return pass(str(lm.outcomes.size(), " instances, case = cas = lm, scores bit-equal"));
}

Outcome criterion_weight_identity() {
  const auto d = load_dataset(testing::fixture("copa_mini.jsonl"), DatasetTag::kCopa);
  StubBackend b(hashed_stub());
  std::size_t checked = 0;
  for (const auto& inst : d.instances) {
    const auto s = to_declarative(inst);
    for (const auto& choice : inst.choices) {
      const auto answer = answer_for_statement(inst, choice);
      const auto ones = static_weights(extract_keywords(answer, 5), 1.0);
      for (auto n : {Normalization::kSum, Normalization::kAnswerMean, Normalization::kStatementPlusAnswer}) {
        const double w = weighted_score(b, s.text, answer, ones, n).weighted_score;
        const double base = basic_score(b, s.text, answer, n);
        if (w != base) return fail(str("instance ", inst.id, ": ", w, " != ", base));
        ++checked;
      }
    }
  }
  return pass(str(checked, " answer/normalization pairs bit-equal"));
}

Outcome criterion_templates() {
  const auto golden = testing::golden_templates();
  if (golden.size() != kRelationCount) return fail(str("golden file has ", golden.size(), " relations"));
  for (const auto& info : all_relations()) {
    const auto it = golden.find(std::string(info.name));
    if (it == golden.end()) return fail(str(info.name, " missing from golden file"));
    const auto got = verbalize_edge({"A", info.id, "B"});
    if (got != it->second) return fail(str(info.name, ": '", got, "' != '", it->second, "'"));
  }
  return pass(str(kRelationCount, " relations match"));
}

Outcome criterion_thresholds() {
  auto graph_with = [](const std::string& a, const std::string& b) {
    GraphBuilder gb;
    gb.add(a, Relation::kRelatedTo, b);
    return std::move(gb).build();
  };
  StubBackend b(StubConfig{});
  ExpansionConfig cfg;
  cfg.s_sim = 0.5;
  cfg.evaluate_all_connections = true;
  const std::vector<std::string> choices{"lawyer sued employer"};
  const std::vector<KeywordSet> kws{extract_keywords(choices[0], 5)};
  auto map_one = [&](const std::string& cand, const KnowledgeGraph& g) {
    const std::vector<Candidate> cs{{cand, 0}};
    return map_candidates(cs, choices, kws, g, b, cfg).at(0);
  };
  // similarity alone
  const auto sim_only = map_one("lawyer sued boss", graph_with("cat", "mat"));
  if (!(sim_only.similarity_to[0] >= cfg.s_sim && sim_only.connection_to[0] == 0.0) || sim_only.assigned_to) {
    return fail("similarity-only fixture was assigned or mis-built");
  }
  // connection alone
  const auto conn_only = map_one("boss", graph_with("boss", "employer"));
  if (!(conn_only.similarity_to[0] < cfg.s_sim && conn_only.connection_to[0].value_or(0) > 0) ||
      conn_only.assigned_to) {
    return fail("connection-only fixture was assigned or mis-built");
  }
  // both
  const auto both = map_one("lawyer sued boss", graph_with("boss", "employer"));
  if (both.assigned_to != 0u) return fail("fixture passing both thresholds was not assigned");
  return pass(str("sim-only unassigned (sim ", sim_only.similarity_to[0], "), conn-only unassigned (conn ",
                  *conn_only.connection_to[0], "), both assigned"));
}

Outcome criterion_fig1() {
  const auto d = load_dataset(testing::fixture("copa_fig1.jsonl"), DatasetTag::kCopa);
  const auto g = load_graph_file(testing::fixture("fig1_graph.tsv"));
  StubBackend b(StubConfig::from_file(testing::fixture("fig1_stub.json")));
  auto case_cfg = mini(Strategy::kCase);
  case_cfg.expansion.n_candidates = 3;
  const auto lm = run_eval(d, mini(Strategy::kLm), g, b).outcomes.at(0);
  const auto c1 = run_eval(d, case_cfg, g, b).outcomes.at(0);
  const auto c2 = run_eval(d, case_cfg, g, b).outcomes.at(0);
  const std::string d1 = str("lm picks ", lm.prediction.value_or(99), ", case picks ", c1.prediction.value_or(99));
  if (lm.prediction != 1u) return fail(d1 + " (lm should pick B)");
  if (c1.prediction != 0u) return fail(d1 + " (case should pick A)");
  if (c1.audit != c2.audit) return fail("case audit differs between runs");
  return pass(d1 + ", repeat identical");
}

Outcome criterion_determinism() {
  auto run_to = [](RunConfig c, const fs::path& out) {
    auto backend = make_backend(c);
    const auto graph = load_run_graph(c);
    const auto res = run_eval(load_dataset(c.data_path, c.dataset), c, graph, *backend);
    fs::remove_all(out);
    write_run(res, c, out);
  };
  const auto root = fs::temp_directory_path() / "cas_acceptance_determinism";
  std::vector<RunConfig> configs;
  RunConfig fig = mini(Strategy::kCase);
  fig.data_path = testing::fixture("copa_fig1.jsonl");
  fig.graph_path = testing::fixture("fig1_graph.tsv");
  fig.stub_config = testing::fixture("fig1_stub.json");
  fig.expansion.n_candidates = 3;
  configs.push_back(fig);
  RunConfig gold = mini(Strategy::kCas);
  gold.stub_config = testing::fixture("stub_gold.json");
  gold.graph_path = testing::fixture("fig1_graph.tsv");
  gold.workers = 4;
  configs.push_back(gold);
  std::size_t files = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto a = root / str("run", i, "_a");
    const auto b = root / str("run", i, "_b");
    run_to(configs[i], a);
    run_to(configs[i], b);
    for (const char* f : {"run.json", "instances.jsonl", "config.json"}) {
      const auto x = testing::slurp((a / f).string());
      if (x.empty() || x != testing::slurp((b / f).string())) return fail(str("config ", i, ": ", f, " differs"));
      ++files;
    }
  }
  return pass(str(files, " output files byte-identical across repeated runs"));
}

Outcome criterion_live() {
  const char* endpoint = std::getenv("CAS_LM_ENDPOINT");
  const char* copa = std::getenv("CAS_COPA_DEV");
  const char* graph = std::getenv("CAS_CONCEPTNET");
  if (!endpoint || !copa || !graph) {
    return {Outcome::kSkip, "set CAS_LM_ENDPOINT, CAS_COPA_DEV and CAS_CONCEPTNET to run against a live model"};
  }
  const auto start = std::chrono::steady_clock::now();
  RunConfig c;
  c.dataset = DatasetTag::kCopa;
  c.data_path = copa;
  c.graph_path = graph;
  c.graph_cache = (fs::temp_directory_path() / "cas_acceptance_graph.bin").string();
  c.backend = "http";
  c.workers = 4;
  const auto data = load_dataset(c.data_path, c.dataset);
  const auto kg = load_run_graph(c);
  auto backend = make_backend(c);
  auto acc = [&](Strategy s, std::size_t n) {
    RunConfig r = c;
    r.strategy = s;
    r.expansion.n_candidates = n;
    return run_eval(data, r, kg, *backend);
  };
  const double lm_sum = acc(Strategy::kLmSum, 0).accuracy;
  const double cas = acc(Strategy::kCas, 0).accuracy;
  const auto cse = acc(Strategy::kCase, 50);
  std::vector<nlohmann::json> audits;
  for (const auto& o : cse.outcomes) audits.push_back(o.audit);
  const std::vector<std::size_t> ns{1, 10, 50};
  const auto sweep = candidate_sweep(audits, ns);
  const bool shape = sweep[0].accuracy <= sweep[1].accuracy && sweep[1].accuracy <= sweep[2].accuracy;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string d = str("lm_sum ", lm_sum, ", cas ", cas, ", case@1/10/50 ", sweep[0].accuracy, "/",
                            sweep[1].accuracy, "/", sweep[2].accuracy, ", ", secs, " s");
  return cas >= lm_sum - kLiveAccuracySlack && shape ? pass(d) : fail(d);
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    bool gating;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "path search equals brute-force enumeration", true, criterion_path_oracle},
      {2, "path and answer scores equal direct formulas", true, criterion_formula_oracles},
      {3, "case = cas = lm with no graph and no candidates", true, criterion_degeneration},
      {4, "unit weights reproduce the basic score", true, criterion_weight_identity},
      {5, "relation templates match the golden file", true, criterion_templates},
      {6, "candidate mapping needs both thresholds", true, criterion_thresholds},
      {7, "Fig-1 fixture flips B to A", true, criterion_fig1},
      {8, "stub runs are byte-identical", true, criterion_determinism},
      {9, "live model check (non-gating)", false, criterion_live},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.kind == Outcome::kPass ? "PASS" : o.kind == Outcome::kFail ? "FAIL" : "SKIP";
    std::cout << tag << " [" << c.id << "] " << c.name << ": " << o.detail << "\n";
    if (o.kind == Outcome::kFail && c.gating) ++failed;
  }
  std::cout << (failed ? "acceptance FAILED" : "acceptance passed") << "\n";
  return failed ? 1 : 0;
}

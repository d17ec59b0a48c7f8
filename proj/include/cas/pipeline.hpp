#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cas/datasets.hpp"
#include "cas/expansion.hpp"
#include "cas/kb_graph.hpp"
#include "cas/keywords.hpp"
#include "cas/lm_gateway.hpp"
#include "cas/scoring.hpp"

namespace cas {

enum class Strategy {
  kLm,     // basic score with the configured normalization
  kLmSum,
  kLmAvg,
  kCas,
  kCase,
  kSw,     // static weights on connected keywords
  kSwc,    // static weights plus expansion
};

std::string_view strategy_name(Strategy s);
std::optional<Strategy> strategy_from_name(std::string_view name);
bool uses_keywords(Strategy s);
bool uses_expansion(Strategy s);

struct RunConfig {
  DatasetTag dataset = DatasetTag::kCopa;
  std::string data_path;
  Strategy strategy = Strategy::kCas;
  std::string graph_path;  // empty: no graph
  std::string graph_cache;  // optional snapshot file
  std::string backend = "stub";  // "stub" or "http"
  std::string stub_config;  // empty: constant stub with defaults
  std::string endpoint;  // http backend; falls back to CAS_LM_ENDPOINT
  std::string stopwords;  // empty: bundled list

  PathQuery query;
  WeightConfig weights;
  Normalization normalization = Normalization::kStatementPlusAnswer;
  std::size_t question_keywords = 10;
  std::size_t answer_keywords = 5;
  YakeConfig yake;
  // n_candidates == 0 turns expansion off even for case/swc.
  ExpansionConfig expansion;
  double static_weight = 1.5;
  // Static weighting applies to every answer keyword instead of only the
  // connected ones.
  bool static_all_keywords = false;

  std::uint64_t seed = 0;
  std::size_t workers = 1;
  // Abort the run on the first instance error.
  bool strict = false;
  // Leave errored instances out of the accuracy denominator.
  bool exclude_errored = false;

  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

struct InstanceOutcome {
  std::string id;
  std::size_t gold = 0;
  std::optional<std::size_t> prediction;
  bool correct = false;
  std::string error;  // empty unless the instance failed
  nlohmann::json audit;
};

// Shared read-only state for scoring instances.
struct EvalContext {
  const KnowledgeGraph& graph;
  ModelBackend& backend;
  const KeywordExtractor& extractor;
};

// Scores one instance under config.strategy. Errors are thrown, not caught.
InstanceOutcome evaluate_instance(const InstanceRecord& instance, const RunConfig& config, const EvalContext& ctx);

struct RunResult {
  std::vector<InstanceOutcome> outcomes;  // sorted by instance id
  std::size_t loaded = 0;
  std::size_t skipped = 0;  // records the loader could not parse
  std::size_t errored = 0;
  std::size_t evaluated = 0;  // accuracy denominator
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::string backend_identity;
  LoadDiagnostics diagnostics;
  double seconds = 0.0;

  nlohmann::json summary_json(const RunConfig& config) const;
};

RunResult run_eval(const Dataset& dataset, const RunConfig& config, const KnowledgeGraph& graph,
                   ModelBackend& backend);

// Writes run.json, instances.jsonl, config.json and timing.json. The first
// three depend only on the inputs; wall-clock time goes to timing.json.
void write_run(const RunResult& result, const RunConfig& config, const std::filesystem::path& out_dir);

// Builders used by the CLI.
std::shared_ptr<ModelBackend> make_backend(const RunConfig& config);
KnowledgeGraph load_run_graph(const RunConfig& config);
std::shared_ptr<const StopwordSet> load_stopwords(const RunConfig& config);

// Orders ids numerically when both are integers, else as strings.
bool id_less(std::string_view a, std::string_view b);

// Candidate-count sweep over stored audits: for each n, re-selects with only
// the assigned candidates whose sample_index < n.
struct SweepPoint {
  std::size_t n_candidates = 0;
  std::size_t evaluated = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
};
std::vector<nlohmann::json> read_audits(const std::filesystem::path& instances_jsonl);
std::vector<SweepPoint> candidate_sweep(std::span<const nlohmann::json> audits, std::span<const std::size_t> ns);

}  // namespace cas

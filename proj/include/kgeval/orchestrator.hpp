#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kgeval/ann.hpp"
#include "kgeval/dataset.hpp"
#include "kgeval/embedding.hpp"
#include "kgeval/graph.hpp"
#include "kgeval/mapping.hpp"
#include "kgeval/tasks_ml.hpp"

namespace kgeval {

struct EmbeddingSpec {
  ModelKind kind = ModelKind::TransE;
  TrainConfig train;       // triple-scoring models
  Rdf2vecConfig rdf2vec;   // RDF2vec
};

struct Config {
  std::vector<std::string> kg_paths;
  GraphConfig graph;
  bool strict_parse = false;
  std::vector<EmbeddingSpec> embeddings;
  std::vector<MapperStep> precision_chain;
  std::vector<MapperStep> recall_chain;
  std::string manifest_path;
  size_t folds = 10;
  uint64_t seed = 42;
  int threads = 0;  // 0 = all available
  bool deterministic = false;
  std::string output_dir = "out";
};

// Strict parse: unknown keys are rejected with their field path; referenced
// paths must exist.
Config load_config(const std::string& path);
Config parse_config_json(const std::string& json_text, const std::string& base_dir);

struct RunKey {
  std::string task_type;
  std::string dataset;
  std::string algo;
  std::string hyper;
  uint32_t fold = 0;
  std::string embedding;
  std::string chain;  // "precision" (reported as PK/PA) or "recall" (RA)

  std::string to_string() const;
  bool operator==(const RunKey&) const = default;
};

struct RunResult {
  RunKey key;
  std::vector<ScenarioMetrics> metrics;  // empty unless status == ok
  double wall_ms = 0.0;
  std::string status = "ok";  // ok | skipped | failed
  std::string reason;
};

struct PlanEntry {
  size_t dataset_index = 0;
  TaskType task = TaskType::Classification;
  std::string dataset_name;
  std::string algo;
  Hyper hyper;
  uint32_t fold = 0;
  std::string embedding;
  std::string chain;

  RunKey key() const;
};

// Deterministic cartesian product: datasets x algorithms x hyper grid x folds
// x embedding kinds x mapper chains. Planned from the manifest alone so a
// dataset whose file fails to load still gets (failed) run entries.
std::vector<PlanEntry> plan_runs(const Config& config,
                                 std::span<const ManifestEntry> entries,
                                 std::span<const std::string> chains);

class ResultStore {
 public:
  void append(RunResult result);
  bool contains(const RunKey& key) const { return keys_.count(key.to_string()) > 0; }
  const std::vector<RunResult>& results() const { return results_; }
  size_t size() const { return results_.size(); }

  std::string to_jsonl() const;
  static ResultStore from_jsonl(const std::string& text);

 private:
  std::vector<RunResult> results_;
  std::set<std::string> keys_;
};

enum class AggLevel : uint8_t { Hyperparameters, Folds, Algorithms, Embeddings, Datasets };

struct AggRow {
  std::string task_type, dataset, algo, hyper, embedding, chain, metric;
  int fold = -1;  // -1 when collapsed
  double value_known = 0.0, value_all = 0.0;
  size_t n_runs = 0;
  MetricDirection direction = MetricDirection::HigherBetter;
};

// Mean of metric values over ok runs, grouped by the retained key fields.
// Weights are run counts, so any collapse order yields the same means.
std::vector<AggRow> aggregate(const ResultStore& store, const std::set<AggLevel>& collapse);

struct ReportRow {
  std::string task_type;
  std::string dataset;  // empty when collapsed; kept for lower-better metrics
  std::string metric;
  std::string scenario;  // PK / PA / RA
  double value = 0.0;
  size_t n_runs = 0;
};

// Fully collapsed table; PK = known-entity accounting of the precision chain,
// PA = all-entity accounting of the same runs, RA = all-entity accounting of
// the recall chain. Lower-better metrics stay per dataset.
std::vector<ReportRow> build_report(const ResultStore& store);

std::string report_csv(const std::vector<ReportRow>& rows);
std::string report_markdown(const std::vector<ReportRow>& rows);

// Stage driver. Stages compute missing prerequisites on demand and persist
// every artifact under the output directory.
class Orchestrator {
 public:
  explicit Orchestrator(Config config);

  void prepare();
  void preprocess();
  void map();
  void run();
  void report();
  void all(const std::set<std::string>& stage_filter = {});

  const KnowledgeGraph& graph();
  const ResultStore& results() const { return store_; }

 private:
  int worker_threads() const;
  void ensure_graph();
  void ensure_datasets();
  void ensure_embeddings();
  void ensure_indices();
  void ensure_mappings();
  void execute_plan(const std::vector<PlanEntry>& plan);
  RunResult execute_entry(const PlanEntry& entry);
  std::string out_path(const std::string& sub) const;

  struct DatasetSlot {
    ManifestEntry entry;
    std::optional<LoadedDataset> data;  // empty when loading failed
    std::string error;
  };

  Config config_;
  std::optional<KnowledgeGraph> graph_;
  LoadStats load_stats_;
  std::vector<DatasetSlot> datasets_;
  EntityPool pool_;
  bool datasets_ready_ = false;
  std::map<std::string, EmbeddingSet> embeddings_;
  std::map<std::string, HnswIndex> indices_;
  std::map<std::string, EntityMapping> mappings_;
  ResultStore store_;
};

}  // namespace kgeval

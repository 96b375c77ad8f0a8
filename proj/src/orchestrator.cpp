#include "kgeval/orchestrator.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "kgeval/tasks_semantic.hpp"

namespace kgeval {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  os << content;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

constexpr const char* kChains[2] = {"precision", "recall"};

}  // namespace

std::string RunKey::to_string() const {
  std::ostringstream os;
  os << task_type << '|' << dataset << '|' << algo << '|' << hyper << '|' << fold << '|'
     << embedding << '|' << chain;
  return os.str();
}

RunKey PlanEntry::key() const {
  RunKey key;
  key.task_type = task_type_name(task);
  key.dataset = dataset_name;
  key.algo = algo;
  key.hyper = hyper_to_string(hyper);
  key.fold = fold;
  key.embedding = embedding;
  key.chain = chain;
  return key;
}

std::vector<PlanEntry> plan_runs(const Config& config,
                                 std::span<const ManifestEntry> entries,
                                 std::span<const std::string> chains) {
  std::vector<PlanEntry> plan;
  for (size_t d = 0; d < entries.size(); ++d) {
    const ManifestEntry& ds = entries[d];
    const TaskType task = ds.task;
    const bool folded = task == TaskType::Classification || task == TaskType::Regression;
    const size_t folds = folded ? config.folds : 1;

    for (const std::string& algo : algorithms_for(task)) {
      std::vector<Hyper> grid = default_grid(task, algo);
      if (task == TaskType::Recommendation)
        grid = {{{"k", static_cast<double>(ds.top_k)}}};
      for (const Hyper& hyper : grid) {
        for (size_t fold = 0; fold < folds; ++fold) {
          for (const EmbeddingSpec& spec : config.embeddings) {
            for (const std::string& chain : chains) {
              PlanEntry entry;
              entry.dataset_index = d;
              entry.task = task;
              entry.dataset_name = ds.name;
              entry.algo = algo;
              entry.hyper = hyper;
              entry.fold = static_cast<uint32_t>(fold);
              entry.embedding = model_kind_name(spec.kind);
              entry.chain = chain;
              plan.push_back(std::move(entry));
            }
          }
        }
      }
    }
  }
  if (plan.empty()) throw ConfigError("run plan is empty (no datasets or embeddings)");
  return plan;
}

void ResultStore::append(RunResult result) {
  const std::string key = result.key.to_string();
  if (keys_.count(key))
    throw ValidationError("duplicate run key in result store: " + key);
  keys_.insert(key);
  results_.push_back(std::move(result));
}

namespace {

json metrics_to_json(const std::vector<ScenarioMetrics>& metrics) {
  json arr = json::array();
  for (const ScenarioMetrics& m : metrics) {
    arr.push_back({{"name", m.name},
                   {"known", m.value_known},
                   {"all", m.value_all},
                   {"coverage", m.coverage},
                   {"direction",
                    m.direction == MetricDirection::HigherBetter ? "higher" : "lower"}});
  }
  return arr;
}

}  // namespace

std::string ResultStore::to_jsonl() const {
  std::string out;
  for (const RunResult& r : results_) {
    json line = {{"task_type", r.key.task_type}, {"dataset", r.key.dataset},
                 {"algo", r.key.algo},           {"hyper", r.key.hyper},
                 {"fold", r.key.fold},           {"embedding", r.key.embedding},
                 {"chain", r.key.chain},         {"status", r.status},
                 {"wall_ms", r.wall_ms},         {"metrics", metrics_to_json(r.metrics)}};
    if (!r.reason.empty()) line["reason"] = r.reason;
    out += line.dump();
    out += '\n';
  }
  return out;
}

ResultStore ResultStore::from_jsonl(const std::string& text) {
  ResultStore store;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      break;  // torn trailing line from an interrupted run; redo from here
    }
    RunResult r;
    r.key.task_type = j.at("task_type").get<std::string>();
    r.key.dataset = j.at("dataset").get<std::string>();
    r.key.algo = j.at("algo").get<std::string>();
    r.key.hyper = j.at("hyper").get<std::string>();
    r.key.fold = j.at("fold").get<uint32_t>();
    r.key.embedding = j.at("embedding").get<std::string>();
    r.key.chain = j.at("chain").get<std::string>();
    r.status = j.at("status").get<std::string>();
    r.wall_ms = j.at("wall_ms").get<double>();
    if (j.contains("reason")) r.reason = j.at("reason").get<std::string>();
    for (const json& m : j.at("metrics")) {
      ScenarioMetrics sm;
      sm.name = m.at("name").get<std::string>();
      sm.value_known = m.at("known").get<double>();
      sm.value_all = m.at("all").get<double>();
      sm.coverage = m.at("coverage").get<double>();
      sm.direction = m.at("direction").get<std::string>() == "lower"
                         ? MetricDirection::LowerBetter
                         : MetricDirection::HigherBetter;
      r.metrics.push_back(std::move(sm));
    }
    store.append(std::move(r));
  }
  return store;
}

std::vector<AggRow> aggregate(const ResultStore& store, const std::set<AggLevel>& collapse) {
  struct Acc {
    double known = 0.0, all = 0.0;
    size_t n = 0;
    MetricDirection direction = MetricDirection::HigherBetter;
  };
  std::map<std::string, Acc> groups;
  std::map<std::string, AggRow> rows;

  size_t ok_runs = 0;
  for (const RunResult& r : store.results()) {
    if (r.status != "ok") continue;
    ++ok_runs;
    for (const ScenarioMetrics& m : r.metrics) {
      AggRow row;
      row.task_type = r.key.task_type;
      row.chain = r.key.chain;
      row.metric = m.name;
      row.direction = m.direction;
      if (!collapse.count(AggLevel::Datasets)) row.dataset = r.key.dataset;
      if (!collapse.count(AggLevel::Algorithms)) row.algo = r.key.algo;
      if (!collapse.count(AggLevel::Hyperparameters)) row.hyper = r.key.hyper;
      if (!collapse.count(AggLevel::Embeddings)) row.embedding = r.key.embedding;
      if (!collapse.count(AggLevel::Folds)) row.fold = static_cast<int>(r.key.fold);

      std::ostringstream key;
      key << row.task_type << '|' << row.dataset << '|' << row.algo << '|' << row.hyper
          << '|' << row.fold << '|' << row.embedding << '|' << row.chain << '|' << row.metric;
      Acc& acc = groups[key.str()];
      acc.known += m.value_known;
      acc.all += m.value_all;
      acc.direction = m.direction;
      ++acc.n;
      rows.emplace(key.str(), row);
    }
  }
  if (ok_runs == 0) throw ValidationError("aggregate: no successful runs");

  std::vector<AggRow> out;
  for (auto& [key, row] : rows) {
    const Acc& acc = groups[key];
    row.value_known = acc.known / static_cast<double>(acc.n);
    row.value_all = acc.all / static_cast<double>(acc.n);
    row.n_runs = acc.n;
    row.direction = acc.direction;
    out.push_back(row);
  }
  return out;
}

std::vector<ReportRow> build_report(const ResultStore& store) {
  // Lower-better metrics (RMSE) never average across datasets; everything else
  // fully collapses.
  const std::set<AggLevel> all_levels = {AggLevel::Hyperparameters, AggLevel::Folds,
                                         AggLevel::Algorithms, AggLevel::Embeddings,
                                         AggLevel::Datasets};
  const std::set<AggLevel> keep_dataset = {AggLevel::Hyperparameters, AggLevel::Folds,
                                           AggLevel::Algorithms, AggLevel::Embeddings};

  std::vector<ReportRow> rows;
  auto emit = [&](const AggRow& agg) {
    auto push = [&](const std::string& scenario, double value) {
      ReportRow row;
      row.task_type = agg.task_type;
      row.dataset = agg.dataset;
      row.metric = agg.metric;
      row.scenario = scenario;
      row.value = value;
      row.n_runs = agg.n_runs;
      rows.push_back(std::move(row));
    };
    if (agg.chain == "precision") {
      push("PK", agg.value_known);
      push("PA", agg.value_all);
    } else if (agg.chain == "recall") {
      push("RA", agg.value_all);
    }
  };

  for (const AggRow& agg : aggregate(store, all_levels))
    if (agg.direction == MetricDirection::HigherBetter) emit(agg);
  for (const AggRow& agg : aggregate(store, keep_dataset))
    if (agg.direction == MetricDirection::LowerBetter) emit(agg);

  const std::vector<std::string> task_order = {
      "classification",     "regression",        "clustering", "document_similarity",
      "entity_relatedness", "semantic_analogies", "recommendation"};
  auto task_rank = [&](const std::string& t) {
    const auto it = std::find(task_order.begin(), task_order.end(), t);
    return it == task_order.end() ? task_order.size() : static_cast<size_t>(it - task_order.begin());
  };
  auto scenario_rank = [](const std::string& s) { return s == "PK" ? 0 : s == "PA" ? 1 : 2; };
  std::sort(rows.begin(), rows.end(), [&](const ReportRow& a, const ReportRow& b) {
    if (task_rank(a.task_type) != task_rank(b.task_type))
      return task_rank(a.task_type) < task_rank(b.task_type);
    if (a.dataset != b.dataset) return a.dataset < b.dataset;
    if (a.metric != b.metric) return a.metric < b.metric;
    return scenario_rank(a.scenario) < scenario_rank(b.scenario);
  });
  return rows;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  if (rows.empty()) throw ValidationError("report: empty table");
  std::string out = "task_type,dataset,metric,scenario,value,n_runs\n";
  for (const ReportRow& r : rows) {
    out += r.task_type;
    out += ',';
    out += r.dataset;
    out += ',';
    out += r.metric;
    out += ',';
    out += r.scenario;
    out += ',';
    out += format_value(r.value);
    out += ',';
    out += std::to_string(r.n_runs);
    out += '\n';
  }
  return out;
}

std::string report_markdown(const std::vector<ReportRow>& rows) {
  if (rows.empty()) throw ValidationError("report: empty table");
  std::vector<std::array<std::string, 6>> cells;
  cells.push_back({"task_type", "dataset", "metric", "scenario", "value", "n_runs"});
  for (const ReportRow& r : rows)
    cells.push_back({r.task_type, r.dataset.empty() ? "-" : r.dataset, r.metric, r.scenario,
                     format_value(r.value), std::to_string(r.n_runs)});

  std::array<size_t, 6> width{};
  for (const auto& row : cells)
    for (size_t c = 0; c < 6; ++c) width[c] = std::max(width[c], row[c].size());

  std::string out;
  for (size_t i = 0; i < cells.size(); ++i) {
    out += '|';
    for (size_t c = 0; c < 6; ++c) {
      out += ' ';
      out += cells[i][c];
      out.append(width[c] - cells[i][c].size() + 1, ' ');
      out += '|';
    }
    out += '\n';
    if (i == 0) {
      out += '|';
      for (size_t c = 0; c < 6; ++c) {
        out.append(width[c] + 2, '-');
        out += '|';
      }
      out += '\n';
    }
  }
  return out;
}

Orchestrator::Orchestrator(Config config) : config_(std::move(config)) {}

int Orchestrator::worker_threads() const {
  if (config_.deterministic) return 1;
  if (config_.threads > 0) return config_.threads;
  return omp_get_max_threads();
}

std::string Orchestrator::out_path(const std::string& sub) const {
  return (fs::path(config_.output_dir) / sub).string();
}

const KnowledgeGraph& Orchestrator::graph() {
  ensure_graph();
  return *graph_;
}

void Orchestrator::ensure_graph() {
  if (graph_) return;
  graph_ = load_graph(config_.kg_paths, config_.graph,
                      config_.strict_parse ? ParseMode::Strict : ParseMode::Lenient,
                      &load_stats_);
}

void Orchestrator::ensure_datasets() {
  if (datasets_ready_) return;
  const Manifest manifest = load_manifest(config_.manifest_path);
  validate_manifest(manifest);
  for (const ManifestEntry& entry : manifest.entries) {
    DatasetSlot slot;
    slot.entry = entry;
    try {
      slot.data = load_dataset(entry, manifest.base_dir);
      collect_entities({&*slot.data, 1}, pool_);
    } catch (const std::exception& e) {
      // a broken dataset fails its own runs, never the whole plan
      slot.error = e.what();
      std::cout << "[run] dataset " << entry.name << " failed to load: " << slot.error
                << "\n";
    }
    datasets_.push_back(std::move(slot));
  }
  datasets_ready_ = true;
}

void Orchestrator::ensure_embeddings() {
  ensure_graph();
  fs::create_directories(out_path("embeddings"));
  const int threads = worker_threads();
  for (const EmbeddingSpec& base_spec : config_.embeddings) {
    EmbeddingSpec spec = base_spec;
    // training streams derive from the run-wide seed at use time, so a CLI
    // --seed override reaches them
    spec.train.seed = mix_seed(config_.seed, static_cast<uint64_t>(spec.kind));
    spec.rdf2vec.seed = mix_seed(config_.seed, static_cast<uint64_t>(spec.kind));
    const std::string name = model_kind_name(spec.kind);
    if (embeddings_.count(name)) continue;
    const std::string path = out_path("embeddings/" + name + ".kgev");

    const uint64_t want_hash = spec.kind == ModelKind::RDF2vec
                                   ? hash_rdf2vec_config(spec.rdf2vec)
                                   : hash_train_config(spec.kind, spec.train);
    if (fs::exists(path)) {
      EmbeddingSet set = load_embeddings(path);
      if (set.config_hash == want_hash && set.count() == graph_->entity_count()) {
        embeddings_.emplace(name, std::move(set));
        continue;
      }
    }

    std::cout << "[preprocess] training " << name << " (" << graph_->entity_count()
              << " entities, " << graph_->triple_count() << " triples)\n";
    EmbeddingSet set;
    if (spec.kind == ModelKind::RDF2vec) {
      const WalkCorpus corpus = generate_walks(*graph_, spec.rdf2vec.walks_per_entity,
                                               spec.rdf2vec.depth, spec.rdf2vec.seed);
      set = train_skipgram(corpus, spec.rdf2vec, !config_.deterministic, threads);
    } else {
      EmbeddingModel model = EmbeddingModel::init(spec.kind, graph_->entity_count(),
                                                  graph_->relation_count(), spec.train);
      train_model(model, graph_->triples(), spec.train, !config_.deterministic, threads);
      set = export_embeddings(model);
    }
    save_embeddings(set, path);
    save_embeddings_tsv(set, *graph_, out_path("embeddings/" + name + ".tsv"));
    embeddings_.emplace(name, std::move(set));
  }
}

void Orchestrator::ensure_indices() {
  ensure_embeddings();
  for (const auto& [name, set] : embeddings_) {
    if (indices_.count(name)) continue;
    const std::string path = out_path("embeddings/" + name + ".kgai");
    if (fs::exists(path)) {
      try {
        indices_.emplace(name, HnswIndex::load(path, set));
        continue;
      } catch (const std::exception&) {
        // stale index; rebuild below
      }
    }
    HnswIndex::BuildParams params;
    params.seed = config_.seed;
    indices_.emplace(name, HnswIndex::build(set, params));
    indices_.at(name).save(path);
  }
}

void Orchestrator::ensure_mappings() {
  ensure_graph();
  ensure_datasets();
  if (mappings_.count("precision") && mappings_.count("recall")) return;

  const LabelIndex index = LabelIndex::build(*graph_);
  const int threads = worker_threads();
  const std::vector<DatasetEntity>& entities = pool_.entities();

  for (const char* chain_name : kChains) {
    if (mappings_.count(chain_name)) continue;
    const std::string path = out_path(std::string("mappings/") + chain_name + ".tsv");
    if (fs::exists(path)) {
      mappings_.emplace(chain_name, EntityMapping::from_tsv(read_file(path), *graph_));
      continue;
    }
    const auto& chain = std::string(chain_name) == "precision" ? config_.precision_chain
                                                               : config_.recall_chain;
    EntityMapping mapping = run_mapper_chain(*graph_, index, entities, chain, threads);
    write_file(path, mapping.to_tsv(*graph_));
    mappings_.emplace(chain_name, std::move(mapping));
  }

  // Coverage summary per dataset and chain.
  std::ostringstream os;
  os << "dataset\tchain\tmapped\ttotal\tcoverage\n";
  for (const DatasetSlot& slot : datasets_) {
    if (!slot.data) continue;
    const std::vector<uint32_t> ids = dataset_pool_ids(*slot.data);
    for (const char* chain_name : kChains) {
      const EntityMapping& mapping = mappings_.at(chain_name);
      size_t mapped = 0;
      for (uint32_t id : ids) mapped += mapping.contains(id);
      os << slot.entry.name << '\t' << chain_name << '\t' << mapped << '\t' << ids.size()
         << '\t'
         << format_value(ids.empty() ? 0.0
                                     : static_cast<double>(mapped) /
                                           static_cast<double>(ids.size()))
         << '\n';
    }
  }
  write_file(out_path("mappings/coverage.tsv"), os.str());
}

RunResult Orchestrator::execute_entry(const PlanEntry& entry) {
  RunResult result;
  result.key = entry.key();
  const auto start = std::chrono::steady_clock::now();

  try {
    const EmbeddingSet& embeddings = embeddings_.at(entry.embedding);
    const EntityMapping& mapping = mappings_.at(entry.chain);
    const DatasetSlot& slot = datasets_.at(entry.dataset_index);
    if (!slot.data)
      throw ValidationError("dataset failed to load: " + slot.error);
    const LoadedDataset& dataset = *slot.data;
    const uint64_t task_seed = mix_seed(config_.seed, 0x7A5C0000ull);

    std::vector<AlgoRun> runs;
    switch (entry.task) {
      case TaskType::Classification:
      case TaskType::Regression: {
        const Hyper grid[1] = {entry.hyper};
        runs = run_tabular_task(std::get<TabularDataset>(dataset.data), embeddings, mapping,
                                entry.algo, grid, config_.folds, task_seed,
                                static_cast<int>(entry.fold));
        break;
      }
      case TaskType::Clustering: {
        const Hyper grid[1] = {entry.hyper};
        runs = run_clustering_task(std::get<TabularDataset>(dataset.data), embeddings,
                                   mapping, entry.algo, grid, task_seed);
        break;
      }
      case TaskType::DocumentSimilarity:
        runs = {run_docsim_task(std::get<DocSimDataset>(dataset.data), embeddings, mapping)};
        break;
      case TaskType::EntityRelatedness:
        runs = {run_relatedness_task(std::get<RelatednessDataset>(dataset.data), embeddings,
                                     mapping)};
        break;
      case TaskType::SemanticAnalogies: {
        const HnswIndex* index = nullptr;
        if (auto it = indices_.find(entry.embedding); it != indices_.end())
          index = &it->second;
        runs = {run_analogy_task(std::get<AnalogyDataset>(dataset.data), embeddings, mapping,
                                 index)};
        break;
      }
      case TaskType::Recommendation:
        runs = {run_recommendation_task(std::get<RatingsDataset>(dataset.data), embeddings,
                                        mapping, task_seed)};
        break;
    }

    if (runs.empty()) throw ValidationError("task produced no run for the planned fold");
    const AlgoRun& run = runs.front();
    if (run.skipped) {
      result.status = "skipped";
      result.reason = run.skip_reason;
    } else {
      result.metrics = run.metrics;
    }
  } catch (const std::exception& e) {
    result.status = "failed";
    result.reason = e.what();
    result.metrics.clear();
  }

  const auto end = std::chrono::steady_clock::now();
  result.wall_ms =
      config_.deterministic
          ? 0.0  // timings would break byte-identical result stores
          : std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(end - start)
                .count();
  return result;
}

void Orchestrator::execute_plan(const std::vector<PlanEntry>& plan) {
  const std::string results_path = out_path("results/results.jsonl");
  if (fs::exists(results_path) && store_.size() == 0) {
    store_ = ResultStore::from_jsonl(read_file(results_path));
    if (store_.size() > 0)
      std::cout << "[run] resuming: " << store_.size() << " completed runs found\n";
  }

  std::vector<const PlanEntry*> todo;
  for (const PlanEntry& entry : plan)
    if (!store_.contains(entry.key())) todo.push_back(&entry);

  fs::create_directories(fs::path(results_path).parent_path());
  // rewrite the validated prefix so a torn trailing line never lingers
  std::ofstream out(results_path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot write " + results_path);
  out << store_.to_jsonl();
  out.flush();

  auto persist = [&](RunResult result) {
    ResultStore single;
    single.append(result);
    out << single.to_jsonl();
    out.flush();
    store_.append(std::move(result));
  };

  const int threads = worker_threads();
  if (threads > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int64_t i = 0; i < static_cast<int64_t>(todo.size()); ++i) {
      RunResult result = execute_entry(*todo[i]);
#pragma omp critical(kgeval_result_store)
      persist(std::move(result));
    }
  } else {
    for (const PlanEntry* entry : todo) persist(execute_entry(*entry));
  }
}

void Orchestrator::prepare() {
  ensure_graph();
  const std::string summary = load_stats_.to_text();
  std::cout << "[prepare] knowledge graph loaded\n" << summary;
  write_file(out_path("kg_stats.txt"), summary);
}

void Orchestrator::preprocess() {
  ensure_embeddings();
  ensure_indices();
  std::cout << "[preprocess] " << embeddings_.size() << " embedding set(s) ready\n";
}

void Orchestrator::map() {
  ensure_mappings();
  for (const char* chain : kChains) {
    const EntityMapping& mapping = mappings_.at(chain);
    std::cout << "[map] chain " << chain << ": " << mapping.size() << "/" << pool_.size()
              << " entities mapped\n";
  }
}

void Orchestrator::run() {
  ensure_datasets();
  ensure_embeddings();
  ensure_indices();
  ensure_mappings();
  const std::vector<std::string> chains = {kChains[0], kChains[1]};
  std::vector<ManifestEntry> entries;
  for (const DatasetSlot& slot : datasets_) entries.push_back(slot.entry);
  const std::vector<PlanEntry> plan = plan_runs(config_, entries, chains);
  std::cout << "[run] plan: " << plan.size() << " runs\n";
  execute_plan(plan);

  size_t ok = 0, skipped = 0, failed = 0;
  for (const RunResult& r : store_.results()) {
    if (r.status == "ok") ++ok;
    else if (r.status == "skipped") ++skipped;
    else ++failed;
  }
  std::cout << "[run] done: " << ok << " ok, " << skipped << " skipped, " << failed
            << " failed\n";
}

void Orchestrator::report() {
  if (store_.size() == 0) {
    const std::string results_path = out_path("results/results.jsonl");
    if (!fs::exists(results_path))
      throw ValidationError("no results found; execute the run stage first");
    store_ = ResultStore::from_jsonl(read_file(results_path));
  }
  const std::vector<ReportRow> rows = build_report(store_);
  write_file(out_path("report/report.csv"), report_csv(rows));
  write_file(out_path("report/report.md"), report_markdown(rows));
  std::cout << "[report] " << rows.size() << " rows -> " << out_path("report/report.csv")
            << "\n";
}

void Orchestrator::all(const std::set<std::string>& stage_filter) {
  auto enabled = [&](const char* stage) {
    return stage_filter.empty() || stage_filter.count(stage) > 0;
  };
  if (enabled("prepare")) prepare();
  if (enabled("preprocess")) preprocess();
  if (enabled("map")) map();
  if (enabled("run")) run();
  if (enabled("report")) report();
}

}  // namespace kgeval

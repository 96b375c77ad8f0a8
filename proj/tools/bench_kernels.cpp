// Benchmark of the parallel kernels against their serial reference
// implementations: embedding SGD epochs (Hogwild vs ordered), skip-gram,
// brute-force k-NN scans, HNSW query batches, and fuzzy label mapping.
// Exact kernels (k-NN, HNSW queries, mapping) are checked for identical
// results; the Hogwild trainers only report loss drift.

#include <omp.h>

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kgeval/ann.hpp"
#include "kgeval/embedding.hpp"
#include "kgeval/mapping.hpp"
#include "kgeval/rng.hpp"

using namespace kgeval;

namespace {

struct BenchResult {
  std::string name;
  double serial_ms = 0.0;
  double parallel_ms = 0.0;
  std::string note;
};

std::vector<BenchResult> g_results;

template <typename F>
double time_ms(F&& fn) {
  const double start = omp_get_wtime();
  fn();
  return (omp_get_wtime() - start) * 1000.0;
}

void record(std::string name, double serial_ms, double parallel_ms, std::string note) {
  g_results.push_back({std::move(name), serial_ms, parallel_ms, std::move(note)});
}

KnowledgeGraph synthetic_graph(size_t n_entities, size_t n_triples, uint64_t seed) {
  Rng rng(seed);
  std::vector<Statement> statements;
  statements.reserve(n_triples);
  auto iri = [](const char* prefix, size_t i) {
    return "http://bench/" + std::string(prefix) + std::to_string(i);
  };
  for (size_t i = 0; i < n_triples; ++i) {
    Statement st;
    st.subject = iri("e", rng.below(n_entities));
    st.predicate = iri("r", rng.below(8));
    st.object.kind = TermKind::Iri;
    st.object.value = iri("e", rng.below(n_entities));
    statements.push_back(std::move(st));
  }
  // every entity present
  for (size_t e = 0; e < n_entities; ++e) {
    Statement st;
    st.subject = iri("e", e);
    st.predicate = iri("r", 0);
    st.object.kind = TermKind::Iri;
    st.object.value = iri("e", (e + 1) % n_entities);
    statements.push_back(std::move(st));
  }
  return build_graph(statements);
}

void bench_trainer(ModelKind kind, const KnowledgeGraph& graph, int threads) {
  TrainConfig config;
  config.dim = 64;
  config.epochs = 1;
  config.negatives = 10;
  config.batch_size = 256;
  config.seed = 7;

  EmbeddingModel serial_model =
      EmbeddingModel::init(kind, graph.entity_count(), graph.relation_count(), config);
  EmbeddingModel parallel_model = serial_model;

  double serial_loss = 0.0, parallel_loss = 0.0;
  const double serial_ms = time_ms([&] {
    serial_loss = train_epoch(serial_model, graph.triples(), config, 0, false, 1).mean_loss;
  });
  const double parallel_ms = time_ms([&] {
    parallel_loss =
        train_epoch(parallel_model, graph.triples(), config, 0, true, threads).mean_loss;
  });

  char note[128];
  std::snprintf(note, sizeof(note), "epoch loss %.4f vs %.4f (lost updates expected)",
                serial_loss, parallel_loss);
  record(std::string(model_kind_name(kind)) + " epoch", serial_ms, parallel_ms, note);
}

void bench_skipgram(const KnowledgeGraph& graph, int threads) {
  const WalkCorpus corpus = generate_walks(graph, 5, 4, 11);
  Rdf2vecConfig config;
  config.dim = 64;
  config.epochs = 1;
  config.seed = 11;

  double serial_ms = 0.0, parallel_ms = 0.0;
  serial_ms = time_ms([&] { train_skipgram(corpus, config, false, 1); });
  parallel_ms = time_ms([&] { train_skipgram(corpus, config, true, threads); });
  char note[64];
  std::snprintf(note, sizeof(note), "%zu walks", corpus.walks.size());
  record("skip-gram epoch", serial_ms, parallel_ms, note);
}

EmbeddingSet random_vectors(size_t n, uint32_t dim, uint64_t seed) {
  EmbeddingSet set;
  set.kind = ModelKind::TransE;
  set.dim = dim;
  set.vectors.resize(n * dim);
  Rng rng(seed);
  for (float& v : set.vectors) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return set;
}

void bench_knn(int threads) {
  const size_t n = 20000, n_queries = 200;
  const uint32_t dim = 64;
  const EmbeddingSet set = random_vectors(n, dim, 21);
  const EmbeddingSet queries = random_vectors(n_queries, dim, 22);

  std::vector<std::vector<Neighbor>> serial_out(n_queries), parallel_out(n_queries);
  const double serial_ms = time_ms([&] {
    for (size_t q = 0; q < n_queries; ++q)
      serial_out[q] = brute_force_knn(set, queries.vec(q), 10, Metric::Cosine);
  });
  const double parallel_ms = time_ms([&] {
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
    for (int64_t q = 0; q < static_cast<int64_t>(n_queries); ++q)
      parallel_out[q] = brute_force_knn(set, queries.vec(q), 10, Metric::Cosine);
  });
  record("brute-force knn batch", serial_ms, parallel_ms,
         serial_out == parallel_out ? "results identical" : "RESULTS DIFFER");
}

void bench_hnsw(int threads) {
  const size_t n = 20000, n_queries = 500;
  const uint32_t dim = 64;
  const EmbeddingSet set = random_vectors(n, dim, 31);
  const EmbeddingSet queries = random_vectors(n_queries, dim, 32);

  HnswIndex::BuildParams params;
  const double build_ms = time_ms([&] {
    const HnswIndex built = HnswIndex::build(set, params);
    (void)built;
  });
  const HnswIndex index = HnswIndex::build(set, params);

  std::vector<std::vector<Neighbor>> serial_out(n_queries), parallel_out(n_queries);
  const double serial_ms = time_ms([&] {
    for (size_t q = 0; q < n_queries; ++q)
      serial_out[q] = index.knn(queries.vec(q), 10, 100);
  });
  const double parallel_ms = time_ms([&] {
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
    for (int64_t q = 0; q < static_cast<int64_t>(n_queries); ++q)
      parallel_out[q] = index.knn(queries.vec(q), 10, 100);
  });
  char note[96];
  std::snprintf(note, sizeof(note), "build %.0f ms; %s", build_ms,
                serial_out == parallel_out ? "results identical" : "RESULTS DIFFER");
  record("hnsw query batch", serial_ms, parallel_ms, note);
}

void bench_mapping(const KnowledgeGraph& graph, int threads) {
  // Labels are attached in a second synthetic graph pass.
  std::vector<Statement> statements;
  Rng rng(41);
  const char* words[] = {"alpha", "beta", "gamma", "delta", "epsilon", "zeta",
                         "eta",   "theta", "iota",  "kappa", "lambda",  "mu"};
  for (EntityId e = 0; e < graph.entity_count(); ++e) {
    Statement st;
    st.subject = graph.entity_iri(e);
    st.predicate = "http://www.w3.org/2000/01/rdf-schema#label";
    st.object.kind = TermKind::Literal;
    st.object.value = std::string(words[rng.below(12)]) + " " + words[rng.below(12)] + " " +
                      std::to_string(rng.below(1000));
    statements.push_back(std::move(st));
  }
  for (const Triple& t : graph.triples()) {
    Statement st;
    st.subject = graph.entity_iri(t.subject);
    st.predicate = graph.relation_iri(t.predicate);
    st.object.kind = TermKind::Iri;
    st.object.value = graph.entity_iri(t.object);
    statements.push_back(std::move(st));
  }
  const KnowledgeGraph labeled = build_graph(statements);
  const LabelIndex index = LabelIndex::build(labeled);

  std::vector<DatasetEntity> entities;
  for (uint32_t i = 0; i < 2000; ++i) {
    DatasetEntity e;
    e.id = i;
    e.label = std::string(words[rng.below(12)]) + " " + words[rng.below(12)] + " " +
              std::to_string(rng.below(1000));
    entities.push_back(std::move(e));
  }

  EntityMapping serial_map, parallel_map;
  const double serial_ms =
      time_ms([&] { serial_map = map_by_label(index, entities, 0.7, nullptr, 1); });
  const double parallel_ms =
      time_ms([&] { parallel_map = map_by_label(index, entities, 0.7, nullptr, threads); });

  bool identical = serial_map.size() == parallel_map.size();
  if (identical) {
    for (const auto& [id, entry] : serial_map.entries()) {
      const MapEntry* other = parallel_map.find(id);
      if (!other || other->kg_entity != entry.kg_entity ||
          other->confidence != entry.confidence) {
        identical = false;
        break;
      }
    }
  }
  char note[96];
  std::snprintf(note, sizeof(note), "%zu/%zu mapped; %s", serial_map.size(), entities.size(),
                identical ? "results identical" : "RESULTS DIFFER");
  record("label mapping", serial_ms, parallel_ms, note);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs OpenMP kernel benchmark"};
  int threads = omp_get_max_threads();
  size_t entities = 20000;
  size_t triples = 100000;
  app.add_option("--threads", threads, "Parallel thread count");
  app.add_option("--entities", entities, "Synthetic graph size");
  app.add_option("--triples", triples, "Synthetic triple count");
  CLI11_PARSE(app, argc, argv);

  std::printf("kernels: %zu entities, %zu triples, %d threads\n\n", entities, triples,
              threads);
  const KnowledgeGraph graph = synthetic_graph(entities, triples, 3);

  bench_trainer(ModelKind::TransE, graph, threads);
  bench_trainer(ModelKind::DistMult, graph, threads);
  bench_trainer(ModelKind::ComplEx, graph, threads);
  bench_skipgram(graph, threads);
  bench_knn(threads);
  bench_hnsw(threads);
  bench_mapping(graph, threads);

  std::printf("%-24s %12s %12s %9s  %s\n", "kernel", "serial (ms)", "parallel (ms)",
              "speedup", "note");
  bool all_ok = true;
  for (const BenchResult& r : g_results) {
    std::printf("%-24s %12.1f %12.1f %8.2fx  %s\n", r.name.c_str(), r.serial_ms,
                r.parallel_ms, r.serial_ms / std::max(r.parallel_ms, 1e-9), r.note.c_str());
    if (r.note.find("DIFFER") != std::string::npos) all_ok = false;
  }
  return all_ok ? 0 : 1;
}

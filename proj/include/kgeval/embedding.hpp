#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kgeval/graph.hpp"
#include "kgeval/rng.hpp"

namespace kgeval {

enum class ModelKind : uint8_t { TransE, DistMult, ComplEx, RDF2vec };

const char* model_kind_name(ModelKind k);
std::optional<ModelKind> parse_model_kind(std::string_view s);

struct TrainConfig {
  uint32_t dim = 100;
  uint32_t epochs = 100;
  double learning_rate = 0.01;
  double margin = 1.0;      // TransE ranking loss
  uint32_t negatives = 25;  // corrupted triples per positive
  uint32_t batch_size = 1024;
  double l2_lambda = 1e-5;  // DistMult / ComplEx
  uint64_t seed = 42;
};

struct Rdf2vecConfig {
  uint32_t dim = 100;
  uint32_t walks_per_entity = 100;
  uint32_t depth = 4;
  uint32_t window = 5;
  uint32_t negatives = 5;
  uint32_t epochs = 5;
  double learning_rate = 0.025;
  uint64_t seed = 42;
};

// Trainable scoring model over the KG. Parameters are doubles during
// training; the exported EmbeddingSet quantizes to float32.
// ComplEx stores each complex vector as [real | imaginary] of length 2d.
class EmbeddingModel {
 public:
  static EmbeddingModel init(ModelKind kind, size_t n_entities, size_t n_relations,
                             const TrainConfig& config);

  ModelKind kind() const { return kind_; }
  uint32_t dim() const { return dim_; }
  // d for TransE/DistMult, 2d for ComplEx.
  uint32_t storage_dim() const { return kind_ == ModelKind::ComplEx ? 2 * dim_ : dim_; }
  size_t entity_count() const { return n_entities_; }
  size_t relation_count() const { return n_relations_; }
  const TrainConfig& config() const { return config_; }

  std::span<double> entity(size_t id) {
    return {entities_.data() + id * storage_dim(), storage_dim()};
  }
  std::span<const double> entity(size_t id) const {
    return {entities_.data() + id * storage_dim(), storage_dim()};
  }
  std::span<double> relation(size_t id) {
    return {relations_.data() + id * storage_dim(), storage_dim()};
  }
  std::span<const double> relation(size_t id) const {
    return {relations_.data() + id * storage_dim(), storage_dim()};
  }

  void normalize_entity(size_t id);

 private:
  ModelKind kind_ = ModelKind::TransE;
  uint32_t dim_ = 0;
  size_t n_entities_ = 0, n_relations_ = 0;
  TrainConfig config_;
  std::vector<double> entities_, relations_;
};

// TransE: -||e_h + w_r - e_t||_2. DistMult: sum_i e_h[i] w_r[i] e_t[i].
// ComplEx: Re(sum_i e_h[i] w_r[i] conj(e_t[i])). Higher = more plausible.
double score_triple(const EmbeddingModel& model, EntityId h, RelationId r, EntityId t);

// n corrupted variants of `triple`: head or tail (fair coin) replaced by a
// uniformly random entity; the unperturbed triple is rejected and resampled.
std::vector<Triple> negative_corrupt(const Triple& triple, Rng& rng, size_t n,
                                     size_t n_entities);

// Per-sample gradients, shared between the SGD step and the finite-difference
// tests so there is a single gradient implementation.
struct SampleGrads {
  double loss = 0.0;
  // Accumulated by id; a vector appears once even when touched by several
  // negatives.
  std::vector<std::pair<uint32_t, std::vector<double>>> entity_grads;
  std::vector<std::pair<uint32_t, std::vector<double>>> relation_grads;
  void clear() {
    loss = 0.0;
    entity_grads.clear();
    relation_grads.clear();
  }
};

// Training objective for one positive and its negatives: TransE margin
// ranking loss, logistic loss with L2 regularization for DistMult/ComplEx.
double sample_loss(const EmbeddingModel& model, const Triple& pos,
                   std::span<const Triple> negs, const TrainConfig& config);
void sample_gradients(const EmbeddingModel& model, const Triple& pos,
                      std::span<const Triple> negs, const TrainConfig& config,
                      SampleGrads& out);

struct EpochStats {
  double mean_loss = 0.0;
  size_t samples = 0;
};

// One pass over shuffled positives in mini-batches, plain SGD. Negative draws
// depend only on (seed, epoch, position), so the fast parallel mode sees the
// same samples as the serial reference; it merely interleaves updates
// (Hogwild, lost updates tolerated). Serial mode is bitwise reproducible.
EpochStats train_epoch(EmbeddingModel& model, std::span<const Triple> triples,
                       const TrainConfig& config, uint32_t epoch, bool parallel,
                       int threads);

using EpochCallback = std::function<void(uint32_t epoch, double mean_loss)>;

std::vector<double> train_model(EmbeddingModel& model, std::span<const Triple> triples,
                                const TrainConfig& config, bool parallel, int threads,
                                const EpochCallback& on_epoch = nullptr);

// Random-walk corpus for RDF2vec. Token ids: entity e -> e,
// relation r -> n_entities + r.
struct WalkCorpus {
  std::vector<std::vector<uint32_t>> walks;
  size_t n_entities = 0;
  size_t n_relations = 0;
};

// Up to walks_per_entity outgoing random walks per entity (one trivial walk
// for sinks), uniform over out-edges, length <= 2*depth + 1 tokens.
WalkCorpus generate_walks(const KnowledgeGraph& graph, uint32_t walks_per_entity,
                          uint32_t depth, uint64_t seed);

// Immutable per-entity vectors, float32, indexed by entity id.
struct EmbeddingSet {
  ModelKind kind = ModelKind::TransE;
  uint32_t dim = 0;
  uint64_t config_hash = 0;
  std::vector<float> vectors;

  size_t count() const { return dim == 0 ? 0 : vectors.size() / dim; }
  std::span<const float> vec(size_t id) const { return {vectors.data() + id * dim, dim}; }
  std::span<float> vec(size_t id) { return {vectors.data() + id * dim, dim}; }
};

// Skip-gram with negative sampling over the walk corpus (unigram^0.75
// negative distribution); only entity tokens are exported.
EmbeddingSet train_skipgram(const WalkCorpus& corpus, const Rdf2vecConfig& config,
                            bool parallel, int threads);

EmbeddingSet export_embeddings(const EmbeddingModel& model);

uint64_t hash_train_config(ModelKind kind, const TrainConfig& config);
uint64_t hash_rdf2vec_config(const Rdf2vecConfig& config);

void save_embeddings(const EmbeddingSet& set, const std::string& path);
EmbeddingSet load_embeddings(const std::string& path);
void save_embeddings_tsv(const EmbeddingSet& set, const KnowledgeGraph& graph,
                         const std::string& path);

}  // namespace kgeval

#include "kgeval/embedding.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "kgeval/binio.hpp"

namespace kgeval {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return std::log1p(std::exp(-std::fabs(x))) + std::max(x, 0.0); }

constexpr double kNormEps = 1e-12;

// Score gradients with respect to the three parameter vectors. `sign` scales
// the contribution (chain rule factor from the loss).
void add_score_grads(const EmbeddingModel& model, const Triple& t, double sign,
                     std::span<double> gh, std::span<double> gr, std::span<double> gt) {
  const auto h = model.entity(t.subject);
  const auto r = model.relation(t.predicate);
  const auto tt = model.entity(t.object);
  const uint32_t sd = model.storage_dim();

  switch (model.kind()) {
    case ModelKind::TransE: {
      double norm2 = 0.0;
      for (uint32_t i = 0; i < sd; ++i) {
        const double d = h[i] + r[i] - tt[i];
        norm2 += d * d;
      }
      const double norm = std::sqrt(norm2);
      if (norm < kNormEps) return;  // score is flat at the origin
      const double inv = sign / norm;
      for (uint32_t i = 0; i < sd; ++i) {
        const double d = h[i] + r[i] - tt[i];
        gh[i] -= inv * d;
        gr[i] -= inv * d;
        gt[i] += inv * d;
      }
      break;
    }
    case ModelKind::DistMult: {
      for (uint32_t i = 0; i < sd; ++i) {
        gh[i] += sign * r[i] * tt[i];
        gr[i] += sign * h[i] * tt[i];
        gt[i] += sign * h[i] * r[i];
      }
      break;
    }
    case ModelKind::ComplEx: {
      const uint32_t d = model.dim();
      for (uint32_t i = 0; i < d; ++i) {
        const double hr = h[i], hi = h[d + i];
        const double rr = r[i], ri = r[d + i];
        const double tr = tt[i], ti = tt[d + i];
        gh[i] += sign * (rr * tr + ri * ti);
        gh[d + i] += sign * (rr * ti - ri * tr);
        gr[i] += sign * (hr * tr + hi * ti);
        gr[d + i] += sign * (hr * ti - hi * tr);
        gt[i] += sign * (hr * rr - hi * ri);
        gt[d + i] += sign * (hi * rr + hr * ri);
      }
      break;
    }
    case ModelKind::RDF2vec:
      throw TrainError("RDF2vec has no triple score");
  }
}

// Accumulation slot per touched vector. Spans into the returned vectors stay
// valid across later insertions: growing the outer vector moves the inner
// std::vector objects but not their heap buffers.
std::vector<double>& grad_slot(std::vector<std::pair<uint32_t, std::vector<double>>>& grads,
                               uint32_t id, uint32_t dim) {
  for (auto& [gid, vec] : grads)
    if (gid == id) return vec;
  grads.emplace_back(id, std::vector<double>(dim, 0.0));
  return grads.back().second;
}

}  // namespace

const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::TransE: return "transe";
    case ModelKind::DistMult: return "distmult";
    case ModelKind::ComplEx: return "complex";
    case ModelKind::RDF2vec: return "rdf2vec";
  }
  return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
  for (ModelKind k :
       {ModelKind::TransE, ModelKind::DistMult, ModelKind::ComplEx, ModelKind::RDF2vec}) {
    if (s == model_kind_name(k)) return k;
  }
  return std::nullopt;
}

EmbeddingModel EmbeddingModel::init(ModelKind kind, size_t n_entities, size_t n_relations,
                                    const TrainConfig& config) {
  if (kind == ModelKind::RDF2vec)
    throw ConfigError("RDF2vec is trained from walks, not as a triple-scoring model");
  if (config.dim == 0) throw ConfigError("embedding dimension must be >= 1");

  EmbeddingModel m;
  m.kind_ = kind;
  m.dim_ = config.dim;
  m.n_entities_ = n_entities;
  m.n_relations_ = n_relations;
  m.config_ = config;
  const uint32_t sd = m.storage_dim();
  m.entities_.resize(n_entities * sd);
  m.relations_.resize(n_relations * sd);

  const double limit = std::sqrt(6.0 / (2.0 * sd));  // Xavier-uniform
  Rng rng(mix_seed(config.seed, static_cast<uint64_t>(kind) + 0x9E1));
  for (double& v : m.entities_) v = rng.uniform(-limit, limit);
  for (double& v : m.relations_) v = rng.uniform(-limit, limit);

  if (kind == ModelKind::TransE)
    for (size_t e = 0; e < n_entities; ++e) m.normalize_entity(e);
  return m;
}

void EmbeddingModel::normalize_entity(size_t id) {
  auto v = entity(id);
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  const double norm = std::sqrt(norm2);
  if (norm < kNormEps) {
    v[0] = 1.0;  // degenerate zero vector, pick a unit direction
    for (size_t i = 1; i < v.size(); ++i) v[i] = 0.0;
    return;
  }
  for (double& x : v) x /= norm;
}

double score_triple(const EmbeddingModel& model, EntityId h, RelationId r, EntityId t) {
  const auto eh = model.entity(h);
  const auto wr = model.relation(r);
  const auto et = model.entity(t);
  const uint32_t sd = model.storage_dim();

  switch (model.kind()) {
    case ModelKind::TransE: {
      double norm2 = 0.0;
      for (uint32_t i = 0; i < sd; ++i) {
        const double d = eh[i] + wr[i] - et[i];
        norm2 += d * d;
      }
      return -std::sqrt(norm2);
    }
    case ModelKind::DistMult: {
      double s = 0.0;
      for (uint32_t i = 0; i < sd; ++i) s += eh[i] * wr[i] * et[i];
      return s;
    }
    case ModelKind::ComplEx: {
      const uint32_t d = model.dim();
      double s = 0.0;
      for (uint32_t i = 0; i < d; ++i) {
        const double hr = eh[i], hi = eh[d + i];
        const double rr = wr[i], ri = wr[d + i];
        const double tr = et[i], ti = et[d + i];
        s += hr * rr * tr + hi * rr * ti + hr * ri * ti - hi * ri * tr;
      }
      return s;
    }
    case ModelKind::RDF2vec:
      throw TrainError("score_triple is unsupported for RDF2vec models");
  }
  return 0.0;
}

std::vector<Triple> negative_corrupt(const Triple& triple, Rng& rng, size_t n,
                                     size_t n_entities) {
  if (n_entities < 2) throw TrainError("negative sampling needs at least 2 entities");
  std::vector<Triple> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    Triple neg = triple;
    do {
      const bool corrupt_head = rng.coin();
      const EntityId candidate = static_cast<EntityId>(rng.below(n_entities));
      neg = triple;
      if (corrupt_head)
        neg.subject = candidate;
      else
        neg.object = candidate;
    } while (neg == triple);
    out.push_back(neg);
  }
  return out;
}

double sample_loss(const EmbeddingModel& model, const Triple& pos,
                   std::span<const Triple> negs, const TrainConfig& config) {
  const double s_pos = score_triple(model, pos.subject, pos.predicate, pos.object);
  if (model.kind() == ModelKind::TransE) {
    double loss = 0.0;
    for (const Triple& neg : negs) {
      const double s_neg = score_triple(model, neg.subject, neg.predicate, neg.object);
      loss += std::max(0.0, config.margin - s_pos + s_neg);
    }
    return negs.empty() ? 0.0 : loss / static_cast<double>(negs.size());
  }

  // Logistic loss over the positive and its negatives, L2 on the positive
  // triple's parameters.
  double loss = softplus(-s_pos);
  for (const Triple& neg : negs)
    loss += softplus(score_triple(model, neg.subject, neg.predicate, neg.object));
  loss /= static_cast<double>(1 + negs.size());

  double reg = 0.0;
  for (double v : model.entity(pos.subject)) reg += v * v;
  for (double v : model.relation(pos.predicate)) reg += v * v;
  for (double v : model.entity(pos.object)) reg += v * v;
  return loss + config.l2_lambda * reg;
}

void sample_gradients(const EmbeddingModel& model, const Triple& pos,
                      std::span<const Triple> negs, const TrainConfig& config,
                      SampleGrads& out) {
  out.clear();
  const uint32_t sd = model.storage_dim();
  auto& ent = out.entity_grads;
  auto& rel = out.relation_grads;

  auto gh = [&](const Triple& t) -> std::span<double> {
    return grad_slot(ent, t.subject, sd);
  };
  auto gt = [&](const Triple& t) -> std::span<double> { return grad_slot(ent, t.object, sd); };
  auto gr = [&](const Triple& t) -> std::span<double> {
    return grad_slot(rel, t.predicate, sd);
  };

  const double s_pos = score_triple(model, pos.subject, pos.predicate, pos.object);

  if (model.kind() == ModelKind::TransE) {
    if (negs.empty()) return;
    const double inv_n = 1.0 / static_cast<double>(negs.size());
    double loss = 0.0;
    for (const Triple& neg : negs) {
      const double s_neg = score_triple(model, neg.subject, neg.predicate, neg.object);
      const double term = config.margin - s_pos + s_neg;
      if (term <= 0.0) continue;
      loss += term;
      add_score_grads(model, pos, -inv_n, gh(pos), gr(pos), gt(pos));
      add_score_grads(model, neg, inv_n, gh(neg), gr(neg), gt(neg));
    }
    out.loss = loss * inv_n;
    return;
  }

  const double scale = 1.0 / static_cast<double>(1 + negs.size());
  double loss = softplus(-s_pos);
  add_score_grads(model, pos, -scale * sigmoid(-s_pos), gh(pos), gr(pos), gt(pos));
  for (const Triple& neg : negs) {
    const double s_neg = score_triple(model, neg.subject, neg.predicate, neg.object);
    loss += softplus(s_neg);
    add_score_grads(model, neg, scale * sigmoid(s_neg), gh(neg), gr(neg), gt(neg));
  }

  double reg = 0.0;
  const double two_lambda = 2.0 * config.l2_lambda;
  {
    auto h = model.entity(pos.subject);
    auto g = gh(pos);
    for (uint32_t i = 0; i < sd; ++i) {
      reg += h[i] * h[i];
      g[i] += two_lambda * h[i];
    }
    auto r = model.relation(pos.predicate);
    auto g2 = gr(pos);
    for (uint32_t i = 0; i < sd; ++i) {
      reg += r[i] * r[i];
      g2[i] += two_lambda * r[i];
    }
    auto t = model.entity(pos.object);
    auto g3 = gt(pos);
    for (uint32_t i = 0; i < sd; ++i) {
      reg += t[i] * t[i];
      g3[i] += two_lambda * t[i];
    }
  }
  out.loss = loss * scale + config.l2_lambda * reg;
}

namespace {

// Applies one SGD step for one positive sample. Returns the sample loss.
double sgd_step(EmbeddingModel& model, const Triple& pos, std::span<const Triple> negs,
                const TrainConfig& config, SampleGrads& scratch) {
  sample_gradients(model, pos, negs, config, scratch);
  const double lr = config.learning_rate;
  for (auto& [id, grad] : scratch.entity_grads) {
    auto v = model.entity(id);
    for (size_t i = 0; i < v.size(); ++i) v[i] -= lr * grad[i];
  }
  for (auto& [id, grad] : scratch.relation_grads) {
    auto v = model.relation(id);
    for (size_t i = 0; i < v.size(); ++i) v[i] -= lr * grad[i];
  }
  if (model.kind() == ModelKind::TransE && lr != 0.0) {
    for (const auto& [id, grad] : scratch.entity_grads) model.normalize_entity(id);
  }
  return scratch.loss;
}

}  // namespace

EpochStats train_epoch(EmbeddingModel& model, std::span<const Triple> triples,
                       const TrainConfig& config, uint32_t epoch, bool parallel,
                       int threads) {
  if (triples.empty()) return {0.0, 0};
  const size_t n = triples.size();
  const size_t batch_size = std::max<size_t>(1, config.batch_size);

  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  Rng shuffle_rng(mix_seed(config.seed, 0xA11C0000ull + epoch));
  shuffle_rng.shuffle(order);

  const size_t n_batches = (n + batch_size - 1) / batch_size;
  const uint64_t epoch_seed = mix_seed(config.seed, 0xE90C0000ull + epoch);

  double loss_sum = 0.0;

  auto run_batch = [&](size_t b, SampleGrads& scratch) {
    double local = 0.0;
    const size_t begin = b * batch_size;
    const size_t end = std::min(n, begin + batch_size);
    for (size_t i = begin; i < end; ++i) {
      const Triple& pos = triples[order[i]];
      Rng sample_rng(mix_seed(epoch_seed, i));
      const std::vector<Triple> negs =
          negative_corrupt(pos, sample_rng, config.negatives, model.entity_count());
      local += sgd_step(model, pos, negs, config, scratch);
    }
    return local;
  };

  if (parallel && threads > 1 && n_batches > 1) {
#pragma omp parallel num_threads(threads) reduction(+ : loss_sum)
    {
      SampleGrads scratch;
#pragma omp for schedule(dynamic)
      for (int64_t b = 0; b < static_cast<int64_t>(n_batches); ++b)
        loss_sum += run_batch(static_cast<size_t>(b), scratch);
    }
    // interleaved updates can tear a projection; restore the norm invariant
    if (model.kind() == ModelKind::TransE && config.learning_rate != 0.0)
      for (size_t e = 0; e < model.entity_count(); ++e) model.normalize_entity(e);
  } else {
    SampleGrads scratch;
    for (size_t b = 0; b < n_batches; ++b) loss_sum += run_batch(b, scratch);
  }

  const double mean = loss_sum / static_cast<double>(n);
  if (!std::isfinite(mean))
    throw TrainError("non-finite epoch loss; consider lowering the learning rate");
  return {mean, n};
}

std::vector<double> train_model(EmbeddingModel& model, std::span<const Triple> triples,
                                const TrainConfig& config, bool parallel, int threads,
                                const EpochCallback& on_epoch) {
  std::vector<double> losses;
  losses.reserve(config.epochs);
  for (uint32_t e = 0; e < config.epochs; ++e) {
    const EpochStats stats = train_epoch(model, triples, config, e, parallel, threads);
    losses.push_back(stats.mean_loss);
    if (on_epoch) on_epoch(e, stats.mean_loss);
  }
  return losses;
}

WalkCorpus generate_walks(const KnowledgeGraph& graph, uint32_t walks_per_entity,
                          uint32_t depth, uint64_t seed) {
  if (depth == 0) throw ConfigError("walk depth must be >= 1");
  WalkCorpus corpus;
  corpus.n_entities = graph.entity_count();
  corpus.n_relations = graph.relation_count();

  for (EntityId e = 0; e < graph.entity_count(); ++e) {
    Rng rng(mix_seed(seed, 0x3A1C0000ull + e));
    const bool sink = graph.out_edges(e).empty();
    const uint32_t n_walks = sink ? 1 : walks_per_entity;
    for (uint32_t w = 0; w < n_walks; ++w) {
      std::vector<uint32_t> walk;
      walk.reserve(2 * depth + 1);
      walk.push_back(e);
      EntityId cur = e;
      for (uint32_t step = 0; step < depth; ++step) {
        const auto edges = graph.out_edges(cur);
        if (edges.empty()) break;
        const auto& [rel, dst] = edges[rng.below(edges.size())];
        walk.push_back(static_cast<uint32_t>(corpus.n_entities) + rel);
        walk.push_back(dst);
        cur = dst;
      }
      corpus.walks.push_back(std::move(walk));
    }
  }
  return corpus;
}

EmbeddingSet train_skipgram(const WalkCorpus& corpus, const Rdf2vecConfig& config,
                            bool parallel, int threads) {
  if (corpus.walks.empty()) throw TrainError("skip-gram requires a non-empty walk corpus");
  if (config.dim == 0) throw ConfigError("embedding dimension must be >= 1");
  const size_t vocab = corpus.n_entities + corpus.n_relations;
  const uint32_t d = config.dim;

  std::vector<uint64_t> counts(vocab, 0);
  for (const auto& walk : corpus.walks)
    for (uint32_t tok : walk) ++counts[tok];
  size_t distinct = 0;
  for (uint64_t c : counts) distinct += c > 0;
  if (distinct < 2)
    throw TrainError("skip-gram needs at least 2 distinct tokens for negative sampling");

  // Cumulative unigram^0.75 table for negative draws.
  std::vector<double> cdf(vocab, 0.0);
  double total = 0.0;
  for (size_t i = 0; i < vocab; ++i) {
    total += counts[i] > 0 ? std::pow(static_cast<double>(counts[i]), 0.75) : 0.0;
    cdf[i] = total;
  }

  std::vector<double> w_in(vocab * d);
  std::vector<double> w_out(vocab * d, 0.0);
  {
    const double limit = std::sqrt(6.0 / (2.0 * d));
    Rng rng(mix_seed(config.seed, 0x57A27ull));
    for (double& v : w_in) v = rng.uniform(-limit, limit);
  }

  auto draw_negative = [&](Rng& rng, uint32_t exclude) -> std::optional<uint32_t> {
    for (int attempt = 0; attempt < 16; ++attempt) {
      const double u = rng.uniform() * total;
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const uint32_t tok =
          static_cast<uint32_t>(std::min<size_t>(vocab - 1, it - cdf.begin()));
      if (tok != exclude && counts[tok] > 0) return tok;
    }
    return std::nullopt;
  };

  const double lr = config.learning_rate;

  auto train_walk = [&](const std::vector<uint32_t>& walk, Rng& rng,
                        std::vector<double>& grad_center) {
    const int len = static_cast<int>(walk.size());
    for (int i = 0; i < len; ++i) {
      const uint32_t center = walk[i];
      double* v = w_in.data() + static_cast<size_t>(center) * d;
      const int lo = std::max(0, i - static_cast<int>(config.window));
      const int hi = std::min(len - 1, i + static_cast<int>(config.window));
      for (int j = lo; j <= hi; ++j) {
        if (j == i) continue;
        const uint32_t context = walk[j];
        std::fill(grad_center.begin(), grad_center.end(), 0.0);

        {  // positive pair
          double* u = w_out.data() + static_cast<size_t>(context) * d;
          double dot = 0.0;
          for (uint32_t k = 0; k < d; ++k) dot += v[k] * u[k];
          const double g = sigmoid(dot) - 1.0;
          for (uint32_t k = 0; k < d; ++k) {
            grad_center[k] += g * u[k];
            u[k] -= lr * g * v[k];
          }
        }
        for (uint32_t s = 0; s < config.negatives; ++s) {
          const auto neg = draw_negative(rng, context);
          if (!neg) continue;
          double* u = w_out.data() + static_cast<size_t>(*neg) * d;
          double dot = 0.0;
          for (uint32_t k = 0; k < d; ++k) dot += v[k] * u[k];
          const double g = sigmoid(dot);
          for (uint32_t k = 0; k < d; ++k) {
            grad_center[k] += g * u[k];
            u[k] -= lr * g * v[k];
          }
        }
        for (uint32_t k = 0; k < d; ++k) v[k] -= lr * grad_center[k];
      }
    }
  };

  for (uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    const uint64_t epoch_seed = mix_seed(config.seed, 0x5E90000ull + epoch);
    if (parallel && threads > 1) {
#pragma omp parallel num_threads(threads)
      {
        std::vector<double> grad_center(d);
#pragma omp for schedule(dynamic, 8)
        for (int64_t w = 0; w < static_cast<int64_t>(corpus.walks.size()); ++w) {
          Rng rng(mix_seed(epoch_seed, static_cast<uint64_t>(w)));
          train_walk(corpus.walks[w], rng, grad_center);
        }
      }
    } else {
      std::vector<double> grad_center(d);
      for (size_t w = 0; w < corpus.walks.size(); ++w) {
        Rng rng(mix_seed(epoch_seed, w));
        train_walk(corpus.walks[w], rng, grad_center);
      }
    }
  }

  EmbeddingSet set;
  set.kind = ModelKind::RDF2vec;
  set.dim = d;
  set.config_hash = hash_rdf2vec_config(config);
  set.vectors.resize(corpus.n_entities * d);
  for (size_t e = 0; e < corpus.n_entities; ++e)
    for (uint32_t k = 0; k < d; ++k)
      set.vectors[e * d + k] = static_cast<float>(w_in[e * d + k]);
  return set;
}

EmbeddingSet export_embeddings(const EmbeddingModel& model) {
  EmbeddingSet set;
  set.kind = model.kind();
  set.dim = model.storage_dim();  // ComplEx exports [real | imaginary], length 2d
  set.config_hash = hash_train_config(model.kind(), model.config());
  set.vectors.resize(model.entity_count() * set.dim);
  for (size_t e = 0; e < model.entity_count(); ++e) {
    const auto v = model.entity(e);
    for (uint32_t k = 0; k < set.dim; ++k)
      set.vectors[e * set.dim + k] = static_cast<float>(v[k]);
  }
  for (float v : set.vectors)
    if (!std::isfinite(v)) throw TrainError("non-finite value in exported embeddings");
  return set;
}

uint64_t hash_train_config(ModelKind kind, const TrainConfig& c) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s|d=%u|ep=%u|lr=%.17g|m=%.17g|neg=%u|b=%u|l2=%.17g|s=%llu",
                model_kind_name(kind), c.dim, c.epochs, c.learning_rate, c.margin,
                c.negatives, c.batch_size, c.l2_lambda,
                static_cast<unsigned long long>(c.seed));
  uint64_t h = 0xcbf29ce484222325ull;
  for (const char* p = buf; *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t hash_rdf2vec_config(const Rdf2vecConfig& c) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "rdf2vec|d=%u|w=%u|dep=%u|win=%u|neg=%u|ep=%u|lr=%.17g|s=%llu",
                c.dim, c.walks_per_entity, c.depth, c.window, c.negatives, c.epochs,
                c.learning_rate, static_cast<unsigned long long>(c.seed));
  uint64_t h = 0xcbf29ce484222325ull;
  for (const char* p = buf; *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 0x100000001b3ull;
  }
  return h;
}

void save_embeddings(const EmbeddingSet& set, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  write_magic(os, "KGEV1");
  write_le<uint8_t>(os, static_cast<uint8_t>(set.kind));
  write_le<uint32_t>(os, set.dim);
  write_le<uint64_t>(os, set.count());
  write_le<uint64_t>(os, set.config_hash);
  for (size_t e = 0; e < set.count(); ++e) {
    write_le<uint32_t>(os, static_cast<uint32_t>(e));
    for (float v : set.vec(e)) write_le<float>(os, v);
  }
  if (!os) throw IoError("write failed for " + path);
}

EmbeddingSet load_embeddings(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  try {
    expect_magic(is, "KGEV1", "embedding file");
    EmbeddingSet set;
    set.kind = static_cast<ModelKind>(read_le<uint8_t>(is));
    set.dim = read_le<uint32_t>(is);
    const uint64_t n = read_le<uint64_t>(is);
    set.config_hash = read_le<uint64_t>(is);
    if (set.dim == 0) throw IoError("embedding file has dimension 0");
    set.vectors.resize(n * set.dim);
    std::vector<char> seen(n, 0);
    for (uint64_t i = 0; i < n; ++i) {
      const uint32_t id = read_le<uint32_t>(is);
      if (id >= n || seen[id]) throw IoError("embedding file has invalid entity id");
      seen[id] = 1;
      for (uint32_t k = 0; k < set.dim; ++k)
        set.vectors[static_cast<size_t>(id) * set.dim + k] = read_le<float>(is);
    }
    return set;
  } catch (const IoError& e) {
    throw IoError(path + ": truncated or corrupt embedding file (" + e.what() + ")");
  }
}

void save_embeddings_tsv(const EmbeddingSet& set, const KnowledgeGraph& graph,
                         const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  char buf[64];
  for (size_t e = 0; e < set.count(); ++e) {
    os << graph.entity_iri(e) << '\t';
    const auto v = set.vec(e);
    for (size_t k = 0; k < v.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v[k]));
      if (k > 0) os << ' ';
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace kgeval

#pragma once

#include "kgeval/ann.hpp"
#include "kgeval/dataset.hpp"
#include "kgeval/tasks_ml.hpp"

namespace kgeval {

// Document similarity over LP50-style data: document vector = mean of its
// mapped entities' vectors, predicted similarity = cosine. Emits Spearman,
// Pearson, and their harmonic mean.
AlgoRun run_docsim_task(const DocSimDataset& dataset, const EmbeddingSet& embeddings,
                        const EntityMapping& mapping);

// KORE-style relatedness: candidates ranked by cosine to the seed, Kendall's
// tau-b against the gold ranking, averaged over seeds.
AlgoRun run_relatedness_task(const RelatednessDataset& dataset,
                             const EmbeddingSet& embeddings, const EntityMapping& mapping);

enum class AnalogyMode : uint8_t { Auto, ForceExact, ForceAnn };

// d_hat = argmax cosine(x, v_b - v_a + v_c) excluding a, b, c. The Auto mode
// uses brute force below 10k entities and the ANN index (ef_search=200) above.
AlgoRun run_analogy_task(const AnalogyDataset& dataset, const EmbeddingSet& embeddings,
                         const EntityMapping& mapping, const HnswIndex* index,
                         AnalogyMode mode = AnalogyMode::Auto);

// Item-similarity recommender: seeded 80/20 per-user split over positive
// items, candidates scored by mean cosine to the mapped train profile,
// mean F1@k over users.
AlgoRun run_recommendation_task(const RatingsDataset& dataset, const EmbeddingSet& embeddings,
                                const EntityMapping& mapping, uint64_t seed);

}  // namespace kgeval

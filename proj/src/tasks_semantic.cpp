#include "kgeval/tasks_semantic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include "kgeval/metrics.hpp"
#include "kgeval/rng.hpp"

namespace kgeval {

namespace {

double cosine_sim(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return na == nb ? 1.0 : 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double cosine_sim_f(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) return na == nb ? 1.0 : 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double entity_coverage(std::span<const uint32_t> pool_ids, const EntityMapping& mapping) {
  if (pool_ids.empty()) return 0.0;
  size_t mapped = 0;
  for (uint32_t id : pool_ids) mapped += mapping.contains(id);
  return static_cast<double>(mapped) / static_cast<double>(pool_ids.size());
}

ScenarioMetrics make_metric(const std::string& name, double known, double all,
                            double coverage) {
  ScenarioMetrics m;
  m.name = name;
  m.value_known = known;
  m.value_all = all;
  m.coverage = coverage;
  m.direction = MetricDirection::HigherBetter;
  return m;
}

}  // namespace

AlgoRun run_docsim_task(const DocSimDataset& dataset, const EmbeddingSet& embeddings,
                        const EntityMapping& mapping) {
  AlgoRun run;
  run.algo = "cosine_similarity";
  if (dataset.docs.size() < 2)
    throw ValidationError("document similarity needs at least 2 documents");

  const size_t dim = embeddings.dim;
  std::vector<std::vector<double>> doc_vec(dataset.docs.size());
  std::vector<bool> doc_has_entities(dataset.docs.size(), false);
  for (size_t d = 0; d < dataset.docs.size(); ++d) {
    std::vector<double> acc(dim, 0.0);
    size_t mapped = 0;
    for (size_t row : dataset.docs[d].entity_rows) {
      const MapEntry* entry = mapping.find(dataset.entities[row].id);
      if (!entry) continue;
      const auto vec = embeddings.vec(entry->kg_entity);
      for (size_t i = 0; i < dim; ++i) acc[i] += vec[i];
      ++mapped;
    }
    if (mapped > 0) {
      for (double& v : acc) v /= static_cast<double>(mapped);
      doc_vec[d] = std::move(acc);
      doc_has_entities[d] = true;
    }
  }

  std::vector<double> gold_all, pred_all, gold_known, pred_known;
  for (const auto& pair : dataset.gold) {
    const bool both = doc_has_entities[pair.doc_a] && doc_has_entities[pair.doc_b];
    const double predicted = both ? cosine_sim(doc_vec[pair.doc_a], doc_vec[pair.doc_b]) : 0.0;
    gold_all.push_back(pair.score);
    pred_all.push_back(predicted);
    if (both) {
      gold_known.push_back(pair.score);
      pred_known.push_back(predicted);
    }
  }

  auto correlations = [](std::span<const double> gold, std::span<const double> pred) {
    if (gold.size() < 2) return std::pair<double, double>{0.0, 0.0};
    return std::pair<double, double>{spearman(gold, pred), pearson(gold, pred)};
  };
  const auto [s_known, p_known] = correlations(gold_known, pred_known);
  const auto [s_all, p_all] = correlations(gold_all, pred_all);

  std::vector<uint32_t> ids;
  for (const auto& e : dataset.entities) ids.push_back(e.id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const double coverage = entity_coverage(ids, mapping);

  run.metrics.push_back(make_metric("spearman", s_known, s_all, coverage));
  run.metrics.push_back(make_metric("pearson", p_known, p_all, coverage));
  run.metrics.push_back(make_metric("harmonic_mean", harmonic_mean(s_known, p_known),
                                    harmonic_mean(s_all, p_all), coverage));
  return run;
}

AlgoRun run_relatedness_task(const RelatednessDataset& dataset,
                             const EmbeddingSet& embeddings, const EntityMapping& mapping) {
  AlgoRun run;
  run.algo = "cosine_similarity";

  double tau_known_sum = 0.0, tau_all_sum = 0.0;
  size_t known_seeds = 0, all_seeds = 0;

  std::vector<uint32_t> ids;
  for (const auto& seed : dataset.seeds) {
    ids.push_back(seed.seed.id);
    for (const auto& c : seed.candidates) ids.push_back(c.id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  for (const auto& seed : dataset.seeds) {
    if (seed.candidates.size() < 2) continue;  // degenerate seed, skipped everywhere
    const MapEntry* seed_entry = mapping.find(seed.seed.id);

    // All-entities scenario: every candidate participates; unmapped candidates
    // rank tied at the bottom (similarity below any attainable cosine).
    if (seed_entry) {
      std::vector<double> gold, sims;
      for (size_t i = 0; i < seed.candidates.size(); ++i) {
        const MapEntry* cand = mapping.find(seed.candidates[i].id);
        double sim = -2.0;
        if (cand)
          sim = cosine_sim_f(embeddings.vec(seed_entry->kg_entity),
                             embeddings.vec(cand->kg_entity));
        gold.push_back(static_cast<double>(seed.gold_ranks[i]));
        sims.push_back(-sim);  // ascending gold rank should match ascending -sim
      }
      tau_all_sum += kendall_tau_b(gold, sims);
    }
    // unmapped seed contributes tau 0 in the all-entities scenario
    ++all_seeds;

    if (!seed_entry) continue;  // excluded from the known scenario
    std::vector<double> gold, sims;
    for (size_t i = 0; i < seed.candidates.size(); ++i) {
      const MapEntry* cand = mapping.find(seed.candidates[i].id);
      if (!cand) continue;
      gold.push_back(static_cast<double>(seed.gold_ranks[i]));
      sims.push_back(-cosine_sim_f(embeddings.vec(seed_entry->kg_entity),
                                   embeddings.vec(cand->kg_entity)));
    }
    if (gold.size() < 2) continue;  // seed skipped in the known scenario
    tau_known_sum += kendall_tau_b(gold, sims);
    ++known_seeds;
  }

  const double tau_known = known_seeds > 0 ? tau_known_sum / known_seeds : 0.0;
  const double tau_all = all_seeds > 0 ? tau_all_sum / all_seeds : 0.0;
  run.metrics.push_back(
      make_metric("kendall_tau", tau_known, tau_all, entity_coverage(ids, mapping)));
  return run;
}

AlgoRun run_analogy_task(const AnalogyDataset& dataset, const EmbeddingSet& embeddings,
                         const EntityMapping& mapping, const HnswIndex* index,
                         AnalogyMode mode) {
  AlgoRun run;
  run.algo = "cosine_similarity";
  constexpr size_t kAnnCutover = 10000;
  constexpr size_t kEfSearch = 200;

  bool use_ann = false;
  switch (mode) {
    case AnalogyMode::Auto:
      use_ann = index != nullptr && embeddings.count() > kAnnCutover;
      break;
    case AnalogyMode::ForceExact: use_ann = false; break;
    case AnalogyMode::ForceAnn:
      if (!index) throw ConfigError("analogy: ANN mode requested without an index");
      use_ann = true;
      break;
  }

  const size_t dim = embeddings.dim;
  size_t correct = 0, fully_mapped = 0;

  std::vector<uint32_t> ids;
  for (const auto& row : dataset.rows) {
    ids.push_back(row.a.id);
    ids.push_back(row.b.id);
    ids.push_back(row.c.id);
    ids.push_back(row.d.id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  for (const auto& row : dataset.rows) {
    const MapEntry* ma = mapping.find(row.a.id);
    const MapEntry* mb = mapping.find(row.b.id);
    const MapEntry* mc = mapping.find(row.c.id);
    const MapEntry* md = mapping.find(row.d.id);
    if (!ma || !mb || !mc || !md) continue;  // incorrect in "all", excluded in "known"
    ++fully_mapped;

    std::vector<float> query(dim);
    const auto va = embeddings.vec(ma->kg_entity);
    const auto vb = embeddings.vec(mb->kg_entity);
    const auto vc = embeddings.vec(mc->kg_entity);
    for (size_t i = 0; i < dim; ++i)
      query[i] = static_cast<float>(static_cast<double>(vb[i]) - static_cast<double>(va[i]) +
                                    static_cast<double>(vc[i]));

    const std::set<EntityId> excluded{ma->kg_entity, mb->kg_entity, mc->kg_entity};
    std::vector<Neighbor> neighbors;
    if (use_ann)
      neighbors = index->knn(query, excluded.size() + 1, kEfSearch);
    else
      neighbors = brute_force_knn(embeddings, query, excluded.size() + 1, Metric::Cosine);

    EntityId predicted = 0;
    bool found = false;
    for (const Neighbor& nb : neighbors) {
      if (excluded.count(nb.id)) continue;
      predicted = nb.id;
      found = true;
      break;
    }
    if (found && predicted == md->kg_entity) ++correct;
  }

  const double known =
      fully_mapped > 0 ? static_cast<double>(correct) / static_cast<double>(fully_mapped) : 0.0;
  const double all = dataset.rows.empty()
                         ? 0.0
                         : static_cast<double>(correct) / static_cast<double>(dataset.rows.size());
  run.metrics.push_back(make_metric("accuracy", known, all, entity_coverage(ids, mapping)));
  return run;
}

AlgoRun run_recommendation_task(const RatingsDataset& dataset, const EmbeddingSet& embeddings,
                                const EntityMapping& mapping, uint64_t seed) {
  AlgoRun run;
  run.algo = "item_similarity";
  run.hyper = {{"k", static_cast<double>(dataset.top_k)}};
  const size_t k = dataset.top_k;
  if (k == 0) throw ConfigError("recommendation requires top_k >= 1");

  // Mapped item rows and their KG vectors.
  std::vector<std::optional<EntityId>> item_kg(dataset.items.size());
  std::vector<uint32_t> mapped_items;
  for (size_t i = 0; i < dataset.items.size(); ++i) {
    const MapEntry* entry = mapping.find(dataset.items[i].id);
    if (entry) {
      item_kg[i] = entry->kg_entity;
      mapped_items.push_back(static_cast<uint32_t>(i));
    }
  }

  double f1_all_sum = 0.0, f1_known_sum = 0.0;
  size_t all_users = 0, known_users = 0;

  for (size_t u = 0; u < dataset.user_positives.size(); ++u) {
    const auto& [user, positives] = dataset.user_positives[u];
    // Seeded 80/20 split per user over the positive items.
    std::vector<uint32_t> shuffled = positives;
    Rng rng(mix_seed(seed, 0x9EC0000ull + u));
    rng.shuffle(shuffled);
    const size_t n_test = std::max<size_t>(1, shuffled.size() / 5);
    std::vector<uint32_t> test(shuffled.begin(), shuffled.begin() + n_test);
    std::vector<uint32_t> train(shuffled.begin() + n_test, shuffled.end());

    const std::unordered_set<uint32_t> train_set(train.begin(), train.end());
    std::vector<uint32_t> profile;  // mapped train items
    for (uint32_t item : train)
      if (item_kg[item]) profile.push_back(item);

    ++all_users;
    if (profile.empty()) {
      // No usable profile: F1 0 in the all scenario, excluded from known.
      continue;
    }

    // Score candidates: mapped items outside the train profile.
    std::vector<std::pair<double, uint32_t>> scored;
    for (uint32_t item : mapped_items) {
      if (train_set.count(item)) continue;
      double sum = 0.0;
      for (uint32_t p : profile)
        sum += cosine_sim_f(embeddings.vec(*item_kg[item]), embeddings.vec(*item_kg[p]));
      scored.push_back({sum / static_cast<double>(profile.size()), item});
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<uint32_t> topk;
    for (size_t i = 0; i < scored.size() && i < k; ++i) topk.push_back(scored[i].second);

    f1_all_sum += f1_at_k(topk, test, k);

    std::vector<uint32_t> test_known;
    for (uint32_t item : test)
      if (item_kg[item]) test_known.push_back(item);
    if (!test_known.empty()) {
      f1_known_sum += f1_at_k(topk, test_known, k);
      ++known_users;
    }
  }

  const double f1_all = all_users > 0 ? f1_all_sum / all_users : 0.0;
  const double f1_known = known_users > 0 ? f1_known_sum / known_users : 0.0;

  std::vector<uint32_t> ids;
  for (const auto& item : dataset.items) ids.push_back(item.id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  run.metrics.push_back(make_metric("f1", f1_known, f1_all, entity_coverage(ids, mapping)));
  return run;
}

}  // namespace kgeval

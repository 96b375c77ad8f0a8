#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "kgeval/embedding.hpp"
#include "kgeval/rng.hpp"
#include "support/gradcheck.hpp"

using namespace kgeval;

namespace {

// Chain graph e0 -> e1 -> ... -> e(n-1) over alternating relations.
KnowledgeGraph chain_graph(size_t n) {
  std::vector<Statement> sts;
  for (size_t i = 0; i + 1 < n; ++i) {
    Statement st;
    st.subject = "http://x/e" + std::to_string(i);
    st.predicate = "http://x/r" + std::to_string(i % 2);
    st.object.kind = TermKind::Iri;
    st.object.value = "http://x/e" + std::to_string(i + 1);
    sts.push_back(st);
  }
  return build_graph(sts);
}

// k clusters of `per` entities with within-cluster random edges.
KnowledgeGraph clustered_graph(size_t k, size_t per, size_t triples_per_cluster,
                               uint64_t seed) {
  Rng rng(seed);
  std::vector<Statement> sts;
  for (size_t c = 0; c < k; ++c) {
    for (size_t t = 0; t < triples_per_cluster; ++t) {
      const size_t a = c * per + rng.below(per);
      size_t b = c * per + rng.below(per);
      while (b == a) b = c * per + rng.below(per);
      Statement st;
      st.subject = "http://x/e" + std::to_string(a);
      st.predicate = "http://x/r" + std::to_string(c);
      st.object.kind = TermKind::Iri;
      st.object.value = "http://x/e" + std::to_string(b);
      sts.push_back(st);
    }
  }
  return build_graph(sts);
}

double cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += double(a[i]) * b[i];
    na += double(a[i]) * a[i];
    nb += double(b[i]) * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb) + 1e-300);
}

}  // namespace

TEST_SUITE("embedding") {

TEST_CASE("score_triple closed-form examples") {
  TrainConfig config;
  config.dim = 4;

  SUBCASE("transe at the origin scores zero") {
    EmbeddingModel m = EmbeddingModel::init(ModelKind::TransE, 2, 1, config);
    for (double& v : m.entity(0)) v = 0;
    for (double& v : m.entity(1)) v = 0;
    for (double& v : m.relation(0)) v = 0;
    CHECK(score_triple(m, 0, 0, 1) == 0.0);
  }
  SUBCASE("distmult one-hot product is 1") {
    EmbeddingModel m = EmbeddingModel::init(ModelKind::DistMult, 2, 1, config);
    for (size_t e = 0; e < 2; ++e) {
      auto v = m.entity(e);
      for (double& x : v) x = 0;
      v[2] = 1.0;
    }
    auto r = m.relation(0);
    for (double& x : r) x = 0;
    r[2] = 1.0;
    CHECK(score_triple(m, 0, 0, 1) == doctest::Approx(1.0));
  }
  SUBCASE("complex with zero imaginary parts reduces to distmult") {
    EmbeddingModel m = EmbeddingModel::init(ModelKind::ComplEx, 2, 1, config);
    for (size_t e = 0; e < 2; ++e) {
      auto v = m.entity(e);
      for (double& x : v) x = 0;
      v[2] = 1.0;  // real part
    }
    auto r = m.relation(0);
    for (double& x : r) x = 0;
    r[2] = 1.0;
    CHECK(score_triple(m, 0, 0, 1) == doctest::Approx(1.0));
  }
  SUBCASE("rdf2vec models cannot score triples") {
    CHECK_THROWS_AS(EmbeddingModel::init(ModelKind::RDF2vec, 2, 1, config), ConfigError);
  }
}

TEST_CASE("negative_corrupt contracts") {
  const Triple t{0, 0, 1};
  SUBCASE("with two entities the alternative is forced") {
    Rng rng(1);
    for (const Triple& neg : negative_corrupt(t, rng, 20, 2)) {
      CHECK(neg != t);
      const bool head_corrupted = neg.subject != t.subject;
      if (head_corrupted)
        CHECK(neg.subject == 1);
      else
        CHECK(neg.object == 0);
    }
  }
  SUBCASE("exactly n outputs, none equal to the input") {
    Rng rng(2);
    const auto negs = negative_corrupt(t, rng, 5, 50);
    CHECK(negs.size() == 5);
    for (const Triple& neg : negs) CHECK(neg != t);
  }
  SUBCASE("fixed seed reproduces the sequence") {
    Rng r1(3), r2(3);
    CHECK(negative_corrupt(t, r1, 10, 50) == negative_corrupt(t, r2, 10, 50));
  }
  SUBCASE("fewer than two entities is an error") {
    Rng rng(4);
    CHECK_THROWS_AS(negative_corrupt(t, rng, 1, 1), TrainError);
  }
}

TEST_CASE("gradient checks against central finite differences") {
  for (ModelKind kind : {ModelKind::TransE, ModelKind::DistMult, ModelKind::ComplEx})
    CHECK(testsupport::gradient_check_many(kind, 30, 1) < 1e-4);
}

TEST_CASE("train_epoch basics") {
  TrainConfig config;
  config.dim = 8;
  config.negatives = 2;
  config.epochs = 1;

  SUBCASE("no triples means zero loss and no updates") {
    EmbeddingModel m = EmbeddingModel::init(ModelKind::TransE, 5, 2, config);
    const EmbeddingModel before = m;
    const EpochStats stats = train_epoch(m, {}, config, 0, false, 1);
    CHECK(stats.mean_loss == 0.0);
    CHECK(stats.samples == 0);
    CHECK(m.entity(0)[0] == before.entity(0)[0]);
  }
  SUBCASE("learning rate zero leaves parameters unchanged") {
    const KnowledgeGraph g = chain_graph(4);
    TrainConfig zero = config;
    zero.learning_rate = 0.0;
    EmbeddingModel m = EmbeddingModel::init(ModelKind::DistMult, g.entity_count(),
                                            g.relation_count(), zero);
    const EmbeddingModel before = m;
    const EpochStats first = train_epoch(m, g.triples(), zero, 0, false, 1);
    const EpochStats second = train_epoch(m, g.triples(), zero, 0, false, 1);
    CHECK(first.mean_loss == second.mean_loss);  // nothing moved
    for (size_t e = 0; e < g.entity_count(); ++e)
      for (size_t i = 0; i < m.storage_dim(); ++i)
        CHECK(m.entity(e)[i] == before.entity(e)[i]);
  }
  SUBCASE("loss trends down on a chain graph") {
    const KnowledgeGraph g = chain_graph(20);
    TrainConfig cfg = config;
    cfg.dim = 16;
    cfg.epochs = 50;
    cfg.learning_rate = 0.05;
    cfg.negatives = 4;
    cfg.batch_size = 8;
    EmbeddingModel m =
        EmbeddingModel::init(ModelKind::TransE, g.entity_count(), g.relation_count(), cfg);
    const std::vector<double> losses = train_model(m, g.triples(), cfg, false, 1);
    CHECK(losses.back() < losses.front());
  }
}

TEST_CASE("transe entity vectors stay normalized") {
  const KnowledgeGraph g = chain_graph(12);
  TrainConfig config;
  config.dim = 8;
  config.epochs = 5;
  config.negatives = 3;
  config.learning_rate = 0.1;
  EmbeddingModel m =
      EmbeddingModel::init(ModelKind::TransE, g.entity_count(), g.relation_count(), config);
  train_model(m, g.triples(), config, false, 1);
  for (size_t e = 0; e < g.entity_count(); ++e) {
    double norm2 = 0;
    for (double v : m.entity(e)) norm2 += v * v;
    CHECK(std::fabs(std::sqrt(norm2) - 1.0) < 1e-6);
  }
}

TEST_CASE("deterministic single-threaded training is bitwise reproducible") {
  const KnowledgeGraph g = chain_graph(15);
  TrainConfig config;
  config.dim = 8;
  config.epochs = 3;
  config.negatives = 2;
  auto train_once = [&](ModelKind kind) {
    EmbeddingModel m =
        EmbeddingModel::init(kind, g.entity_count(), g.relation_count(), config);
    train_model(m, g.triples(), config, false, 1);
    return export_embeddings(m);
  };
  for (ModelKind kind : {ModelKind::TransE, ModelKind::DistMult, ModelKind::ComplEx}) {
    const EmbeddingSet a = train_once(kind);
    const EmbeddingSet b = train_once(kind);
    CHECK(a.vectors == b.vectors);
  }
}

TEST_CASE("non-finite loss aborts with a diagnostic") {
  const KnowledgeGraph g = chain_graph(6);
  TrainConfig config;
  config.dim = 8;
  config.epochs = 60;
  config.learning_rate = 1e18;  // guaranteed blow-up
  config.negatives = 2;
  EmbeddingModel m = EmbeddingModel::init(ModelKind::DistMult, g.entity_count(),
                                          g.relation_count(), config);
  CHECK_THROWS_AS(train_model(m, g.triples(), config, false, 1), TrainError);
}

TEST_CASE("generate_walks contracts") {
  SUBCASE("sink yields a single length-1 walk") {
    std::vector<Statement> sts;
    Statement st;
    st.subject = "http://x/a";
    st.predicate = "http://x/p";
    st.object.kind = TermKind::Iri;
    st.object.value = "http://x/b";
    sts.push_back(st);
    const KnowledgeGraph g = build_graph(sts);
    const WalkCorpus corpus = generate_walks(g, 10, 3, 1);
    // a gets 10 walks, sink b gets exactly one trivial walk
    size_t b_walks = 0;
    const EntityId b = *g.find_entity("http://x/b");
    for (const auto& walk : corpus.walks)
      if (walk.front() == b) {
        ++b_walks;
        CHECK(walk.size() == 1);
      }
    CHECK(b_walks == 1);
    CHECK(corpus.walks.size() == 11);
  }
  SUBCASE("chain walk alternates entity and relation tokens") {
    const KnowledgeGraph g = chain_graph(3);  // a -> b -> c
    const WalkCorpus corpus = generate_walks(g, 1, 2, 7);
    const EntityId a = *g.find_entity("http://x/e0");
    for (const auto& walk : corpus.walks) {
      if (walk.front() != a) continue;
      REQUIRE(walk.size() == 5);  // e r e r e
      CHECK(walk[0] < g.entity_count());
      CHECK(walk[1] >= g.entity_count());
      CHECK(walk[2] < g.entity_count());
      CHECK(walk[3] >= g.entity_count());
      CHECK(walk[4] < g.entity_count());
    }
  }
  SUBCASE("walk length is bounded by 2*depth+1 and seeds reproduce") {
    const KnowledgeGraph g = clustered_graph(2, 10, 40, 5);
    const WalkCorpus c1 = generate_walks(g, 5, 4, 9);
    const WalkCorpus c2 = generate_walks(g, 5, 4, 9);
    CHECK(c1.walks == c2.walks);
    for (const auto& walk : c1.walks) CHECK(walk.size() <= 2 * 4 + 1);
  }
}

TEST_CASE("skip-gram learns co-occurrence structure") {
  // a <-> b co-occur in walks; c -> d is a disjoint component.
  std::vector<Statement> sts;
  auto edge = [&](const std::string& s, const std::string& o) {
    Statement st;
    st.subject = s;
    st.predicate = "http://x/p";
    st.object.kind = TermKind::Iri;
    st.object.value = o;
    sts.push_back(st);
  };
  edge("http://x/a", "http://x/b");
  edge("http://x/b", "http://x/a");
  edge("http://x/c", "http://x/d");
  edge("http://x/d", "http://x/c");
  const KnowledgeGraph g = build_graph(sts);

  Rdf2vecConfig config;
  config.dim = 16;
  config.epochs = 8;
  config.walks_per_entity = 40;
  config.depth = 3;
  config.window = 4;
  config.negatives = 4;
  const WalkCorpus corpus = generate_walks(g, config.walks_per_entity, config.depth, 3);
  const EmbeddingSet set = train_skipgram(corpus, config, false, 1);

  const EntityId a = *g.find_entity("http://x/a");
  const EntityId b = *g.find_entity("http://x/b");
  const EntityId c = *g.find_entity("http://x/c");
  CHECK(cosine(set.vec(a), set.vec(b)) > cosine(set.vec(a), set.vec(c)));
}

TEST_CASE("skip-gram degenerate configurations") {
  const KnowledgeGraph g = chain_graph(4);
  Rdf2vecConfig config;
  config.dim = 8;
  const WalkCorpus corpus = generate_walks(g, 3, 2, 1);

  SUBCASE("lr = 0 equals epochs = 0 equals initialization") {
    Rdf2vecConfig zero_lr = config;
    zero_lr.learning_rate = 0.0;
    Rdf2vecConfig zero_epochs = config;
    zero_epochs.epochs = 0;
    const EmbeddingSet a = train_skipgram(corpus, zero_lr, false, 1);
    const EmbeddingSet b = train_skipgram(corpus, zero_epochs, false, 1);
    CHECK(a.vectors == b.vectors);
  }
  SUBCASE("single distinct token cannot be trained") {
    WalkCorpus degenerate;
    degenerate.n_entities = 1;
    degenerate.n_relations = 0;
    degenerate.walks = {{0}, {0}};
    CHECK_THROWS_AS(train_skipgram(degenerate, config, false, 1), TrainError);
  }
  SUBCASE("empty corpus is an error") {
    WalkCorpus empty;
    empty.n_entities = 2;
    CHECK_THROWS_AS(train_skipgram(empty, config, false, 1), TrainError);
  }
}

TEST_CASE("embedding file round-trip is bitwise exact") {
  namespace fs = std::filesystem;
  const KnowledgeGraph g = chain_graph(9);
  TrainConfig config;
  config.dim = 8;
  config.epochs = 2;
  config.negatives = 2;
  EmbeddingModel m = EmbeddingModel::init(ModelKind::ComplEx, g.entity_count(),
                                          g.relation_count(), config);
  train_model(m, g.triples(), config, false, 1);
  const EmbeddingSet set = export_embeddings(m);
  CHECK(set.dim == 2 * config.dim);  // real and imaginary halves

  const fs::path dir = fs::temp_directory_path() / "kgeval_emb_test";
  fs::create_directories(dir);
  const std::string path = (dir / "vectors.kgev").string();
  save_embeddings(set, path);
  const EmbeddingSet loaded = load_embeddings(path);
  CHECK(loaded.vectors == set.vectors);
  CHECK(loaded.kind == set.kind);
  CHECK(loaded.dim == set.dim);
  CHECK(loaded.config_hash == set.config_hash);

  SUBCASE("truncated file fails to load") {
    std::string bytes;
    {
      std::ifstream is(path, std::ios::binary);
      std::stringstream buf;
      buf << is.rdbuf();
      bytes = buf.str();
    }
    const std::string trunc_path = (dir / "trunc.kgev").string();
    std::ofstream os(trunc_path, std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 13));
    os.close();
    CHECK_THROWS_AS(load_embeddings(trunc_path), IoError);
  }
  SUBCASE("tsv export lists one entity per line") {
    const std::string tsv_path = (dir / "vectors.tsv").string();
    save_embeddings_tsv(set, g, tsv_path);
    std::ifstream is(tsv_path);
    std::string line;
    size_t lines = 0;
    while (std::getline(is, line)) ++lines;
    CHECK(lines == g.entity_count());
  }
  fs::remove_all(dir);
}

TEST_CASE("planted clusters separate for all four model kinds") {
  const size_t k = 3, per = 12;
  const KnowledgeGraph g = clustered_graph(k, per, 60, 17);

  auto check_separation = [&](const EmbeddingSet& set) {
    double intra = 0, inter = 0;
    size_t n_intra = 0, n_inter = 0;
    for (size_t i = 0; i < g.entity_count(); ++i) {
      for (size_t j = i + 1; j < g.entity_count(); ++j) {
        const double c = cosine(set.vec(i), set.vec(j));
        if (i / per == j / per) {
          intra += c;
          ++n_intra;
        } else {
          inter += c;
          ++n_inter;
        }
      }
    }
    CHECK(intra / n_intra > inter / n_inter);
  };

  TrainConfig config;
  config.dim = 16;
  config.epochs = 30;
  config.negatives = 4;
  config.batch_size = 64;
  config.learning_rate = 0.05;
  for (ModelKind kind : {ModelKind::TransE, ModelKind::DistMult, ModelKind::ComplEx}) {
    EmbeddingModel m =
        EmbeddingModel::init(kind, g.entity_count(), g.relation_count(), config);
    train_model(m, g.triples(), config, false, 1);
    check_separation(export_embeddings(m));
  }

  Rdf2vecConfig rconfig;
  rconfig.dim = 16;
  rconfig.epochs = 4;
  rconfig.walks_per_entity = 20;
  rconfig.depth = 3;
  const WalkCorpus corpus = generate_walks(g, rconfig.walks_per_entity, rconfig.depth, 23);
  check_separation(train_skipgram(corpus, rconfig, false, 1));
}

TEST_CASE("hogwild parallel epoch still learns") {
  const KnowledgeGraph g = clustered_graph(2, 15, 80, 29);
  TrainConfig config;
  config.dim = 16;
  config.epochs = 15;
  config.negatives = 4;
  config.batch_size = 16;
  config.learning_rate = 0.05;
  EmbeddingModel m = EmbeddingModel::init(ModelKind::TransE, g.entity_count(),
                                          g.relation_count(), config);
  const std::vector<double> losses = train_model(m, g.triples(), config, true, 4);
  CHECK(losses.back() < losses.front());
}

}  // TEST_SUITE
